#pragma once

#include <functional>
#include <limits>
#include <vector>

namespace priorimpact {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Open interval (lo, hi). Either end may be infinite. Endpoints are never evaluated.
struct Interval {
  double lo;
  double hi;

  static Interval make(double lo, double hi);
  static Interval positive_half_line() { return {0.0, kInf}; }
  static Interval unit() { return {0.0, 1.0}; }

  bool contains(double t) const noexcept { return t > lo && t < hi; }
  bool lo_finite() const noexcept { return lo > -kInf; }
  bool hi_finite() const noexcept { return hi < kInf; }
  bool operator==(const Interval&) const = default;
};

struct QuadratureSettings {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_depth = 60;
  double tail_cutoff_mass = 1e-14;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

using RealFunction = std::function<double(double)>;

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// ln Γ(z) for z > 0.
double log_gamma(double z);

/// Regularized lower incomplete gamma P(a, x).
double reg_incomplete_gamma_lower(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), accurate in the tail.
double reg_incomplete_gamma_upper(double a, double x);

/// Regularized incomplete beta I_x(a, b).
double reg_incomplete_beta(double a, double b, double x);
/// 1 - I_x(a, b), accurate when I_x(a, b) is close to one.
double reg_incomplete_beta_complement(double a, double b, double x);

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Globally adaptive 21-point Gauss-Kronrod quadrature over an open interval.
///
/// Semi-infinite ranges are mapped onto (0,1) with x = lo + t/(1-t) (mirrored
/// for an infinite lower end); the doubly infinite line is split at 0. The
/// integrand is never evaluated at an endpoint, and mapped nodes that round
/// onto an endpoint or overflow contribute zero.
///
/// Converges when the summed error estimate is at most
/// max(abs_tol, rel_tol * |result|), or when every remaining error is at the
/// roundoff floor of its subinterval. Throws ConvergenceError otherwise.
QuadratureResult integrate_with_error(const RealFunction& f, Interval domain,
                                      const QuadratureSettings& settings = {});

double integrate(const RealFunction& f, Interval domain, const QuadratureSettings& settings = {});

/// Which endpoint a logarithmic change of variables clusters nodes toward.
enum class Cluster { Lower, Upper };

/// Adaptive quadrature after an exponential change of variables that resolves
/// several decades of scale next to one endpoint.
///
/// Cluster::Lower (lo finite):  x = lo + (hi - lo) * exp(-u)
/// Cluster::Upper, hi finite:   x = hi - (hi - lo) * exp(-u)
/// Cluster::Upper, hi infinite: x = lo + scale * expm1(u)
/// with u = t/(1-t), t in (0,1). Power-law tails and x^(a-1) singularities
/// become exponentially decaying integrands in u.
QuadratureResult integrate_clustered(const RealFunction& f, Interval domain, Cluster toward,
                                     const QuadratureSettings& settings = {}, double scale = 1.0);

/// Sample points strictly inside `domain`: a uniform grid on finite parts and
/// logarithmic spacing toward any endpoint at 0, at a finite edge, or at infinity.
std::vector<double> scan_grid(Interval domain, int points);

/// sup |f| over the open interval. Dense scan_grid search, golden-section
/// refinement of the best bracket, and endpoint probes. Returns +infinity when
/// probes toward an endpoint overflow or grow at least log-linearly.
double sup_abs_on(const RealFunction& f, Interval domain, int grid_points = 4096);

}  // namespace priorimpact
