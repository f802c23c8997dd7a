#pragma once

#include <string>
#include <variant>
#include <vector>

#include "priorimpact/numerics.hpp"

namespace priorimpact {

/// Gamma distribution parameterized by SHAPE and RATE: density ∝ t^(shape-1) e^(-rate t).
/// Matches the conjugate Poisson update (Σx + α, n + β).
class GammaDist {
 public:
  GammaDist(double shape, double rate);
  double shape() const noexcept { return shape_; }
  double rate() const noexcept { return rate_; }
  bool operator==(const GammaDist&) const = default;

 private:
  double shape_;
  double rate_;
};

/// Inverse-Gamma distribution parameterized by SHAPE and SCALE: density ∝ t^(-shape-1) e^(-scale/t).
/// Matches the normal-variance update (n/2, S/2). The mean exists only for shape > 1
/// and the variance only for shape > 2.
class InverseGammaDist {
 public:
  InverseGammaDist(double shape, double scale);
  double shape() const noexcept { return shape_; }
  double scale() const noexcept { return scale_; }
  bool operator==(const InverseGammaDist&) const = default;

 private:
  double shape_;
  double scale_;
};

class BetaDist {
 public:
  BetaDist(double a, double b);
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  bool operator==(const BetaDist&) const = default;

 private:
  double a_;
  double b_;
};

enum class Family { Gamma, InverseGamma, Beta };

/// One of the three posterior families behind a common contract.
class DistributionSpec {
 public:
  using Params = std::variant<GammaDist, InverseGammaDist, BetaDist>;

  DistributionSpec(GammaDist d) : params_(d) {}
  DistributionSpec(InverseGammaDist d) : params_(d) {}
  DistributionSpec(BetaDist d) : params_(d) {}

  static DistributionSpec gamma(double shape, double rate) { return GammaDist(shape, rate); }
  static DistributionSpec inverse_gamma(double shape, double scale) {
    return InverseGammaDist(shape, scale);
  }
  static DistributionSpec beta(double a, double b) { return BetaDist(a, b); }

  Family family() const noexcept { return static_cast<Family>(params_.index()); }
  const Params& params() const noexcept { return params_; }
  /// (0, ∞) for Gamma and Inverse-Gamma, (0, 1) for Beta.
  Interval support() const noexcept;
  std::string describe() const;

  bool operator==(const DistributionSpec&) const = default;

 private:
  Params params_;
};

double log_pdf(const DistributionSpec& d, double t);
/// Zero outside the support.
double pdf(const DistributionSpec& d, double t);
/// Clamped to 0 / 1 outside the support.
double cdf(const DistributionSpec& d, double t);
/// 1 - cdf, evaluated without cancellation in the upper tail.
double survival(const DistributionSpec& d, double t);

/// Inverse CDF by bracketed bisection with Newton polish. Requires 0 < p < 1.
double quantile(const DistributionSpec& d, double p);
/// Point t with survival(t) = q, for upper-tail probabilities too small for `quantile`.
double quantile_upper(const DistributionSpec& d, double q);

bool has_mean(const DistributionSpec& d) noexcept;
bool has_variance(const DistributionSpec& d) noexcept;
/// Throws UndefinedMoment when the mean does not exist.
double mean(const DistributionSpec& d);
/// Throws UndefinedMoment when the variance does not exist.
double variance(const DistributionSpec& d);

/// E[X; X <= t] and E[X; X > t] in closed form. Throw UndefinedMoment without a mean.
double partial_expectation_below(const DistributionSpec& d, double t);
double partial_expectation_above(const DistributionSpec& d, double t);

/// Closed-form Stein kernel τ(t) = (1/p(t)) ∫_a^t (μ - y) p(y) dy:
///   Gamma(shape, rate):          t / rate
///   InverseGamma(shape, scale):  t² / (shape - 1)        (needs shape > 1)
///   Beta(a, b):                  t (1 - t) / (a + b)
/// Returns 0 outside the support.
double stein_kernel_closed(const DistributionSpec& d, double t);

/// Stein kernel evaluated from its defining integral by quadrature. For t past
/// the mean the equivalent upper-tail form ∫_t^b (y - μ) p(y) dy is used.
double stein_kernel_numeric(const RealFunction& density, Interval support, double mean, double t,
                            const QuadratureSettings& settings = {});

/// Quantile-based breakpoints used to split expectations over the support.
std::vector<double> expectation_breakpoints(const DistributionSpec& d);

/// E[f(X)] by piecewise adaptive quadrature over the support. Interior pieces
/// run between `breakpoints` (plus any `extra` points), end pieces are clustered
/// logarithmically toward the support boundaries. For a Beta density singular
/// at 1 the upper part is integrated in s = 1 - t.
QuadratureResult expectation(const DistributionSpec& d, const RealFunction& f,
                             const QuadratureSettings& settings,
                             const std::vector<double>& breakpoints);
QuadratureResult expectation(const DistributionSpec& d, const RealFunction& f,
                             const QuadratureSettings& settings = {});

/// Integral of g over the union of pieces spanned by sorted interior `cuts` of
/// `domain`, with clustered end pieces. Shared by expectation and the oracle.
QuadratureResult integrate_piecewise(const RealFunction& g, Interval domain,
                                     const std::vector<double>& cuts,
                                     const QuadratureSettings& settings);

}  // namespace priorimpact
