#include "priorimpact/bounds_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "priorimpact/errors.hpp"

namespace priorimpact {

namespace {

constexpr int kSignScanPoints = 1024;
constexpr int kSupGridPoints = 4096;

// ρ and ρ' rescaled by ρ at the base median, so the integrands stay O(1)
// whatever constant the caller's ρ carries.
struct Prepared {
  const NestedPair& pair;
  double reference = 1.0;      // linear-domain ρ at the probe point
  double log_reference = 0.0;  // log-domain counterpart
  std::vector<double> cuts;
  double base_mean = std::nan("");

  explicit Prepared(const NestedPair& p) : pair(p) {
    const double median = quantile(p.base, 0.5);
    const double probe = p.support2.contains(median) ? median
                         : p.support2.lo_finite() && p.support2.hi_finite()
                             ? 0.5 * (p.support2.lo + p.support2.hi)
                             : median;
    if (p.support2.contains(probe)) {
      if (log_domain()) {
        const double lr = p.log_rho(probe);
        if (std::isfinite(lr)) log_reference = lr;
      } else {
        const double r = p.rho(probe);
        if (r > 0.0 && std::isfinite(r)) reference = r;
      }
    }
    cuts = expectation_breakpoints(p.base);
    for (double e : {p.support2.lo, p.support2.hi}) {
      if (p.base.support().contains(e)) cuts.push_back(e);
    }
    std::sort(cuts.begin(), cuts.end());
    if (has_mean(p.base)) base_mean = mean(p.base);
  }

  bool log_domain() const { return pair.log_rho && pair.log_rho_derivative; }
  bool inside(double t) const { return pair.support2.contains(t); }

  double rho(double t) const {
    if (!inside(t)) return 0.0;
    if (log_domain()) return std::exp(pair.log_rho(t) - log_reference);
    return pair.rho(t) / reference;
  }

  double rho_prime(double t) const {
    if (!inside(t)) return 0.0;
    if (log_domain()) {
      const double g = pair.log_rho_derivative(t);
      if (g == 0.0) return 0.0;
      const double w = std::exp(pair.log_rho(t) - log_reference);
      return w == 0.0 ? 0.0 : g * w;
    }
    if (pair.rho_prime) return pair.rho_prime(t) / reference;
    return central_difference(pair.rho, t, pair.support2) / reference;
  }

  // ρ(t) p₁(t)
  double rho_density(double t) const {
    if (!inside(t)) return 0.0;
    if (log_domain()) return std::exp(pair.log_rho(t) - log_reference + log_pdf(pair.base, t));
    const double p = pdf(pair.base, t);
    return p == 0.0 ? 0.0 : rho(t) * p;
  }

  // ρ'(t) p₁(t)
  double rho_prime_density(double t) const {
    if (!inside(t)) return 0.0;
    if (log_domain()) {
      const double g = pair.log_rho_derivative(t);
      if (g == 0.0) return 0.0;
      // (log ρ)' may overflow where ρ p₁ has already underflowed to zero.
      const double w = std::exp(pair.log_rho(t) - log_reference + log_pdf(pair.base, t));
      return w == 0.0 ? 0.0 : g * w;
    }
    const double p = pdf(pair.base, t);
    return p == 0.0 ? 0.0 : rho_prime(t) * p;
  }

  double tau(double t) const {
    if (!pair.numeric_kernel) return stein_kernel_closed(pair.base, t);
    if (std::isnan(base_mean)) {
      throw UndefinedMoment("Stein kernel undefined: base mean does not exist");
    }
    const auto& base = pair.base;
    return stein_kernel_numeric([&base](double y) { return pdf(base, y); }, base.support(),
                                base_mean, t);
  }

  double integral(const RealFunction& g, const QuadratureSettings& s) const {
    return integrate_piecewise(g, pair.base.support(), cuts, s).value;
  }

  double e_rho(const QuadratureSettings& s) const {
    return integral([this](double t) { return rho_density(t); }, s);
  }

  double e_tau_rho_prime(const QuadratureSettings& s, bool absolute) const {
    return integral(
        [this, absolute](double t) {
          const double d = rho_prime_density(t);
          if (d == 0.0) return 0.0;
          return tau(t) * (absolute ? std::abs(d) : d);
        },
        s);
  }

  // The signed integrand can cancel, so its absolute tolerance is tied to a
  // first estimate of the unsigned integral rather than to the (possibly tiny)
  // result. Both integrals then run with the same settings, which makes them
  // agree to the last bit when ρ' keeps one sign.
  QuadratureSettings tightened(const QuadratureSettings& s) const {
    const double rough = e_tau_rho_prime(s, true);
    QuadratureSettings tight = s;
    const double floor = s.rel_tol * 1e-4 * rough;
    if (floor > 0.0) tight.abs_tol = std::min(s.abs_tol, floor);
    return tight;
  }
};

void require_normalizable(double e_rho) {
  if (!(e_rho > 0.0) || !std::isfinite(e_rho)) {
    std::ostringstream os;
    os << "bounds engine: E[rho(Theta_1)] must be positive and finite, got " << e_rho;
    throw DomainError(os.str());
  }
}

}  // namespace

NestedPair::NestedPair(DistributionSpec base_dist, RealFunction ratio, RealFunction ratio_prime)
    : NestedPair(base_dist, std::move(ratio), std::move(ratio_prime), base_dist.support()) {}

NestedPair::NestedPair(DistributionSpec base_dist, RealFunction ratio, RealFunction ratio_prime,
                       Interval support)
    : base(base_dist),
      rho(std::move(ratio)),
      rho_prime(std::move(ratio_prime)),
      support2(support) {
  const Interval s1 = base.support();
  if (!(support2.lo >= s1.lo && support2.hi <= s1.hi && support2.lo < support2.hi)) {
    throw DomainError("NestedPair: support of the second posterior must lie inside the base support");
  }
  if (!rho) throw DomainError("NestedPair: rho is required");
}

NestedPair NestedPair::from_log_ratio(DistributionSpec base_dist, RealFunction log_ratio,
                                      RealFunction log_ratio_derivative) {
  RealFunction rho = [log_ratio](double t) { return std::exp(log_ratio(t)); };
  RealFunction rho_prime = [log_ratio, log_ratio_derivative](double t) {
    const double g = log_ratio_derivative(t);
    if (g == 0.0) return 0.0;
    const double w = std::exp(log_ratio(t));
    return w == 0.0 ? 0.0 : g * w;
  };
  NestedPair pair(base_dist, std::move(rho), std::move(rho_prime));
  pair.log_rho = std::move(log_ratio);
  pair.log_rho_derivative = std::move(log_ratio_derivative);
  return pair;
}

double central_difference(const RealFunction& f, double theta, Interval domain) {
  double h = std::max(1e-6, 1e-6 * std::abs(theta));
  const double room = std::min(theta - domain.lo, domain.hi - theta);
  if (!(h < 1e-2 * room)) h = 1e-3 * room;
  return (f(theta + h) - f(theta - h)) / (2.0 * h);
}

ConditionReport check_conditions(const NestedPair& pair, const QuadratureSettings& settings) {
  ConditionReport report;
  std::ostringstream notes;
  if (!has_mean(pair.base)) {
    report.cond_i_finite = false;
    report.cond_iii_lower_limit = std::nan("");
    report.cond_iii_upper_limit = std::nan("");
    notes << "base posterior " << pair.base.describe() << " has no mean; condition (i) fails";
    report.notes = notes.str();
    return report;
  }
  const Prepared prep(pair);
  const double mu = prep.base_mean;
  try {
    const double v =
        prep.integral([&](double t) { return std::abs(t - mu) * prep.rho_density(t); }, settings);
    report.cond_i_finite = std::isfinite(v);
    if (!report.cond_i_finite) notes << "E[|Theta_1 - mu_1| rho] is not finite; ";
  } catch (const std::exception& e) {
    report.cond_i_finite = false;
    notes << "E[|Theta_1 - mu_1| rho] did not converge: " << e.what() << "; ";
  }

  // ∫_{a₁}^θ (y - μ₁) p₁ dy = -τ₁(θ) p₁(θ), so the boundary term is -ρ τ₁ p₁.
  auto boundary_term = [&](double t) { return -prep.rho_density(t) * prep.tau(t); };
  auto last_finite = [&](auto points) {
    double value = std::nan("");
    for (double t : points) {
      if (!pair.support2.contains(t)) continue;
      const double v = boundary_term(t);
      if (std::isfinite(v)) value = v;
    }
    return value;
  };
  const Interval s2 = pair.support2;
  const double q_lo = std::max(quantile(pair.base, 1e-6), s2.lo);
  const double q_hi = std::min(quantile_upper(pair.base, 1e-6), s2.hi);
  std::vector<double> lower_pts;
  std::vector<double> upper_pts;
  for (int k = 1; k <= 30; ++k) {
    const double f = std::pow(10.0, -k);
    lower_pts.push_back(s2.lo + (q_lo - s2.lo) * f);
    upper_pts.push_back(s2.hi_finite() ? s2.hi - (s2.hi - q_hi) * f : q_hi / f);
  }
  report.cond_iii_lower_limit = last_finite(lower_pts);
  report.cond_iii_upper_limit = last_finite(upper_pts);
  notes << "condition (iii) probed for h(y) = y only; condition (ii) assumed";
  report.notes = notes.str();
  return report;
}

double lower_bound(const NestedPair& pair, const QuadratureSettings& settings) {
  const Prepared prep(pair);
  const double e_rho = prep.e_rho(settings);
  require_normalizable(e_rho);
  return std::abs(prep.e_tau_rho_prime(prep.tightened(settings), false)) / e_rho;
}

double upper_bound(const NestedPair& pair, const QuadratureSettings& settings) {
  const Prepared prep(pair);
  const double e_rho = prep.e_rho(settings);
  require_normalizable(e_rho);
  return prep.e_tau_rho_prime(prep.tightened(settings), true) / e_rho;
}

namespace {

std::optional<double> supnorm_with(const Prepared& prep, double e_rho) {
  if (!has_variance(prep.pair.base)) return std::nullopt;
  const double sup =
      sup_abs_on([&prep](double t) { return prep.rho_prime(t); }, prep.pair.support2, kSupGridPoints);
  if (!std::isfinite(sup)) return std::nullopt;
  return sup * variance(prep.pair.base) / e_rho;
}

}  // namespace

std::optional<double> upper_bound_supnorm(const NestedPair& pair,
                                          const QuadratureSettings& settings) {
  if (!has_variance(pair.base)) return std::nullopt;
  const Prepared prep(pair);
  const double e_rho = prep.e_rho(settings);
  require_normalizable(e_rho);
  return supnorm_with(prep, e_rho);
}

bool rho_prime_constant_sign(const NestedPair& pair) {
  const Prepared prep(pair);
  bool seen_positive = false;
  bool seen_negative = false;
  auto visit = [&](double t) {
    const double d = prep.rho_prime(t);
    if (std::isnan(d) || d == 0.0) return;
    (d > 0.0 ? seen_positive : seen_negative) = true;
  };
  for (double t : scan_grid(pair.support2, kSignScanPoints)) visit(t);
  const Interval s = pair.support2;
  // endpoint limits
  for (int k = 1; k <= 3; ++k) {
    const double f = std::pow(10.0, -100.0 * k);
    if (s.lo_finite()) visit(s.lo + std::max(f, 8e-16 * std::abs(s.lo)));
    if (s.hi_finite()) visit(s.hi - std::max(f, 8e-16 * std::abs(s.hi)));
    if (!s.hi_finite()) visit(1.0 / f);
  }
  return !(seen_positive && seen_negative);
}

BoundsResult bounds(const NestedPair& pair, const QuadratureSettings& settings) {
  const Prepared prep(pair);
  const double e_rho = prep.e_rho(settings);
  require_normalizable(e_rho);
  const QuadratureSettings tight = prep.tightened(settings);

  BoundsResult result;
  result.exact = rho_prime_constant_sign(pair);
  result.upper = prep.e_tau_rho_prime(tight, true) / e_rho;
  result.lower = std::abs(prep.e_tau_rho_prime(tight, false)) / e_rho;
  result.upper_supnorm = supnorm_with(prep, e_rho);
  return result;
}

}  // namespace priorimpact
