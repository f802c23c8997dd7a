#include "priorimpact/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "priorimpact/errors.hpp"

namespace priorimpact {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(const char* what, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << what << " must be positive and finite, got " << v;
    throw DomainError(os.str());
  }
}

double log_beta(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

// Monotone map between the real line and the support, used by the quantile solver.
struct SupportMap {
  bool unit;  // (0,1) via logistic, otherwise (0,∞) via exp

  double to_t(double y) const {
    if (unit) return y >= 0.0 ? 1.0 / (1.0 + std::exp(-y)) : std::exp(y) / (1.0 + std::exp(y));
    return std::exp(y);
  }
  double to_y(double t) const { return unit ? std::log(t) - std::log1p(-t) : std::log(t); }
  double dt_dy(double t) const { return unit ? t * (1.0 - t) : t; }
};

double center_guess(const DistributionSpec& d) {
  return std::visit(overloaded{
                        [](const GammaDist& g) { return g.shape() / g.rate(); },
                        [](const InverseGammaDist& g) { return g.scale() / (g.shape() + 1.0); },
                        [](const BetaDist& b) { return b.a() / (b.a() + b.b()); },
                    },
                    d.params());
}

// Solves target(t) = prob where target is cdf (increasing) or survival (decreasing).
double solve_quantile(const DistributionSpec& d, double prob, bool upper) {
  const SupportMap map{d.family() == Family::Beta};
  auto residual = [&](double y) {
    const double t = map.to_t(y);
    return upper ? prob - survival(d, t) : cdf(d, t) - prob;
  };
  // residual is nondecreasing in y for both orientations.
  double y0 = map.to_y(std::clamp(center_guess(d), 1e-300, map.unit ? 1.0 - 1e-16 : 1e300));
  double lo = y0;
  double hi = y0;
  double step = 1.0;
  constexpr double kYLimit = 745.0;
  while (residual(lo) > 0.0 && lo > -kYLimit) {
    lo = std::max(lo - step, -kYLimit);
    step *= 2.0;
  }
  step = 1.0;
  while (residual(hi) < 0.0 && hi < kYLimit) {
    hi = std::min(hi + step, kYLimit);
    step *= 2.0;
  }
  double y = std::clamp(y0, lo, hi);
  for (int iter = 0; iter < 400; ++iter) {
    const double r = residual(y);
    if (r == 0.0) return map.to_t(y);
    if (r < 0.0) {
      lo = y;
    } else {
      hi = y;
    }
    const double t = map.to_t(y);
    const double slope = pdf(d, t) * map.dt_dy(t);
    double next = (slope > 0.0 && std::isfinite(slope)) ? y - r / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double width_tol = 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(y));
    if (std::abs(next - y) <= width_tol || (hi - lo) <= width_tol) {
      return map.to_t(next);
    }
    y = next;
  }
  return map.to_t(y);
}

QuadratureResult add(QuadratureResult a, const QuadratureResult& b) {
  a.value += b.value;
  a.error += b.error;
  a.evaluations += b.evaluations;
  return a;
}

}  // namespace

GammaDist::GammaDist(double shape, double rate) : shape_(shape), rate_(rate) {
  require_positive("Gamma shape", shape);
  require_positive("Gamma rate", rate);
}

InverseGammaDist::InverseGammaDist(double shape, double scale) : shape_(shape), scale_(scale) {
  require_positive("InverseGamma shape", shape);
  require_positive("InverseGamma scale", scale);
}

BetaDist::BetaDist(double a, double b) : a_(a), b_(b) {
  require_positive("Beta a", a);
  require_positive("Beta b", b);
}

Interval DistributionSpec::support() const noexcept {
  return family() == Family::Beta ? Interval::unit() : Interval::positive_half_line();
}

std::string DistributionSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const GammaDist& g) {
                   os << "Gamma(shape=" << g.shape() << ", rate=" << g.rate() << ")";
                 },
                 [&](const InverseGammaDist& g) {
                   os << "InverseGamma(shape=" << g.shape() << ", scale=" << g.scale() << ")";
                 },
                 [&](const BetaDist& b) { os << "Beta(" << b.a() << ", " << b.b() << ")"; },
             },
             params_);
  return os.str();
}

double log_pdf(const DistributionSpec& d, double t) {
  if (!d.support().contains(t)) return -kInf;
  return std::visit(
      overloaded{
          [t](const GammaDist& g) {
            const double a = g.shape();
            const double b = g.rate();
            return a * std::log(b) - log_gamma(a) + (a - 1.0) * std::log(t) - b * t;
          },
          [t](const InverseGammaDist& g) {
            const double a = g.shape();
            const double s = g.scale();
            return a * std::log(s) - log_gamma(a) - (a + 1.0) * std::log(t) - s / t;
          },
          [t](const BetaDist& b) {
            return -log_beta(b.a(), b.b()) + (b.a() - 1.0) * std::log(t) +
                   (b.b() - 1.0) * std::log1p(-t);
          },
      },
      d.params());
}

double pdf(const DistributionSpec& d, double t) {
  if (!d.support().contains(t)) return 0.0;
  return std::exp(log_pdf(d, t));
}

double cdf(const DistributionSpec& d, double t) {
  const Interval s = d.support();
  if (!(t > s.lo)) return 0.0;
  if (!(t < s.hi)) return 1.0;
  return std::visit(
      overloaded{
          [t](const GammaDist& g) { return reg_incomplete_gamma_lower(g.shape(), g.rate() * t); },
          [t](const InverseGammaDist& g) {
            return reg_incomplete_gamma_upper(g.shape(), g.scale() / t);
          },
          [t](const BetaDist& b) { return reg_incomplete_beta(b.a(), b.b(), t); },
      },
      d.params());
}

double survival(const DistributionSpec& d, double t) {
  const Interval s = d.support();
  if (!(t > s.lo)) return 1.0;
  if (!(t < s.hi)) return 0.0;
  return std::visit(
      overloaded{
          [t](const GammaDist& g) { return reg_incomplete_gamma_upper(g.shape(), g.rate() * t); },
          [t](const InverseGammaDist& g) {
            return reg_incomplete_gamma_lower(g.shape(), g.scale() / t);
          },
          [t](const BetaDist& b) { return reg_incomplete_beta_complement(b.a(), b.b(), t); },
      },
      d.params());
}

double quantile(const DistributionSpec& d, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream os;
    os << "quantile: p must lie in (0,1), got " << p;
    throw DomainError(os.str());
  }
  if (p > 0.5) return solve_quantile(d, 1.0 - p, true);
  return solve_quantile(d, p, false);
}

double quantile_upper(const DistributionSpec& d, double q) {
  if (!(q > 0.0 && q < 1.0)) {
    std::ostringstream os;
    os << "quantile_upper: q must lie in (0,1), got " << q;
    throw DomainError(os.str());
  }
  if (q > 0.5) return solve_quantile(d, 1.0 - q, false);
  return solve_quantile(d, q, true);
}

bool has_mean(const DistributionSpec& d) noexcept {
  if (const auto* g = std::get_if<InverseGammaDist>(&d.params())) return g->shape() > 1.0;
  return true;
}

bool has_variance(const DistributionSpec& d) noexcept {
  if (const auto* g = std::get_if<InverseGammaDist>(&d.params())) return g->shape() > 2.0;
  return true;
}

double mean(const DistributionSpec& d) {
  if (!has_mean(d)) throw UndefinedMoment("mean undefined for " + d.describe());
  return std::visit(overloaded{
                        [](const GammaDist& g) { return g.shape() / g.rate(); },
                        [](const InverseGammaDist& g) { return g.scale() / (g.shape() - 1.0); },
                        [](const BetaDist& b) { return b.a() / (b.a() + b.b()); },
                    },
                    d.params());
}

double variance(const DistributionSpec& d) {
  if (!has_variance(d)) throw UndefinedMoment("variance undefined for " + d.describe());
  return std::visit(overloaded{
                        [](const GammaDist& g) { return g.shape() / (g.rate() * g.rate()); },
                        [](const InverseGammaDist& g) {
                          const double a = g.shape();
                          const double s = g.scale();
                          return s * s / ((a - 1.0) * (a - 1.0) * (a - 2.0));
                        },
                        [](const BetaDist& b) {
                          const double s = b.a() + b.b();
                          return b.a() * b.b() / (s * s * (s + 1.0));
                        },
                    },
                    d.params());
}

double partial_expectation_below(const DistributionSpec& d, double t) {
  const double m = mean(d);
  const Interval s = d.support();
  if (!(t > s.lo)) return 0.0;
  if (!(t < s.hi)) return m;
  return std::visit(
      overloaded{
          [&](const GammaDist& g) {
            return m * reg_incomplete_gamma_lower(g.shape() + 1.0, g.rate() * t);
          },
          [&](const InverseGammaDist& g) {
            return m * reg_incomplete_gamma_upper(g.shape() - 1.0, g.scale() / t);
          },
          [&](const BetaDist& b) { return m * reg_incomplete_beta(b.a() + 1.0, b.b(), t); },
      },
      d.params());
}

double partial_expectation_above(const DistributionSpec& d, double t) {
  const double m = mean(d);
  const Interval s = d.support();
  if (!(t > s.lo)) return m;
  if (!(t < s.hi)) return 0.0;
  return std::visit(
      overloaded{
          [&](const GammaDist& g) {
            return m * reg_incomplete_gamma_upper(g.shape() + 1.0, g.rate() * t);
          },
          [&](const InverseGammaDist& g) {
            return m * reg_incomplete_gamma_lower(g.shape() - 1.0, g.scale() / t);
          },
          [&](const BetaDist& b) {
            return m * reg_incomplete_beta_complement(b.a() + 1.0, b.b(), t);
          },
      },
      d.params());
}

double stein_kernel_closed(const DistributionSpec& d, double t) {
  if (!d.support().contains(t)) return 0.0;
  return std::visit(overloaded{
                        [t](const GammaDist& g) { return t / g.rate(); },
                        [t, &d](const InverseGammaDist& g) {
                          if (!(g.shape() > 1.0)) {
                            throw UndefinedMoment("Stein kernel undefined for " + d.describe() +
                                                  ": the mean does not exist");
                          }
                          return t * t / (g.shape() - 1.0);
                        },
                        [t](const BetaDist& b) { return t * (1.0 - t) / (b.a() + b.b()); },
                    },
                    d.params());
}

double stein_kernel_numeric(const RealFunction& density, Interval support, double mean, double t,
                            const QuadratureSettings& settings) {
  if (!support.contains(t)) {
    std::ostringstream os;
    os << "stein_kernel_numeric: t = " << t << " is not interior to the support";
    throw DomainError(os.str());
  }
  const double p = density(t);
  if (!(p > 0.0)) return 0.0;
  // Both tails give the same value since ∫ (y - μ) p(y) dy = 0 over the support.
  // The side away from the mean is tried first; the other side is the fallback.
  auto below = [&] {
    const RealFunction g = [&](double y) { return (mean - y) * density(y); };
    const Interval piece{support.lo, t};
    return support.lo_finite() ? integrate_clustered(g, piece, Cluster::Lower, settings)
                               : integrate_with_error(g, piece, settings);
  };
  auto above = [&] {
    const RealFunction g = [&](double y) { return (y - mean) * density(y); };
    const Interval piece{t, support.hi};
    return integrate_clustered(g, piece, Cluster::Upper, settings, std::max(std::abs(t), 1e-300));
  };
  const bool lower_first = t <= mean;
  try {
    return (lower_first ? below() : above()).value / p;
  } catch (const ConvergenceError& first) {
    try {
      return (lower_first ? above() : below()).value / p;
    } catch (const ConvergenceError&) {
      throw first;
    }
  }
}

std::vector<double> expectation_breakpoints(const DistributionSpec& d) {
  static constexpr double kLower[] = {1e-10, 1e-6, 1e-3, 0.02, 0.16, 0.5};
  static constexpr double kUpper[] = {0.16, 0.02, 1e-3, 1e-6, 1e-10};
  std::vector<double> cuts;
  for (double p : kLower) cuts.push_back(quantile(d, p));
  for (double q : kUpper) cuts.push_back(quantile_upper(d, q));
  const Interval s = d.support();
  std::erase_if(cuts, [&](double x) { return !s.contains(x); });
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

QuadratureResult integrate_piecewise(const RealFunction& g, Interval domain,
                                     const std::vector<double>& cuts,
                                     const QuadratureSettings& settings) {
  std::vector<double> pts;
  for (double c : cuts) {
    if (domain.contains(c)) pts.push_back(c);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.empty()) {
    if (domain.lo_finite() && domain.hi_finite()) {
      pts.push_back(0.5 * (domain.lo + domain.hi));
    } else if (domain.lo_finite()) {
      pts.push_back(domain.lo + 1.0);
    } else if (domain.hi_finite()) {
      pts.push_back(domain.hi - 1.0);
    } else {
      pts.push_back(0.0);
    }
  }

  // A piece that misses its own tolerance is kept when the summed error still
  // meets the tolerance of the whole integral (tail pieces near a finite
  // endpoint are limited by the spacing of doubles there).
  bool soft = false;
  auto piece = [&](auto&& run) {
    try {
      return run();
    } catch (const ConvergenceError& e) {
      soft = true;
      return QuadratureResult{e.estimate(), e.error_estimate(), 0};
    }
  };
  QuadratureResult total;
  const Interval head{domain.lo, pts.front()};
  total = add(total, piece([&] {
                return domain.lo_finite() ? integrate_clustered(g, head, Cluster::Lower, settings)
                                          : integrate_with_error(g, head, settings);
              }));
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Interval mid{pts[i], pts[i + 1]};
    total = add(total, piece([&] { return integrate_with_error(g, mid, settings); }));
  }
  const Interval tail{pts.back(), domain.hi};
  const double scale = pts.back() > 0.0 ? pts.back() : 1.0;
  total = add(total, piece([&] {
                return integrate_clustered(g, tail, Cluster::Upper, settings, scale);
              }));
  const double tol = std::max(settings.abs_tol, settings.rel_tol * std::abs(total.value));
  if (soft && !(total.error <= tol)) {
    std::ostringstream os;
    os << "integrate_piecewise: no convergence on (" << domain.lo << ", " << domain.hi
       << "), estimate " << total.value << ", error estimate " << total.error << ", tolerance "
       << tol;
    throw ConvergenceError(os.str(), total.value, total.error);
  }
  return total;
}

QuadratureResult expectation(const DistributionSpec& d, const RealFunction& f,
                             const QuadratureSettings& settings,
                             const std::vector<double>& breakpoints) {
  const RealFunction integrand = [&](double t) {
    const double p = pdf(d, t);
    if (p == 0.0) return 0.0;
    return f(t) * p;
  };
  const auto* beta = std::get_if<BetaDist>(&d.params());
  if (beta == nullptr || beta->b() >= 1.0) {
    return integrate_piecewise(integrand, d.support(), breakpoints, settings);
  }
  // A density singular at 1 keeps mass within one ulp of 1, which t cannot
  // resolve; the upper part is integrated in s = 1 - t instead.
  const DistributionSpec mirror = DistributionSpec::beta(beta->b(), beta->a());
  const double split = 1.0 - quantile(mirror, 0.16);
  const double s_hi = 1.0 - split;
  std::vector<double> lower_cuts;
  for (double c : breakpoints) {
    if (c < split) lower_cuts.push_back(c);
  }
  std::vector<double> upper_cuts;
  for (double c : expectation_breakpoints(mirror)) {
    if (c < s_hi) upper_cuts.push_back(c);
  }
  const RealFunction reflected = [&](double s) {
    const double p = pdf(mirror, s);
    if (p == 0.0) return 0.0;
    return f(1.0 - s) * p;
  };
  const QuadratureResult lo = integrate_piecewise(integrand, {0.0, split}, lower_cuts, settings);
  const QuadratureResult hi = integrate_piecewise(reflected, {0.0, s_hi}, upper_cuts, settings);
  return add(lo, hi);
}

QuadratureResult expectation(const DistributionSpec& d, const RealFunction& f,
                             const QuadratureSettings& settings) {
  return expectation(d, f, settings, expectation_breakpoints(d));
}

}  // namespace priorimpact
