#include "priorimpact/models.hpp"

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

[[noreturn]] void fail(const std::string& what) { throw ModelError(what); }

void require_nonneg(const char* name, double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << name << " must be finite and >= 0, got " << v;
    fail(os.str());
  }
}

template <class Prior>
const Prior& as(const ModelCase& c, const char* fn) {
  const auto* p = std::get_if<Prior>(&c.prior);
  if (p == nullptr) {
    throw std::invalid_argument(std::string(fn) + ": wrong model variant (" +
                                model_tag(c.kind()) + ")");
  }
  return *p;
}

std::optional<double> engine_supnorm(const ModelCase& c, const QuadratureSettings& settings) {
  return upper_bound_supnorm(nested_pair(c), settings);
}

}  // namespace

std::string model_tag(ModelKind kind) {
  switch (kind) {
    case ModelKind::NormalVariance:
      return "normal-variance";
    case ModelKind::BinomialSuccess:
      return "binomial";
    case ModelKind::PoissonRate:
      return "poisson";
  }
  return "unknown";
}

ModelKind parse_model_tag(const std::string& tag) {
  if (tag == "normal-variance" || tag == "normal") return ModelKind::NormalVariance;
  if (tag == "binomial") return ModelKind::BinomialSuccess;
  if (tag == "poisson") return ModelKind::PoissonRate;
  throw ModelError("unknown model '" + tag + "' (expected normal-variance, binomial or poisson)");
}

void validate(const ModelCase& c) {
  const DataSummary& d = c.data;
  if (d.n < 1) fail("sample size n must be >= 1");
  std::visit(
      overloaded{
          [&](const NormalVariance& m) {
            require_nonneg("alpha", m.alpha);
            require_nonneg("beta", m.beta);
            if (!std::isfinite(m.mu)) fail("mu must be finite");
            if (d.n < 3) fail("normal-variance requires n >= 3 (Jeffreys posterior mean exists)");
            if (!(d.centered_sq_sum > 0.0) || !std::isfinite(d.centered_sq_sum)) {
              fail("normal-variance requires S = sum (x_i - mu)^2 > 0");
            }
          },
          [&](const BinomialSuccess& m) {
            if (!(m.alpha > 0.0) || !(m.beta > 0.0) || !std::isfinite(m.alpha) ||
                !std::isfinite(m.beta)) {
              fail("binomial requires alpha > 0 and beta > 0");
            }
            if (d.successes < 1 || d.successes > d.n - 1) {
              fail("binomial requires 1 <= x <= n-1 (at least one success and one failure)");
            }
          },
          [&](const PoissonRate& m) {
            require_nonneg("a1", m.a1);
            require_nonneg("b1", m.b1);
            require_nonneg("a2", m.a2);
            require_nonneg("b2", m.b2);
            if (!(d.sum_x >= 0.0) || !std::isfinite(d.sum_x)) fail("poisson requires sum_x >= 0");
            if (!(d.sum_x + m.a1 > 0.0) || !(d.sum_x + m.a2 > 0.0)) {
              fail("poisson requires sum_x + a_j > 0 for j = 1, 2");
            }
          },
      },
      c.prior);
}

std::pair<DistributionSpec, DistributionSpec> posterior_pair(const ModelCase& c) {
  validate(c);
  const DataSummary& d = c.data;
  const double n = static_cast<double>(d.n);
  return std::visit(
      overloaded{
          [&](const NormalVariance& m) {
            const double half_s = 0.5 * d.centered_sq_sum;
            return std::pair{DistributionSpec::inverse_gamma(0.5 * n, half_s),
                             DistributionSpec::inverse_gamma(0.5 * n + m.alpha, half_s + m.beta)};
          },
          [&](const BinomialSuccess& m) {
            const double x = static_cast<double>(d.successes);
            return std::pair{DistributionSpec::beta(x, n - x),
                             DistributionSpec::beta(m.alpha + x, m.beta + n - x)};
          },
          [&](const PoissonRate& m) {
            return std::pair{DistributionSpec::gamma(d.sum_x + m.a1, n + m.b1),
                             DistributionSpec::gamma(d.sum_x + m.a2, n + m.b2)};
          },
      },
      c.prior);
}

NestedPair nested_pair(const ModelCase& c) {
  const auto [p1, p2] = posterior_pair(c);
  (void)p2;
  return std::visit(
      overloaded{
          // ρ(σ²) = (σ²)^(-α) e^(-β/σ²),  (log ρ)' = (β - ασ²) / σ⁴
          [&](const NormalVariance& m) {
            const double a = m.alpha;
            const double b = m.beta;
            return NestedPair::from_log_ratio(
                p1, [a, b](double s2) { return -a * std::log(s2) - b / s2; },
                [a, b](double s2) {
                  const double num = b - a * s2;
                  return num == 0.0 ? 0.0 : num / (s2 * s2);
                });
          },
          // ρ(θ) = θ^α (1-θ)^β,  (log ρ)' = α/θ - β/(1-θ)
          [&](const BinomialSuccess& m) {
            const double a = m.alpha;
            const double b = m.beta;
            return NestedPair::from_log_ratio(
                p1, [a, b](double t) { return a * std::log(t) + b * std::log1p(-t); },
                [a, b](double t) {
                  const double num = a * (1.0 - t) - b * t;
                  return num == 0.0 ? 0.0 : num / (t * (1.0 - t));
                });
          },
          // ρ(θ) = θ^(α₂-α₁) e^(-(β₂-β₁)θ),  (log ρ)' = (α₂-α₁)/θ - (β₂-β₁)
          [&](const PoissonRate& m) {
            const double da = m.a2 - m.a1;
            const double db = m.b2 - m.b1;
            return NestedPair::from_log_ratio(
                p1,
                [da, db](double t) { return (da == 0.0 ? 0.0 : da * std::log(t)) - db * t; },
                [da, db](double t) {
                  const double num = da - db * t;
                  return num == 0.0 ? 0.0 : num / t;
                });
          },
      },
      c.prior);
}

BoundsResult normal_variance_bounds(const ModelCase& c, const QuadratureSettings& settings) {
  const auto& m = as<NormalVariance>(c, "normal_variance_bounds");
  validate(c);
  const double n = static_cast<double>(c.data.n);
  const double s = c.data.centered_sq_sum;
  const double k0 = 0.5 * n - 1.0;
  const double k = 0.5 * n + m.alpha - 1.0;
  BoundsResult r;
  r.lower = std::abs(0.5 * m.alpha * s - k0 * m.beta) / (k * k0);
  r.upper = (0.5 * s * m.alpha + 0.5 * n * m.beta + (2.0 * m.alpha - 1.0) * m.beta) / (k * k0);
  r.exact = false;
  r.upper_supnorm = engine_supnorm(c, settings);
  return r;
}

BoundsResult binomial_bounds(const ModelCase& c, const QuadratureSettings& settings) {
  const auto& m = as<BinomialSuccess>(c, "binomial_bounds");
  validate(c);
  const double n = static_cast<double>(c.data.n);
  const double x = static_cast<double>(c.data.successes);
  const double ab = m.alpha + m.beta;
  BoundsResult r;
  r.lower = std::abs(n * m.alpha - ab * x) / (n * (n + ab));
  r.upper = (m.alpha + (m.beta - m.alpha) * (m.alpha + x) / (ab + n)) / n;
  r.exact = false;
  r.upper_supnorm = engine_supnorm(c, settings);
  return r;
}

std::string to_string(Monotonicity m) {
  switch (m) {
    case Monotonicity::Increasing:
      return "increasing";
    case Monotonicity::Decreasing:
      return "decreasing";
    case Monotonicity::NonMonotone:
      return "non-monotone";
  }
  return "unknown";
}

Monotonicity classify_monotone(double a1, double b1, double a2, double b2) {
  if (a1 <= a2 && b1 >= b2) return Monotonicity::Increasing;
  if (a1 >= a2 && b1 <= b2) return Monotonicity::Decreasing;
  return Monotonicity::NonMonotone;
}

PoissonDiagnostics poisson_diagnostics(const ModelCase& c) {
  const auto& m = as<PoissonRate>(c, "poisson_diagnostics");
  validate(c);
  const double n = static_cast<double>(c.data.n);
  PoissonDiagnostics diag;
  diag.shape = classify_monotone(m.a1, m.b1, m.a2, m.b2);
  diag.signed_bracket = (m.a2 - m.a1) - (m.b2 - m.b1) * (c.data.sum_x + m.a2) / (n + m.b2);
  diag.corrected = std::abs(diag.signed_bracket) / (n + m.b1);
  diag.alternate_prefactor = std::abs(diag.signed_bracket) / (n + m.b2);
  return diag;
}

BoundsResult poisson_distance(const ModelCase& c, const QuadratureSettings& settings) {
  const PoissonDiagnostics diag = poisson_diagnostics(c);
  if (diag.shape == Monotonicity::NonMonotone) {
    return bounds(nested_pair(c), settings);
  }
  BoundsResult r;
  r.lower = diag.corrected;
  r.upper = diag.corrected;
  r.exact = true;
  r.upper_supnorm = engine_supnorm(c, settings);
  return r;
}

BoundsResult closed_form_bounds(const ModelCase& c, const QuadratureSettings& settings) {
  switch (c.kind()) {
    case ModelKind::NormalVariance:
      return normal_variance_bounds(c, settings);
    case ModelKind::BinomialSuccess:
      return binomial_bounds(c, settings);
    case ModelKind::PoissonRate:
      return poisson_distance(c, settings);
  }
  throw ModelError("unknown model variant");
}

}  // namespace priorimpact
