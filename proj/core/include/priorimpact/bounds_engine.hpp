#pragma once

#include <optional>
#include <string>

#include "priorimpact/distributions.hpp"
#include "priorimpact/numerics.hpp"

namespace priorimpact {

/// Lower/upper bounds on the Wasserstein-1 distance between two posteriors.
struct BoundsResult {
  double lower = 0.0;
  double upper = 0.0;
  /// sup-norm variant ||ρ'||∞ Var[Θ₁] / E[ρ(Θ₁)]; empty when inapplicable.
  std::optional<double> upper_supnorm;
  /// Set when lower == upper is the distance itself (ρ monotone).
  bool exact = false;
  std::optional<double> oracle;
};

/// A posterior pair written as p₂ ∝ ρ · p₁ with I₂ ⊆ I₁.
///
/// ρ only needs to be known up to a positive constant. `rho_prime` may be left
/// empty, in which case central differences are used.
struct NestedPair {
  DistributionSpec base;
  RealFunction rho;
  RealFunction rho_prime;
  Interval support2;
  /// Evaluate τ₁ from its defining integral instead of the closed form.
  bool numeric_kernel = false;
  /// Optional log ρ and d/dθ log ρ. When present, ρ·p₁ and ρ'·p₁ are formed in
  /// the log domain so that neither factor over- or underflows on its own.
  RealFunction log_rho;
  RealFunction log_rho_derivative;

  NestedPair(DistributionSpec base_dist, RealFunction ratio, RealFunction ratio_prime = {});
  NestedPair(DistributionSpec base_dist, RealFunction ratio, RealFunction ratio_prime,
             Interval support);

  /// Builds ρ = exp(log ρ) and ρ' = ρ · (log ρ)' from the log-domain pieces.
  static NestedPair from_log_ratio(DistributionSpec base_dist, RealFunction log_ratio,
                                   RealFunction log_ratio_derivative);
};

/// Spot checks of the theorem's regularity conditions for the nested pair.
struct ConditionReport {
  /// E[|Θ₁ - μ₁| ρ(Θ₁)] converged to a finite value.
  bool cond_i_finite = false;
  /// ρ(θ) ∫_{a₁}^θ (y - μ₁) p₁(y) dy approaching the lower / upper end of I₂
  /// (test function h(y) = y only; a necessary-condition probe, not a proof).
  double cond_iii_lower_limit = 0.0;
  double cond_iii_upper_limit = 0.0;
  std::string notes;
};

ConditionReport check_conditions(const NestedPair& pair, const QuadratureSettings& settings = {});

/// |E[τ₁ ρ'(Θ₁)]| / E[ρ(Θ₁)], which equals |μ₁ - μ₂|.
double lower_bound(const NestedPair& pair, const QuadratureSettings& settings = {});

/// E[τ₁ |ρ'(Θ₁)|] / E[ρ(Θ₁)].
double upper_bound(const NestedPair& pair, const QuadratureSettings& settings = {});

/// ||ρ'||∞ Var[Θ₁] / E[ρ(Θ₁)], or empty when the variance or the sup-norm is infinite.
std::optional<double> upper_bound_supnorm(const NestedPair& pair,
                                          const QuadratureSettings& settings = {});

/// True when ρ' keeps one sign across a 1024-point log-spaced scan of I₂ and
/// its endpoint probes. Any sign change between adjacent points returns false.
bool rho_prime_constant_sign(const NestedPair& pair);

/// Lower, upper and sup-norm bounds together; `exact` follows the sign scan.
BoundsResult bounds(const NestedPair& pair, const QuadratureSettings& settings = {});

/// Central-difference derivative with h = max(1e-6, 1e-6 |θ|). Within 100 h of an
/// endpoint of `domain` the step drops to 1e-3 of the distance to that endpoint.
double central_difference(const RealFunction& f, double theta, Interval domain);

}  // namespace priorimpact
