#pragma once

#include <string>
#include <utility>
#include <variant>

#include "priorimpact/bounds_engine.hpp"
#include "priorimpact/distributions.hpp"

namespace priorimpact {

/// Sufficient statistics of a sample. Each model reads only the fields it needs.
struct DataSummary {
  long n = 0;
  double sum_x = 0.0;            // Σ xᵢ (Poisson)
  double centered_sq_sum = 0.0;  // S = Σ (xᵢ - μ)² (normal, known μ)
  long successes = 0;            // x (binomial)

  bool operator==(const DataSummary&) const = default;
};

/// Jeffreys prior 1/σ² against an Inverse-Gamma(α, β) prior on a normal variance.
/// α = β = 0 recovers the Jeffreys prior itself.
struct NormalVariance {
  double alpha = 0.0;
  double beta = 0.0;
  double mu = 0.0;  // known location; only used when generating data
};

/// Haldane prior 1/(θ(1-θ)) against a Beta(α, β) prior on a success probability.
struct BinomialSuccess {
  double alpha = 1.0;
  double beta = 1.0;
};

/// Two Gamma(αⱼ, βⱼ) priors (shape, rate) on a Poisson rate. βⱼ = 0 and αⱼ ≤ 1
/// cover the flat, exponential and Jeffreys (α = 1/2, β = 0) priors.
struct PoissonRate {
  double a1 = 1.0;
  double b1 = 0.0;
  double a2 = 1.0;
  double b2 = 0.0;
};

using ModelPrior = std::variant<NormalVariance, BinomialSuccess, PoissonRate>;

enum class ModelKind { NormalVariance, BinomialSuccess, PoissonRate };

struct ModelCase {
  ModelPrior prior;
  DataSummary data;

  ModelKind kind() const noexcept { return static_cast<ModelKind>(prior.index()); }
};

/// "normal-variance", "binomial", "poisson".
std::string model_tag(ModelKind kind);
ModelKind parse_model_tag(const std::string& tag);

/// Throws ModelError naming the first violated invariant.
void validate(const ModelCase& c);

/// (P₁, P₂): the baseline-prior posterior and the alternative-prior posterior.
std::pair<DistributionSpec, DistributionSpec> posterior_pair(const ModelCase& c);

/// The pair as base posterior P₁ plus analytic prior ratio ρ = p₂/p₁ and ρ'.
NestedPair nested_pair(const ModelCase& c);

/// Closed-form bounds for the normal-variance comparison. The upper bound
/// applies the triangle inequality to |β - ασ²| and is therefore not sharp.
BoundsResult normal_variance_bounds(const ModelCase& c,
                                    const QuadratureSettings& settings = {});

/// Closed-form bounds for the Haldane-vs-Beta comparison (triangle-relaxed upper bound).
BoundsResult binomial_bounds(const ModelCase& c, const QuadratureSettings& settings = {});

enum class Monotonicity { Increasing, Decreasing, NonMonotone };

std::string to_string(Monotonicity m);

/// Shape of θ ↦ θ^(α₂-α₁) e^(-(β₂-β₁)θ). Equal parameter pairs count as Increasing.
Monotonicity classify_monotone(double a1, double b1, double a2, double b2);

/// Exact distance in the monotone regions, generic-engine bounds otherwise.
BoundsResult poisson_distance(const ModelCase& c, const QuadratureSettings& settings = {});

/// Both readings of the closed-form Poisson distance, for auditing the prefactor.
struct PoissonDiagnostics {
  Monotonicity shape = Monotonicity::NonMonotone;
  /// (α₂-α₁) - (β₂-β₁)(Σx+α₂)/(n+β₂), before any prefactor or absolute value.
  double signed_bracket = 0.0;
  /// |bracket| / (n + β₁): the value implemented as the distance.
  double corrected = 0.0;
  /// |bracket| / (n + β₂): the alternative prefactor, kept for comparison.
  double alternate_prefactor = 0.0;
};

PoissonDiagnostics poisson_diagnostics(const ModelCase& c);

/// Dispatch to the closed form of the case's model.
BoundsResult closed_form_bounds(const ModelCase& c, const QuadratureSettings& settings = {});

}  // namespace priorimpact
