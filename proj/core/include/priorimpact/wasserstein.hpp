#pragma once

#include <utility>

#include "priorimpact/distributions.hpp"
#include "priorimpact/numerics.hpp"

namespace priorimpact {

enum class OracleMethod {
  /// ∫ |F_p(t) - F_q(t)| dt over the union of the supports.
  CdfIntegral,
  /// ∫₀¹ |F_p⁻¹(u) - F_q⁻¹(u)| du.
  QuantileIntegral,
};

struct OracleSettings {
  OracleMethod method = OracleMethod::CdfIntegral;
  QuadratureSettings settings{};
};

/// Relative tolerance within which the two oracle routes must agree.
inline constexpr double kOracleAgreementRelTol = 1e-6;

/// Probability mass left out of each end of the quantile integral; the omitted
/// pieces are restored from closed-form partial expectations.
inline constexpr double kQuantileTailMass = 1e-9;

/// Wasserstein-1 distance between two distributions with finite means, by
/// direct numerical integration. Throws UndefinedMoment if either mean is missing.
double w1_distance(const DistributionSpec& p, const DistributionSpec& q,
                   const OracleSettings& s = {});

/// Runs both routes and returns (cdf_integral, quantile_integral). Throws
/// OracleInconsistency when they differ by more than kOracleAgreementRelTol.
std::pair<double, double> w1_crosscheck(const DistributionSpec& p, const DistributionSpec& q,
                                        const OracleSettings& s = {});

}  // namespace priorimpact
