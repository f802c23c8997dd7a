#include "priorimpact/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "priorimpact/errors.hpp"

namespace priorimpact {

namespace {

void require_means(const DistributionSpec& p, const DistributionSpec& q) {
  for (const auto* d : {&p, &q}) {
    if (!has_mean(*d)) {
      throw UndefinedMoment("w1_distance: mean undefined for " + d->describe());
    }
  }
}

double cdf_integral(const DistributionSpec& p, const DistributionSpec& q,
                    const QuadratureSettings& settings) {
  const Interval sp = p.support();
  const Interval sq = q.support();
  const Interval domain{std::min(sp.lo, sq.lo), std::max(sp.hi, sq.hi)};

  std::vector<double> cuts = expectation_breakpoints(p);
  const auto more = expectation_breakpoints(q);
  cuts.insert(cuts.end(), more.begin(), more.end());
  for (double e : {sp.lo, sp.hi, sq.lo, sq.hi}) {
    if (domain.contains(e)) cuts.push_back(e);
  }
  std::sort(cuts.begin(), cuts.end());

  // Past both medians the survival functions carry the significant digits.
  const RealFunction gap = [&](double t) {
    const double fp = cdf(p, t);
    const double fq = cdf(q, t);
    if (fp > 0.5 && fq > 0.5) return std::abs(survival(p, t) - survival(q, t));
    return std::abs(fp - fq);
  };
  return integrate_piecewise(gap, domain, cuts, settings).value;
}

double quantile_integral(const DistributionSpec& p, const DistributionSpec& q,
                         const QuadratureSettings& settings) {
  // u = e^(-v)/2 on the lower half and 1 - u = e^(-v)/2 on the upper half,
  // v in (0, v_max) with e^(-v_max)/2 = kQuantileTailMass.
  const double v_max = std::log(0.5 / kQuantileTailMass);
  const RealFunction lower_half = [&](double v) {
    const double u = 0.5 * std::exp(-v);
    return std::abs(quantile(p, u) - quantile(q, u)) * u;
  };
  const RealFunction upper_half = [&](double v) {
    const double w = 0.5 * std::exp(-v);
    return std::abs(quantile_upper(p, w) - quantile_upper(q, w)) * w;
  };
  const Interval range{0.0, v_max};
  double total = integrate_with_error(lower_half, range, settings).value +
                 integrate_with_error(upper_half, range, settings).value;

  // Beyond the cut-offs the quantile functions are taken not to cross again,
  // so each omitted tail is the difference of partial expectations.
  const double eps = kQuantileTailMass;
  total += std::abs(partial_expectation_below(p, quantile(p, eps)) -
                    partial_expectation_below(q, quantile(q, eps)));
  total += std::abs(partial_expectation_above(p, quantile_upper(p, eps)) -
                    partial_expectation_above(q, quantile_upper(q, eps)));
  return total;
}

}  // namespace

double w1_distance(const DistributionSpec& p, const DistributionSpec& q, const OracleSettings& s) {
  require_means(p, q);
  switch (s.method) {
    case OracleMethod::CdfIntegral:
      return cdf_integral(p, q, s.settings);
    case OracleMethod::QuantileIntegral:
      return quantile_integral(p, q, s.settings);
  }
  return 0.0;
}

std::pair<double, double> w1_crosscheck(const DistributionSpec& p, const DistributionSpec& q,
                                        const OracleSettings& s) {
  OracleSettings by_cdf = s;
  by_cdf.method = OracleMethod::CdfIntegral;
  OracleSettings by_quantile = s;
  by_quantile.method = OracleMethod::QuantileIntegral;
  const double a = w1_distance(p, q, by_cdf);
  const double b = w1_distance(p, q, by_quantile);
  const double scale = std::max(std::abs(a), std::abs(b));
  if (std::abs(a - b) > kOracleAgreementRelTol * scale + 1e-14) {
    std::ostringstream os;
    os.precision(12);
    os << "w1_crosscheck: CDF integral " << a << " and quantile integral " << b
       << " disagree for " << p.describe() << " vs " << q.describe();
    throw OracleInconsistency(os.str());
  }
  return {a, b};
}

}  // namespace priorimpact
