#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "priorimpact/bounds_engine.hpp"
#include "priorimpact/errors.hpp"
#include "priorimpact/models.hpp"

using namespace priorimpact;

namespace {

ModelCase normal_case(long n, double s, double alpha, double beta) {
  return {NormalVariance{alpha, beta, 0.0}, DataSummary{n, 0.0, s, 0}};
}
ModelCase binomial_case(long n, long x, double alpha, double beta) {
  return {BinomialSuccess{alpha, beta}, DataSummary{n, 0.0, 0.0, x}};
}
ModelCase poisson_case(long n, double sum_x, double a1, double b1, double a2, double b2) {
  return {PoissonRate{a1, b1, a2, b2}, DataSummary{n, sum_x, 0.0, 0}};
}

ModelCase random_case(oracle::Draws& draws, int model) {
  const long n = draws.integer(3, 400);
  switch (model) {
    case 0:
      return normal_case(n, n * draws.log_uniform(0.05, 20.0), draws.uniform(0.0, 5.0),
                         draws.uniform(0.0, 5.0));
    case 1:
      return binomial_case(n, draws.integer(1, n - 1), draws.log_uniform(0.1, 10.0),
                           draws.log_uniform(0.1, 10.0));
    default:
      return poisson_case(n, static_cast<double>(draws.integer(0, 5 * n)) + 1.0,
                          draws.uniform(0.0, 5.0), draws.uniform(0.0, 5.0),
                          draws.uniform(0.0, 5.0), draws.uniform(0.0, 5.0));
  }
}

double mean_gap(const ModelCase& c) {
  const auto [p1, p2] = posterior_pair(c);
  return std::abs(mean(p1) - mean(p2));
}

}  // namespace

TEST_CASE("NestedPair rejects a support outside the base support") {
  const auto base = DistributionSpec::beta(2, 2);
  CHECK_THROWS_AS(NestedPair(base, [](double) { return 1.0; }, {}, Interval{0.0, 2.0}),
                  DomainError);
  CHECK_NOTHROW(NestedPair(base, [](double) { return 1.0; }, {}, Interval{0.2, 0.8}));
}

TEST_CASE("check_conditions") {
  const auto r1 = check_conditions(nested_pair(normal_case(10, 10.0, 1.0, 1.0)));
  CHECK(r1.cond_i_finite);
  CHECK(std::abs(r1.cond_iii_lower_limit) < 1e-10);
  CHECK(std::abs(r1.cond_iii_upper_limit) < 1e-10);
  CHECK_FALSE(r1.notes.empty());

  const auto r2 = check_conditions(nested_pair(binomial_case(10, 3, 2.0, 2.0)));
  CHECK(r2.cond_i_finite);
  CHECK(std::abs(r2.cond_iii_lower_limit) < 1e-10);
  CHECK(std::abs(r2.cond_iii_upper_limit) < 1e-10);

  // n = 2 with α = 0: the baseline InvGamma(1, S/2) has no mean.
  const auto boundary = NestedPair::from_log_ratio(
      DistributionSpec::inverse_gamma(1.0, 5.0), [](double) { return 0.0; },
      [](double) { return 0.0; });
  const auto r3 = check_conditions(boundary);
  CHECK_FALSE(r3.cond_i_finite);
  CHECK_FALSE(r3.notes.empty());
}

TEST_CASE("lower_bound examples") {
  CHECK(std::abs(lower_bound(nested_pair(binomial_case(10, 3, 2, 2))) - 0.0571428571428571) <
        1e-12);
  const NestedPair flat(DistributionSpec::gamma(3, 2), [](double) { return 1.0; },
                        [](double) { return 0.0; });
  CHECK(lower_bound(flat) == 0.0);
  CHECK(std::abs(lower_bound(nested_pair(poisson_case(4, 6, 1, 0, 0.5, 1))) - 0.45) < 1e-12);
}

TEST_CASE("upper_bound examples") {
  const double normal = upper_bound(nested_pair(normal_case(10, 10, 1, 1)));
  CHECK(normal <= 0.55 + 1e-9);
  CHECK(normal >= 0.05);
  // independent E[τ|ρ'|]/E[ρ] by Simpson on a log grid, unnormalized densities
  const auto p1 = [](double s2) { return std::pow(s2, -6.0) * std::exp(-5.0 / s2); };
  const auto rho_p = [&](double s2) {
    return p1(s2) * std::exp(-std::log(s2) - 1.0 / s2);
  };
  const auto num = oracle::simpson_log(
      [&](double s2) {
        const double rho_prime_over_rho = (1.0 - s2) / (s2 * s2);
        return s2 * s2 / 4.0 * std::abs(rho_prime_over_rho) * rho_p(s2);
      },
      1e-3, 1e5);
  const auto den = oracle::simpson_log(rho_p, 1e-3, 1e5);
  CHECK(oracle::rel_err(normal, num / den) < 1e-7);

  const double binomial = upper_bound(nested_pair(binomial_case(10, 3, 2, 2)));
  CHECK(binomial <= 0.2 + 1e-9);
  CHECK(binomial >= 0.0571428571428571 - 1e-12);
  const NestedPair flat(DistributionSpec::beta(2, 2), [](double) { return 1.0; },
                        [](double) { return 0.0; });
  CHECK(upper_bound(flat) == 0.0);
}

TEST_CASE("upper_bound_supnorm examples") {
  const auto normal = nested_pair(normal_case(10, 10, 1.5, 0.0));
  CHECK_FALSE(upper_bound_supnorm(normal).has_value());

  const NestedPair linear(DistributionSpec::beta(2, 2), [](double t) { return t; },
                          [](double) { return 1.0; });
  const auto s = upper_bound_supnorm(linear);
  REQUIRE(s.has_value());
  CHECK(std::abs(*s - 0.1) < 1e-10);

  const NestedPair flat(DistributionSpec::gamma(2, 2), [](double) { return 1.0; },
                        [](double) { return 0.0; });
  REQUIRE(upper_bound_supnorm(flat).has_value());
  CHECK(*upper_bound_supnorm(flat) == 0.0);

  // no variance for InvGamma(2, ·)
  const NestedPair no_var(DistributionSpec::inverse_gamma(2, 1), [](double) { return 1.0; },
                          [](double) { return 0.0; });
  CHECK_FALSE(upper_bound_supnorm(no_var).has_value());
}

TEST_CASE("bounds dispatch") {
  const auto mono = bounds(nested_pair(poisson_case(4, 6, 1, 0, 0.5, 1)));
  CHECK(mono.exact);
  CHECK(std::abs(mono.upper - mono.lower) <= 1e-10);

  const auto non_mono = bounds(nested_pair(poisson_case(4, 6, 1, 1, 2, 2)));
  CHECK_FALSE(non_mono.exact);
  CHECK(non_mono.lower < non_mono.upper);

  const NestedPair flat(DistributionSpec::gamma(3, 1), [](double) { return 1.0; },
                        [](double) { return 0.0; });
  const auto zero = bounds(flat);
  CHECK(zero.lower == 0.0);
  CHECK(zero.upper == 0.0);
  REQUIRE(zero.upper_supnorm.has_value());
  CHECK(*zero.upper_supnorm == 0.0);
  CHECK(zero.exact);
}

TEST_CASE("engine agrees with closed forms over 100 draws per model") {
  oracle::Draws draws(31);
  for (int model = 0; model < 3; ++model) {
    for (int rep = 0; rep < 100; ++rep) {
      const ModelCase c = random_case(draws, model);
      const NestedPair pair = nested_pair(c);
      const BoundsResult closed = closed_form_bounds(c);
      const double lower = lower_bound(pair);
      const double upper = upper_bound(pair);
      INFO("model " << model << " rep " << rep);
      CHECK(std::abs(lower - closed.lower) <= 1e-8 * std::max(closed.lower, 1e-300) + 1e-300);
      CHECK(std::abs(lower - mean_gap(c)) <= 1e-8 * mean_gap(c) + 1e-15);
      if (model < 2) {
        CHECK(upper <= closed.upper + 1e-9);
      } else {
        CHECK(std::abs(upper - closed.upper) <= 1e-8 * closed.upper + 1e-15);
      }
      CHECK(lower <= upper + 1e-12);
    }
  }
}

TEST_CASE("outputs do not depend on the scale of rho") {
  oracle::Draws draws(32);
  for (int model = 0; model < 3; ++model) {
    for (int rep = 0; rep < 5; ++rep) {
      const NestedPair base = nested_pair(random_case(draws, model));
      const BoundsResult ref = bounds(base);
      for (double c : {1e-6, 1.0, 1e6}) {
        NestedPair scaled(base.base, [&, c](double t) { return c * base.rho(t); },
                          [&, c](double t) { return c * base.rho_prime(t); }, base.support2);
        const BoundsResult r = bounds(scaled);
        CHECK(std::abs(r.lower - ref.lower) <= 1e-10 * ref.lower + 1e-300);
        CHECK(std::abs(r.upper - ref.upper) <= 1e-10 * ref.upper + 1e-300);
        CHECK(r.exact == ref.exact);
        if (ref.upper_supnorm && r.upper_supnorm) {
          CHECK(std::abs(*r.upper_supnorm - *ref.upper_supnorm) <= 1e-10 * *ref.upper_supnorm);
        }
      }
    }
  }
}

TEST_CASE("swapping the roles of the two posteriors keeps the lower bound") {
  oracle::Draws draws(33);
  for (int rep = 0; rep < 20; ++rep) {
    const double shape1 = draws.log_uniform(1.0, 50.0), rate1 = draws.log_uniform(0.5, 50.0);
    const double shape2 = draws.log_uniform(1.0, 50.0), rate2 = draws.log_uniform(0.5, 50.0);
    const double da = shape2 - shape1, db = rate2 - rate1;
    const auto forward = NestedPair::from_log_ratio(
        DistributionSpec::gamma(shape1, rate1), [=](double t) { return da * std::log(t) - db * t; },
        [=](double t) { return da / t - db; });
    const auto backward = NestedPair::from_log_ratio(
        DistributionSpec::gamma(shape2, rate2),
        [=](double t) { return -da * std::log(t) + db * t; },
        [=](double t) { return -da / t + db; });
    const double l1 = lower_bound(forward);
    const double l2 = lower_bound(backward);
    CHECK(std::abs(l1 - l2) <= 1e-8 * std::max(l1, l2) + 1e-15);
    CHECK(std::abs(l1 - std::abs(shape1 / rate1 - shape2 / rate2)) <= 1e-8 * l1 + 1e-15);
  }
}

TEST_CASE("numeric derivative and numeric kernel paths match the analytic ones") {
  const ModelCase c = binomial_case(20, 7, 3.0, 1.5);
  const NestedPair analytic = nested_pair(c);
  NestedPair numeric(analytic.base, analytic.rho, {}, analytic.support2);
  numeric.numeric_kernel = true;
  const auto a = bounds(analytic);
  const auto b = bounds(numeric);
  CHECK(oracle::rel_err(b.lower, a.lower) < 1e-6);
  CHECK(oracle::rel_err(b.upper, a.upper) < 1e-6);
}

TEST_CASE("monotone ratio gives coinciding bounds") {
  oracle::Draws draws(34);
  for (int rep = 0; rep < 30; ++rep) {
    const double a1 = draws.uniform(0, 3), b1 = draws.uniform(0, 3);
    const double a2 = a1 + draws.uniform(0, 2), b2 = b1 - draws.uniform(0, b1);
    const auto r = bounds(nested_pair(poisson_case(draws.integer(1, 200),
                                                   static_cast<double>(draws.integer(1, 300)), a1,
                                                   b1, a2, b2)));
    CHECK(r.exact);
    CHECK(std::abs(r.upper - r.lower) <= 1e-9 * std::max(1.0, r.upper));
  }
}

TEST_CASE("central_difference") {
  const auto f = [](double t) { return std::sin(t); };
  CHECK(std::abs(central_difference(f, 1.0, {-kInf, kInf}) - std::cos(1.0)) < 1e-8);
  // near the lower endpoint the step shrinks to stay inside the domain
  const auto g = [](double t) { return std::log(t); };
  CHECK(oracle::rel_err(central_difference(g, 1e-7, {0.0, kInf}), 1e7) < 1e-4);
}
