#include <benchmark/benchmark.h>

#include <cmath>

#include "priorimpact/bounds_engine.hpp"
#include "priorimpact/models.hpp"
#include "priorimpact/numerics.hpp"
#include "priorimpact/wasserstein.hpp"

using namespace priorimpact;

namespace {

ModelCase case_for(int model, long n) {
  switch (model) {
    case 0:
      return {NormalVariance{2.0, 1.0, 0.0}, DataSummary{n, 0.0, static_cast<double>(n), 0}};
    case 1:
      return {BinomialSuccess{2.0, 2.0}, DataSummary{n, 0.0, 0.0, (3 * n) / 10}};
    default:
      return {PoissonRate{1.0, 0.0, 0.5, 1.0}, DataSummary{n, 2.0 * n, 0.0, 0}};
  }
}

}  // namespace

static void BM_Quadrature(benchmark::State& state) {
  const RealFunction f = [](double x) { return std::exp(-x) * std::sqrt(x); };
  for (auto _ : state) benchmark::DoNotOptimize(integrate(f, {0.0, kInf}));
}
BENCHMARK(BM_Quadrature);

static void BM_ClosedForm(benchmark::State& state) {
  const ModelCase c = case_for(static_cast<int>(state.range(0)), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(closed_form_bounds(c));
}
BENCHMARK(BM_ClosedForm)->ArgsProduct({{0, 1, 2}, {10, 10000}});

static void BM_Engine(benchmark::State& state) {
  const ModelCase c = case_for(static_cast<int>(state.range(0)), state.range(1));
  const NestedPair pair = nested_pair(c);
  for (auto _ : state) benchmark::DoNotOptimize(bounds(pair));
}
BENCHMARK(BM_Engine)->ArgsProduct({{0, 1, 2}, {10, 10000}})->Unit(benchmark::kMillisecond);

static void BM_Oracle(benchmark::State& state) {
  const auto [p1, p2] = posterior_pair(case_for(static_cast<int>(state.range(0)), state.range(1)));
  OracleSettings s;
  s.method = state.range(2) == 0 ? OracleMethod::CdfIntegral : OracleMethod::QuantileIntegral;
  for (auto _ : state) benchmark::DoNotOptimize(w1_distance(p1, p2, s));
}
BENCHMARK(BM_Oracle)->ArgsProduct({{0, 1, 2}, {10, 10000}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
