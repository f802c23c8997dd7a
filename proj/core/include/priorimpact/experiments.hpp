#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "priorimpact/models.hpp"
#include "priorimpact/wasserstein.hpp"

namespace priorimpact {

/// A sample-size sweep: the same priors evaluated on synthetic data of growing size.
struct SweepPlan {
  /// Prior parameters; the data part of each case is generated per row.
  ModelPrior prior;
  std::vector<long> n_grid;
  std::uint64_t seed = 0;
  /// σ² (normal-variance), θ (binomial) or λ (poisson) used to generate data.
  double true_param = 1.0;
  int replicates = 5;

  void validate() const;
};

struct SweepRow {
  ModelKind model = ModelKind::PoissonRate;
  long n = 0;
  int replicate = 0;
  /// Seed that reproduces `data` through generate_sample.
  std::uint64_t seed = 0;
  DataSummary data;
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> upper_supnorm;
  double oracle = 0.0;
  bool exact = false;
};

enum class SweepColumn { Lower, Upper, Oracle };

/// Row failure inside run_sweep; the message names the offending (n, replicate).
class SweepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kCsvHeader =
    "model,n,replicate,seed,sum_x,centered_sq_sum,successes,lower,upper,upper_supnorm,oracle,exact";

/// SplitMix64 finalizer (Steele, Lea & Flood constants).
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Per-row seed: plan seed, model, n and replicate folded through splitmix64,
/// so a row's data does not depend on which thread runs it or when.
std::uint64_t derive_row_seed(std::uint64_t plan_seed, ModelKind model, long n, int replicate,
                              int attempt = 0) noexcept;

/// Draws n observations from the model's sampling distribution and reduces
/// them to sufficient statistics. Uniform deviates come from mt19937_64
/// (53-bit mantissa); normals by Box-Muller; Poisson by sequential inversion
/// (rates above 30 are split into a sum of smaller rates); binomial as n
/// Bernoulli trials. `mu` is the known normal location.
DataSummary generate_sample(ModelKind model, double true_param, long n, std::uint64_t seed,
                            double mu = 0.0);

/// One row per (n, replicate), in that order, whatever `threads` is.
/// Samples for which the baseline posterior would be improper (binomial x in
/// {0, n}, poisson Σx + αⱼ = 0) are redrawn with the next attempt seed.
/// Every row is checked against the oracle sandwich; a violation throws SweepError.
std::vector<SweepRow> run_sweep(const SweepPlan& plan, int threads = 1,
                                const QuadratureSettings& settings = {});

/// lower <= oracle + 1e-6 max(1, oracle) and oracle <= upper (1 + 1e-6).
bool sandwich_holds(const SweepRow& row) noexcept;

/// Least-squares slope of log(value) against log(n), replicates combined by
/// geometric mean. Needs at least 4 distinct n and strictly positive values.
double fit_decay_slope(const std::vector<SweepRow>& rows, SweepColumn column);

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace priorimpact
