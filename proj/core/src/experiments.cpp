#include "priorimpact/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "priorimpact/errors.hpp"

namespace priorimpact {

namespace {

constexpr int kMaxAttempts = 1000;

class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double next() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

long poisson_inversion(UniformSource& rng, double lambda) {
  const double u = rng.next();
  double p = std::exp(-lambda);
  double cumulative = p;
  long k = 0;
  while (u > cumulative && k < 10000) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cumulative += p;
    if (p == 0.0 && static_cast<double>(k) > lambda) break;
  }
  return k;
}

long poisson_draw(UniformSource& rng, double lambda) {
  constexpr double kPiece = 30.0;
  if (lambda <= kPiece) return poisson_inversion(rng, lambda);
  const long pieces = static_cast<long>(std::ceil(lambda / kPiece));
  const double each = lambda / static_cast<double>(pieces);
  long total = 0;
  for (long i = 0; i < pieces; ++i) total += poisson_inversion(rng, each);
  return total;
}

bool admissible(const ModelPrior& prior, const DataSummary& data) {
  try {
    validate(ModelCase{prior, data});
    return true;
  } catch (const ModelError&) {
    return false;
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string row_label(const SweepRow& r) {
  std::ostringstream os;
  os << model_tag(r.model) << " n=" << r.n << " replicate=" << r.replicate;
  return os.str();
}

SweepRow evaluate_row(const SweepPlan& plan, ModelKind kind, long n, int replicate,
                      const QuadratureSettings& settings) {
  SweepRow row;
  row.model = kind;
  row.n = n;
  row.replicate = replicate;
  const double mu = std::holds_alternative<NormalVariance>(plan.prior)
                        ? std::get<NormalVariance>(plan.prior).mu
                        : 0.0;
  bool found = false;
  for (int attempt = 0; attempt < kMaxAttempts && !found; ++attempt) {
    row.seed = derive_row_seed(plan.seed, kind, n, replicate, attempt);
    row.data = generate_sample(kind, plan.true_param, n, row.seed, mu);
    found = admissible(plan.prior, row.data);
  }
  if (!found) {
    throw SweepError(row_label(row) + ": no admissible sample after repeated draws");
  }

  const ModelCase c{plan.prior, row.data};
  const BoundsResult b = closed_form_bounds(c, settings);
  const auto [p1, p2] = posterior_pair(c);
  row.lower = b.lower;
  row.upper = b.upper;
  row.upper_supnorm = b.upper_supnorm;
  row.exact = b.exact;
  row.oracle = w1_distance(p1, p2, OracleSettings{OracleMethod::CdfIntegral, settings});
  if (!sandwich_holds(row)) {
    std::ostringstream os;
    os.precision(17);
    os << row_label(row) << ": sandwich violated (lower=" << row.lower
       << ", oracle=" << row.oracle << ", upper=" << row.upper << ")";
    throw SweepError(os.str());
  }
  return row;
}

}  // namespace

void SweepPlan::validate() const {
  if (n_grid.empty()) throw std::invalid_argument("sweep plan: n_grid is empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw std::invalid_argument("sweep plan: n values must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
      throw std::invalid_argument("sweep plan: n_grid must be strictly increasing");
    }
  }
  if (replicates < 1) throw std::invalid_argument("sweep plan: replicates must be >= 1");
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_row_seed(std::uint64_t plan_seed, ModelKind model, long n, int replicate,
                              int attempt) noexcept {
  std::uint64_t h = splitmix64(plan_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(model));
  h = splitmix64(h ^ static_cast<std::uint64_t>(n));
  h = splitmix64(h ^ static_cast<std::uint64_t>(replicate));
  if (attempt != 0) h = splitmix64(h ^ static_cast<std::uint64_t>(attempt));
  return h;
}

DataSummary generate_sample(ModelKind model, double true_param, long n, std::uint64_t seed,
                            double mu) {
  if (n < 1) throw DomainError("generate_sample: n must be >= 1");
  UniformSource rng(seed);
  DataSummary out;
  out.n = n;
  switch (model) {
    case ModelKind::NormalVariance: {
      if (!(true_param > 0.0) || !std::isfinite(true_param) || !std::isfinite(mu)) {
        throw DomainError("generate_sample: normal variance must be positive");
      }
      const double sigma = std::sqrt(true_param);
      double s = 0.0;
      long i = 0;
      while (i < n) {
        const double r = std::sqrt(-2.0 * std::log(rng.next()));
        const double angle = 2.0 * std::numbers::pi * rng.next();
        for (double z : {r * std::cos(angle), r * std::sin(angle)}) {
          if (i == n) break;
          const double x = mu + sigma * z;
          s += (x - mu) * (x - mu);
          ++i;
        }
      }
      out.centered_sq_sum = s;
      break;
    }
    case ModelKind::BinomialSuccess: {
      if (!(true_param > 0.0 && true_param < 1.0)) {
        throw DomainError("generate_sample: success probability must lie in (0,1)");
      }
      long x = 0;
      for (long i = 0; i < n; ++i) x += rng.next() < true_param ? 1 : 0;
      out.successes = x;
      break;
    }
    case ModelKind::PoissonRate: {
      if (!(true_param > 0.0) || !std::isfinite(true_param)) {
        throw DomainError("generate_sample: poisson rate must be positive");
      }
      long total = 0;
      for (long i = 0; i < n; ++i) total += poisson_draw(rng, true_param);
      out.sum_x = static_cast<double>(total);
      break;
    }
  }
  return out;
}

bool sandwich_holds(const SweepRow& row) noexcept {
  const bool lower_ok = row.lower <= row.oracle + 1e-6 * std::max(1.0, row.oracle);
  const bool upper_ok = row.oracle <= row.upper * (1.0 + 1e-6) + 1e-15;
  return lower_ok && upper_ok;
}

std::vector<SweepRow> run_sweep(const SweepPlan& plan, int threads,
                                const QuadratureSettings& settings) {
  plan.validate();
  const ModelKind kind = static_cast<ModelKind>(plan.prior.index());
  struct Task {
    long n;
    int replicate;
  };
  std::vector<Task> tasks;
  for (long n : plan.n_grid) {
    for (int r = 0; r < plan.replicates; ++r) tasks.push_back({n, r});
  }
  std::vector<SweepRow> rows(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        rows[i] = evaluate_row(plan, kind, tasks[i].n, tasks[i].replicate, settings);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(threads, 1, static_cast<int>(tasks.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const SweepError&) {
      throw;
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << model_tag(kind) << " n=" << tasks[i].n << " replicate=" << tasks[i].replicate << ": "
         << e.what();
      throw SweepError(os.str());
    }
  }
  return rows;
}

double fit_decay_slope(const std::vector<SweepRow>& rows, SweepColumn column) {
  std::map<long, std::pair<double, int>> log_sums;
  std::vector<std::string> bad;
  for (const auto& r : rows) {
    const double v = column == SweepColumn::Lower   ? r.lower
                     : column == SweepColumn::Upper ? r.upper
                                                    : r.oracle;
    if (!(v > 0.0) || !std::isfinite(v)) {
      bad.push_back(row_label(r));
      continue;
    }
    auto& [sum, count] = log_sums[r.n];
    sum += std::log(v);
    ++count;
  }
  if (!bad.empty()) {
    std::ostringstream os;
    os << "fit_decay_slope: non-positive values cannot be fitted on a log scale (";
    for (std::size_t i = 0; i < bad.size(); ++i) os << (i ? "; " : "") << bad[i];
    os << ")";
    throw FitError(os.str());
  }
  if (log_sums.size() < 4) {
    throw FitError("fit_decay_slope: need at least 4 distinct sample sizes");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double m = static_cast<double>(log_sums.size());
  for (const auto& [n, acc] : log_sums) {
    const double x = std::log(static_cast<double>(n));
    const double y = acc.first / acc.second;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    const bool normal = r.model == ModelKind::NormalVariance;
    const bool binomial = r.model == ModelKind::BinomialSuccess;
    const bool poisson = r.model == ModelKind::PoissonRate;
    out << model_tag(r.model) << ',' << r.n << ',' << r.replicate << ',' << r.seed << ','
        << (poisson ? format_double(r.data.sum_x) : "") << ','
        << (normal ? format_double(r.data.centered_sq_sum) : "") << ','
        << (binomial ? std::to_string(r.data.successes) : "") << ',' << format_double(r.lower)
        << ',' << format_double(r.upper) << ','
        << (r.upper_supnorm ? format_double(*r.upper_supnorm) : "") << ','
        << format_double(r.oracle) << ',' << (r.exact ? "true" : "false") << '\n';
  }
}

}  // namespace priorimpact
