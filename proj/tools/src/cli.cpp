#include "priorimpact/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "priorimpact/errors.hpp"
#include "priorimpact/experiments.hpp"
#include "priorimpact/models.hpp"
#include "priorimpact/wasserstein.hpp"

namespace priorimpact::cli {

namespace {

const std::vector<long> kDefaultGrid{10, 32, 100, 316, 1000, 3162, 10000};

struct Options {
  std::string model;
  std::optional<long> n;
  std::optional<double> sum_x;
  std::optional<double> s;
  std::optional<long> successes;
  std::optional<double> mu;
  std::optional<double> alpha, beta, a1, b1, a2, b2;
  bool porcelain = false;
  double rel_tol = QuadratureSettings{}.rel_tol;
  double abs_tol = QuadratureSettings{}.abs_tol;
  std::string n_grid;
  std::uint64_t seed = 42;
  int replicates = 5;
  std::optional<double> true_param;
  std::string output;
  int threads = 1;
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string flag(bool v) { return v ? "true" : "false"; }

// Collects key/value pairs and prints them either one per line or as a single
// space-separated key=value line.
class Report {
 public:
  void add(std::string key, std::string value) { items_.emplace_back(std::move(key), std::move(value)); }
  void add(std::string key, double value) { add(std::move(key), num(value)); }

  void print(std::ostream& out, bool porcelain) const {
    for (std::size_t i = 0; i < items_.size(); ++i) {
      const auto& [k, v] = items_[i];
      if (porcelain) {
        out << (i ? " " : "") << k << '=' << v;
      } else {
        out << k << ": " << v << '\n';
      }
    }
    if (porcelain) out << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

void add_model_options(CLI::App& sub, Options& o) {
  sub.add_option("--model", o.model, "normal-variance | binomial | poisson")->required();
  sub.add_option("--alpha", o.alpha, "alpha of the alternative prior (normal-variance, binomial)");
  sub.add_option("--beta", o.beta, "beta of the alternative prior (normal-variance, binomial)");
  sub.add_option("--a1", o.a1, "poisson: shape of the first Gamma prior");
  sub.add_option("--b1", o.b1, "poisson: rate of the first Gamma prior");
  sub.add_option("--a2", o.a2, "poisson: shape of the second Gamma prior");
  sub.add_option("--b2", o.b2, "poisson: rate of the second Gamma prior");
  sub.add_option("--mu", o.mu, "normal-variance: known mean");
  sub.add_option("--rel-tol", o.rel_tol, "quadrature relative tolerance");
  sub.add_option("--abs-tol", o.abs_tol, "quadrature absolute tolerance");
  sub.add_flag("--porcelain", o.porcelain, "single-line key=value output");
}

void add_data_options(CLI::App& sub, Options& o) {
  sub.add_option("--n", o.n, "sample size");
  sub.add_option("--sum-x", o.sum_x, "poisson: sum of the observations");
  sub.add_option("--s", o.s, "normal-variance: sum of squared deviations from mu");
  sub.add_option("--successes", o.successes, "binomial: number of successes");
}

void add_sweep_options(CLI::App& sub, Options& o) {
  sub.add_option("--n-grid", o.n_grid, "comma-separated sample sizes (default 10,32,...,10000)");
  sub.add_option("--seed", o.seed, "plan seed");
  sub.add_option("--replicates", o.replicates, "replicates per sample size");
  sub.add_option("--true-param", o.true_param,
                 "data-generating sigma^2, theta or lambda (default 1, 0.3, 2)");
  sub.add_option("--output", o.output, "CSV path (default: standard output)");
  sub.add_option("--threads", o.threads, "worker threads");
}

template <class T>
void forbid(const std::optional<T>& v, const char* name, ModelKind kind) {
  if (v) throw UsageError(std::string(name) + " does not apply to model " + model_tag(kind));
}

template <class T>
T need(const std::optional<T>& v, const char* name, ModelKind kind) {
  if (!v) throw UsageError(model_tag(kind) + " requires " + name);
  return *v;
}

ModelPrior make_prior(const Options& o, ModelKind kind) {
  switch (kind) {
    case ModelKind::NormalVariance:
      for (const auto* p : {&o.a1, &o.b1, &o.a2, &o.b2}) forbid(*p, "--a1/--b1/--a2/--b2", kind);
      return NormalVariance{o.alpha.value_or(2.0), o.beta.value_or(1.0), o.mu.value_or(0.0)};
    case ModelKind::BinomialSuccess:
      for (const auto* p : {&o.a1, &o.b1, &o.a2, &o.b2}) forbid(*p, "--a1/--b1/--a2/--b2", kind);
      forbid(o.mu, "--mu", kind);
      return BinomialSuccess{o.alpha.value_or(2.0), o.beta.value_or(2.0)};
    case ModelKind::PoissonRate:
      forbid(o.alpha, "--alpha", kind);
      forbid(o.beta, "--beta", kind);
      forbid(o.mu, "--mu", kind);
      return PoissonRate{o.a1.value_or(1.0), o.b1.value_or(0.0), o.a2.value_or(0.5),
                         o.b2.value_or(1.0)};
  }
  throw UsageError("unknown model");
}

ModelCase make_case(const Options& o) {
  const ModelKind kind = parse_model_tag(o.model);
  ModelCase c{make_prior(o, kind), {}};
  c.data.n = need(o.n, "--n", kind);
  switch (kind) {
    case ModelKind::NormalVariance:
      c.data.centered_sq_sum = need(o.s, "--s", kind);
      forbid(o.sum_x, "--sum-x", kind);
      forbid(o.successes, "--successes", kind);
      break;
    case ModelKind::BinomialSuccess:
      c.data.successes = need(o.successes, "--successes", kind);
      forbid(o.sum_x, "--sum-x", kind);
      forbid(o.s, "--s", kind);
      break;
    case ModelKind::PoissonRate:
      c.data.sum_x = need(o.sum_x, "--sum-x", kind);
      forbid(o.s, "--s", kind);
      forbid(o.successes, "--successes", kind);
      break;
  }
  validate(c);
  return c;
}

QuadratureSettings make_settings(const Options& o) {
  QuadratureSettings s;
  s.rel_tol = o.rel_tol;
  s.abs_tol = o.abs_tol;
  s.validate();
  return s;
}

std::vector<long> parse_grid(const std::string& text) {
  if (text.empty()) return kDefaultGrid;
  std::vector<long> grid;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    long v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc{} || res.ptr != item.data() + item.size()) {
      throw UsageError("--n-grid: '" + item + "' is not an integer");
    }
    grid.push_back(v);
  }
  return grid;
}

void add_poisson_diagnostics(Report& r, const ModelCase& c, const BoundsResult& b) {
  if (c.kind() != ModelKind::PoissonRate) return;
  const auto diag = poisson_diagnostics(c);
  if (b.exact) r.add("distance", b.lower);
  r.add("shape", to_string(diag.shape));
  r.add("bracket", diag.signed_bracket);
  r.add("corrected", diag.corrected);
  r.add("alternate_prefactor", diag.alternate_prefactor);
}

int cmd_bounds(const Options& o, std::ostream& out) {
  const ModelCase c = make_case(o);
  const BoundsResult b = closed_form_bounds(c, make_settings(o));
  Report r;
  r.add("model", model_tag(c.kind()));
  r.add("lower", b.lower);
  r.add("upper", b.upper);
  r.add("upper_supnorm", b.upper_supnorm ? num(*b.upper_supnorm) : "inapplicable");
  r.add("exact", flag(b.exact));
  add_poisson_diagnostics(r, c, b);
  r.print(out, o.porcelain);
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  const ModelCase c = make_case(o);
  const QuadratureSettings settings = make_settings(o);
  const BoundsResult closed = closed_form_bounds(c, settings);
  const BoundsResult engine = bounds(nested_pair(c), settings);
  const auto [p1, p2] = posterior_pair(c);
  double w = 0.0;
  double w_quantile = 0.0;
  try {
    std::tie(w, w_quantile) = w1_crosscheck(p1, p2, OracleSettings{OracleMethod::CdfIntegral, settings});
  } catch (const std::exception& e) {
    err << "oracle error: " << e.what() << '\n';
    return kExitOracleError;
  }

  const double slack = 1e-6;
  bool pass = closed.lower <= w + slack * std::max(1.0, w);
  pass = pass && w <= closed.upper * (1.0 + slack) + 1e-15;
  pass = pass && w <= engine.upper * (1.0 + slack) + 1e-15;
  if (closed.exact) pass = pass && std::abs(w - closed.lower) <= 1e-5 * std::max(w, 1e-300) + 1e-15;

  Report r;
  r.add("model", model_tag(c.kind()));
  r.add("lower", closed.lower);
  r.add("engine_upper", engine.upper);
  r.add("closed_upper", closed.upper);
  r.add("upper_supnorm", closed.upper_supnorm ? num(*closed.upper_supnorm) : "inapplicable");
  r.add("oracle", w);
  r.add("oracle_quantile", w_quantile);
  r.add("exact", flag(closed.exact));
  add_poisson_diagnostics(r, c, closed);
  r.add("status", pass ? "PASS" : "FAIL");
  r.print(out, o.porcelain);
  return pass ? kExitOk : kExitSandwichFail;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  const ModelKind kind = parse_model_tag(o.model);
  forbid(o.n, "--n", kind);
  forbid(o.sum_x, "--sum-x", kind);
  forbid(o.s, "--s", kind);
  forbid(o.successes, "--successes", kind);
  SweepPlan plan;
  plan.prior = make_prior(o, kind);
  plan.n_grid = parse_grid(o.n_grid);
  plan.seed = o.seed;
  plan.replicates = o.replicates;
  plan.true_param = o.true_param.value_or(kind == ModelKind::NormalVariance    ? 1.0
                                          : kind == ModelKind::BinomialSuccess ? 0.3
                                                                               : 2.0);
  plan.validate();
  if (kind == ModelKind::NormalVariance && plan.n_grid.front() < 3) {
    throw UsageError("normal-variance requires n >= 3 in --n-grid");
  }
  if (o.threads < 1) throw UsageError("--threads must be >= 1");

  const auto rows = run_sweep(plan, o.threads, make_settings(o));
  std::ostream* summary = &out;
  if (o.output.empty()) {
    write_csv(out, rows);
    summary = &err;
  } else {
    std::ofstream file(o.output);
    if (!file) throw UsageError("cannot open --output " + o.output);
    write_csv(file, rows);
    if (!file.flush()) throw UsageError("failed writing --output " + o.output);
  }

  Report r;
  r.add("rows", std::to_string(rows.size()));
  const std::pair<const char*, SweepColumn> columns[] = {
      {"slope_lower", SweepColumn::Lower},
      {"slope_upper", SweepColumn::Upper},
      {"slope_oracle", SweepColumn::Oracle}};
  for (const auto& [key, column] : columns) {
    try {
      r.add(key, fit_decay_slope(rows, column));
    } catch (const FitError& e) {
      r.add(key, "unavailable");
      err << key << ": " << e.what() << '\n';
    }
  }
  r.print(*summary, o.porcelain);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prior-impact bounds on the Wasserstein-1 distance between posteriors"};
  app.require_subcommand(1);
  Options o;
  auto* bounds_cmd = app.add_subcommand("bounds", "closed-form lower/upper bounds for one data set");
  auto* verify_cmd = app.add_subcommand("verify", "bounds checked against the Wasserstein oracle");
  auto* sweep_cmd = app.add_subcommand("sweep", "sample-size sweep on synthetic data, CSV output");
  for (auto* sub : {bounds_cmd, verify_cmd}) {
    add_model_options(*sub, o);
    add_data_options(*sub, o);
  }
  add_model_options(*sweep_cmd, o);
  add_data_options(*sweep_cmd, o);
  add_sweep_options(*sweep_cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*bounds_cmd) return cmd_bounds(o, out);
    if (*verify_cmd) return cmd_verify(o, out, err);
    return cmd_sweep(o, out, err);
  } catch (const SweepError& e) {
    err << "error: " << e.what() << '\n';
    const bool sandwich = std::string(e.what()).find("sandwich violated") != std::string::npos;
    return sandwich ? kExitSandwichFail : kExitOracleError;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitOracleError;
  } catch (const OracleInconsistency& e) {
    err << "error: " << e.what() << '\n';
    return kExitOracleError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace priorimpact::cli
