#include "priorimpact/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "priorimpact/errors.hpp"

namespace priorimpact {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string describe(const char* fn, double a, double b = std::nan(""), double c = std::nan("")) {
  std::ostringstream os;
  os << fn << ": invalid argument(s) (" << a;
  if (!std::isnan(b)) os << ", " << b;
  if (!std::isnan(c)) os << ", " << c;
  os << ")";
  return os.str();
}

void require_gamma_args(const char* fn, double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a) || !(x >= 0.0) || std::isnan(x)) {
    throw DomainError(describe(fn, a, x));
  }
}

void require_beta_args(const char* fn, double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !(x >= 0.0) ||
      !(x <= 1.0)) {
    throw DomainError(describe(fn, a, b, x));
  }
}

// 21-point Gauss-Kronrod abscissae and weights (10-point Gauss embedded).
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208931782870, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  double resabs;
  int depth;

  bool operator<(const Segment& other) const { return error < other.error; }
};

double checked(const RealFunction& f, double x) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "integrate: integrand not finite at x = " << x;
    throw DomainError(os.str());
  }
  return v;
}

Segment gauss_kronrod21(const RealFunction& f, double a, double b, int depth) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  // Keep every node strictly inside (a, b): on very short segments a + h·x
  // can round onto an endpoint, where the integrand may be singular.
  const double inner_lo = std::nextafter(a, b);
  const double inner_hi = std::nextafter(b, a);
  auto eval = [&](double x) { return checked(f, std::min(std::max(x, inner_lo), inner_hi)); };
  const double fc = eval(center);
  double resg = 0.0;
  double resk = kWgk[10] * fc;
  double resabs = std::abs(resk);
  std::array<double, 10> f1{};
  std::array<double, 10> f2{};
  for (int j = 0; j < 5; ++j) {
    const int jtw = 2 * j + 1;
    const double dx = half * kXgk[jtw];
    f1[jtw] = eval(center - dx);
    f2[jtw] = eval(center + dx);
    resg += kWg[j] * (f1[jtw] + f2[jtw]);
    resk += kWgk[jtw] * (f1[jtw] + f2[jtw]);
    resabs += kWgk[jtw] * (std::abs(f1[jtw]) + std::abs(f2[jtw]));
  }
  for (int j = 0; j < 5; ++j) {
    const int jtwm1 = 2 * j;
    const double dx = half * kXgk[jtwm1];
    f1[jtwm1] = eval(center - dx);
    f2[jtwm1] = eval(center + dx);
    resk += kWgk[jtwm1] * (f1[jtwm1] + f2[jtwm1]);
    resabs += kWgk[jtwm1] * (std::abs(f1[jtwm1]) + std::abs(f2[jtwm1]));
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - reskh);
  for (int j = 0; j < 10; ++j) {
    resasc += kWgk[j] * (std::abs(f1[j] - reskh) + std::abs(f2[j] - reskh));
  }
  const double scale = std::abs(half);
  resasc *= scale;
  resabs *= scale;
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * resabs, err);
  }
  return Segment{a, b, resk * half, err, resabs, depth};
}

constexpr int kMaxSegments = 4000;

QuadratureResult adaptive_finite(const RealFunction& f, double a, double b,
                                 const QuadratureSettings& s) {
  std::vector<Segment> active;
  std::vector<Segment> frozen;
  int evals = 21;
  active.push_back(gauss_kronrod21(f, a, b, 0));

  auto totals = [&] {
    double value = 0.0, error = 0.0, resabs = 0.0;
    for (const auto* list : {&active, &frozen}) {
      for (const auto& seg : *list) {
        value += seg.value;
        error += seg.error;
        resabs += seg.resabs;
      }
    }
    return std::array<double, 3>{value, error, resabs};
  };

  while (true) {
    // Sums are recomputed from scratch so that cancellation between segments
    // does not accumulate.
    const auto [value, error, resabs] = totals();
    const double tol = std::max(s.abs_tol, s.rel_tol * std::abs(value));
    const double roundoff = 100.0 * kEps * resabs;
    if (error <= std::max(tol, roundoff)) {
      return QuadratureResult{value, error, evals};
    }
    if (active.empty() || static_cast<int>(active.size() + frozen.size()) >= kMaxSegments) {
      std::ostringstream os;
      os << "integrate: no convergence on (" << a << ", " << b << "), estimate " << value
         << ", error estimate " << error << ", tolerance " << tol;
      throw ConvergenceError(os.str(), value, error);
    }
    // Split the worst segments until the error target could plausibly be met,
    // then re-total.
    double budget = error - std::max(tol, roundoff);
    while (budget > 0.0 && !active.empty()) {
      std::pop_heap(active.begin(), active.end());
      const Segment worst = active.back();
      active.pop_back();
      const double mid = 0.5 * (worst.a + worst.b);
      const bool splittable = mid > worst.a && mid < worst.b && worst.depth < s.max_depth;
      if (!splittable || worst.error <= 50.0 * kEps * worst.resabs) {
        frozen.push_back(worst);
        budget -= worst.error;
        continue;
      }
      const Segment left = gauss_kronrod21(f, worst.a, mid, worst.depth + 1);
      const Segment right = gauss_kronrod21(f, mid, worst.b, worst.depth + 1);
      evals += 42;
      budget -= worst.error - (left.error + right.error);
      active.push_back(left);
      std::push_heap(active.begin(), active.end());
      active.push_back(right);
      std::push_heap(active.begin(), active.end());
      if (static_cast<int>(active.size() + frozen.size()) >= kMaxSegments) break;
    }
  }
}

// Wraps f(x(t)) * x'(t); nodes that leave the open domain contribute zero.
RealFunction mapped(const RealFunction& f, Interval domain, auto map) {
  return [&f, domain, map](double t) {
    const auto [x, jac] = map(t);
    if (jac == 0.0 || !domain.contains(x)) return 0.0;
    const double v = f(x) * jac;
    return v;
  };
}

}  // namespace

Interval Interval::make(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi) || !(lo < hi)) {
    std::ostringstream os;
    os << "Interval: require lo < hi, got (" << lo << ", " << hi << ")";
    throw DomainError(os.str());
  }
  return Interval{lo, hi};
}

void QuadratureSettings::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(tail_cutoff_mass > 0.0) || max_depth < 1) {
    throw DomainError("QuadratureSettings: tolerances must be positive and max_depth >= 1");
  }
}

double log_gamma(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError(describe("log_gamma", z));
  return boost::math::lgamma(z);
}

namespace {

// P(a, x) = x^a e^-x / Γ(a+1) Σ_k x^k / ((a+1)...(a+k)), used where Boost's
// prefix overflows (large a, x far below a). Converges fast when x << a.
double gamma_p_series(double a, double x) {
  const double log_prefix = a * std::log(x) - x - boost::math::lgamma(a + 1.0);
  double sum = 1.0;
  double term = 1.0;
  for (int k = 1; k < 100000 && term > kEps * sum; ++k) {
    term *= x / (a + k);
    sum += term;
  }
  return std::exp(log_prefix) * sum;
}

}  // namespace

double reg_incomplete_gamma_lower(double a, double x) {
  require_gamma_args("reg_incomplete_gamma_lower", a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  try {
    return boost::math::gamma_p(a, x);
  } catch (const std::overflow_error&) {
    return gamma_p_series(a, x);
  }
}

double reg_incomplete_gamma_upper(double a, double x) {
  require_gamma_args("reg_incomplete_gamma_upper", a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  try {
    return boost::math::gamma_q(a, x);
  } catch (const std::overflow_error&) {
    return 1.0 - gamma_p_series(a, x);
  }
}

double reg_incomplete_beta(double a, double b, double x) {
  require_beta_args("reg_incomplete_beta", a, b, x);
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

double reg_incomplete_beta_complement(double a, double b, double x) {
  require_beta_args("reg_incomplete_beta_complement", a, b, x);
  if (x == 0.0) return 1.0;
  if (x == 1.0) return 0.0;
  return boost::math::ibetac(a, b, x);
}

QuadratureResult integrate_with_error(const RealFunction& f, Interval domain,
                                      const QuadratureSettings& settings) {
  settings.validate();
  Interval::make(domain.lo, domain.hi);
  if (domain.lo_finite() && domain.hi_finite()) {
    try {
      return adaptive_finite(f, domain.lo, domain.hi, settings);
    } catch (const ConvergenceError&) {
      // Endpoint singularities defeat plain bisection; retry with both halves
      // clustered toward their outer endpoint.
      const double mid = 0.5 * (domain.lo + domain.hi);
      const auto left = integrate_clustered(f, {domain.lo, mid}, Cluster::Lower, settings);
      const auto right = integrate_clustered(f, {mid, domain.hi}, Cluster::Upper, settings);
      return QuadratureResult{left.value + right.value, left.error + right.error,
                              left.evaluations + right.evaluations};
    }
  }
  if (domain.lo_finite()) {
    const double lo = domain.lo;
    auto g = mapped(f, domain, [lo](double t) {
      const double s = 1.0 - t;
      return std::pair{lo + t / s, 1.0 / (s * s)};
    });
    return adaptive_finite(g, 0.0, 1.0, settings);
  }
  if (domain.hi_finite()) {
    const double hi = domain.hi;
    auto g = mapped(f, domain, [hi](double t) {
      const double s = 1.0 - t;
      return std::pair{hi - t / s, 1.0 / (s * s)};
    });
    return adaptive_finite(g, 0.0, 1.0, settings);
  }
  const auto left = integrate_with_error(f, Interval{-kInf, 0.0}, settings);
  const auto right = integrate_with_error(f, Interval{0.0, kInf}, settings);
  return QuadratureResult{left.value + right.value, left.error + right.error,
                          left.evaluations + right.evaluations};
}

double integrate(const RealFunction& f, Interval domain, const QuadratureSettings& settings) {
  return integrate_with_error(f, domain, settings).value;
}

QuadratureResult integrate_clustered(const RealFunction& f, Interval domain, Cluster toward,
                                     const QuadratureSettings& settings, double scale) {
  settings.validate();
  Interval::make(domain.lo, domain.hi);
  if (!domain.lo_finite()) {
    throw DomainError("integrate_clustered: lower endpoint must be finite");
  }
  if (toward == Cluster::Lower) {
    if (!domain.hi_finite()) {
      throw DomainError("integrate_clustered: clustering toward lo needs a finite hi");
    }
    const double lo = domain.lo;
    const double width = domain.hi - domain.lo;
    auto g = mapped(f, domain, [lo, width](double t) {
      const double s = 1.0 - t;
      const double u = t / s;
      const double e = std::exp(-u);
      return std::pair{lo + width * e, width * e / (s * s)};
    });
    return adaptive_finite(g, 0.0, 1.0, settings);
  }
  if (domain.hi_finite()) {
    const double hi = domain.hi;
    const double width = domain.hi - domain.lo;
    auto g = mapped(f, domain, [hi, width](double t) {
      const double s = 1.0 - t;
      const double u = t / s;
      const double e = std::exp(-u);
      return std::pair{hi - width * e, width * e / (s * s)};
    });
    return adaptive_finite(g, 0.0, 1.0, settings);
  }
  if (!(scale > 0.0)) throw DomainError("integrate_clustered: scale must be positive");
  const double lo = domain.lo;
  auto g = mapped(f, domain, [lo, scale](double t) {
    const double s = 1.0 - t;
    const double u = t / s;
    const double x = lo + scale * std::expm1(u);
    if (!std::isfinite(x)) return std::pair{x, 0.0};
    return std::pair{x, scale * std::exp(u) / (s * s)};
  });
  return adaptive_finite(g, 0.0, 1.0, settings);
}

std::vector<double> scan_grid(Interval domain, int points) {
  Interval::make(domain.lo, domain.hi);
  points = std::max(points, 8);
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(points) + 1);
  auto log_run = [&grid](double k_from, double k_to, int count, auto to_x) {
    for (int i = 0; i < count; ++i) {
      const double k = k_from + (k_to - k_from) * (count == 1 ? 0.0 : double(i) / (count - 1));
      grid.push_back(to_x(std::pow(10.0, k)));
    }
  };
  auto min_offset = [](double endpoint, double width) {
    return std::max(width * 1e-30, 8.0 * kEps * std::abs(endpoint));
  };

  if (domain.lo_finite() && domain.hi_finite()) {
    const double w = domain.hi - domain.lo;
    const int quarter = points / 4;
    const int middle = points - 2 * quarter;
    const double klo = std::log10(min_offset(domain.lo, w) / w);
    const double khi = std::log10(min_offset(domain.hi, w) / w);
    log_run(klo, -2.0, quarter, [&](double d) { return domain.lo + w * d; });
    for (int i = 0; i < middle; ++i) {
      grid.push_back(domain.lo + w * (0.01 + 0.98 * (i + 0.5) / middle));
    }
    log_run(khi, -2.0, quarter, [&](double d) { return domain.hi - w * d; });
  } else if (domain.lo_finite()) {
    const double klo = std::log10(std::max(1e-30, 8.0 * kEps * std::abs(domain.lo)));
    log_run(klo, 30.0, points, [&](double d) { return domain.lo + d; });
  } else if (domain.hi_finite()) {
    const double khi = std::log10(std::max(1e-30, 8.0 * kEps * std::abs(domain.hi)));
    log_run(khi, 30.0, points, [&](double d) { return domain.hi - d; });
  } else {
    const int half = points / 2;
    log_run(-30.0, 30.0, half, [](double d) { return d; });
    log_run(-30.0, 30.0, half, [](double d) { return -d; });
    grid.push_back(0.0);
  }
  std::erase_if(grid, [&](double x) { return !domain.contains(x); });
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

namespace {

// Three points approaching an endpoint, each one closer than the last.
std::vector<double> endpoint_probes(Interval domain, bool upper) {
  std::vector<double> probes;
  if (!upper) {
    if (!domain.lo_finite()) {
      for (double k : {100.0, 200.0, 300.0}) probes.push_back(-std::pow(10.0, k));
    } else if (domain.lo == 0.0) {
      for (double k : {-100.0, -200.0, -300.0}) probes.push_back(std::pow(10.0, k));
    } else {
      const double d = std::max(8.0 * kEps * std::abs(domain.lo), 1e-300);
      probes = {domain.lo + d * 1e4, domain.lo + d * 1e2, domain.lo + d};
    }
  } else {
    if (!domain.hi_finite()) {
      for (double k : {100.0, 200.0, 300.0}) probes.push_back(std::pow(10.0, k));
    } else if (domain.hi == 0.0) {
      for (double k : {-100.0, -200.0, -300.0}) probes.push_back(-std::pow(10.0, k));
    } else {
      const double d = std::max(8.0 * kEps * std::abs(domain.hi), 1e-300);
      probes = {domain.hi - d * 1e4, domain.hi - d * 1e2, domain.hi - d};
    }
  }
  std::erase_if(probes, [&](double x) { return !domain.contains(x); });
  return probes;
}

struct ProbeOutcome {
  bool divergent = false;
  double best = 0.0;
};

ProbeOutcome examine_endpoint(const RealFunction& f, const std::vector<double>& probes) {
  ProbeOutcome out;
  std::vector<double> values;
  for (double x : probes) {
    const double v = std::abs(f(x));
    if (std::isnan(v)) return out;
    if (std::isinf(v) || v > 1e300) {
      out.divergent = true;
      return out;
    }
    values.push_back(v);
  }
  for (double v : values) out.best = std::max(out.best, v);
  if (values.size() == 3 && values[0] > 0.0 && values[0] < values[1] && values[1] < values[2]) {
    const double d1 = std::log(values[1]) - std::log(values[0]);
    const double d2 = std::log(values[2]) - std::log(values[1]);
    if (d2 > 1e-12 && d2 >= 0.9 * d1) out.divergent = true;
  }
  return out;
}

}  // namespace

double sup_abs_on(const RealFunction& f, Interval domain, int grid_points) {
  if (grid_points < 64) throw DomainError("sup_abs_on: grid_points must be >= 64");
  double best = 0.0;
  for (bool upper : {false, true}) {
    const auto outcome = examine_endpoint(f, endpoint_probes(domain, upper));
    if (outcome.divergent) return kInf;
    best = std::max(best, outcome.best);
  }

  const auto grid = scan_grid(domain, grid_points);
  std::size_t best_index = 0;
  double grid_best = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = std::abs(f(grid[i]));
    if (std::isinf(v)) return kInf;
    if (!std::isnan(v) && v > grid_best) {
      grid_best = v;
      best_index = i;
    }
  }
  best = std::max(best, grid_best);
  if (grid.size() < 3) return best;

  // Golden-section search on the bracket around the best grid point.
  double a = grid[best_index == 0 ? 0 : best_index - 1];
  double b = grid[std::min(best_index + 1, grid.size() - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto g = [&](double x) {
    const double v = std::abs(f(x));
    return std::isnan(v) ? 0.0 : v;
  };
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double gc = g(c);
  double gd = g(d);
  for (int iter = 0; iter < 80 && (b - a) > 4.0 * kEps * std::max(std::abs(a), std::abs(b));
       ++iter) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = g(d);
    }
    best = std::max({best, gc, gd});
  }
  return std::isinf(best) ? kInf : best;
}

}  // namespace priorimpact
