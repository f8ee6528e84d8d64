#include "llt/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

namespace llt {
namespace {

using CheckFn = std::function<DiagnosticEntry(const DiagnosticsConfig&, Rng&)>;

Vector random_unit(int d, double p, Rng& rng) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = standard_normal(rng);
  return v / lp_norm(v, p);
}

LogLaplace make_engine(int d, double p, double a, bool force = false) {
  LLTSpec spec{LpGeometry(d, p), a};
  spec.force_quadrature = force;
  return LogLaplace(spec);
}

// Forced lambda-mixing quadrature against the Gaussian closed form.
DiagnosticEntry check_closed_form(const DiagnosticsConfig&, Rng& rng) {
  DiagnosticEntry e;
  e.expected = 0.0;
  e.tolerance = 1e-6;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int d = 1 + static_cast<int>(uniform01(rng) * 8.0);
    const double a = std::exp(std::log(0.1) + uniform01(rng) * std::log(100.0));
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = 2.0 * standard_normal(rng);
    const double exact = x.squaredNorm() / (4.0 * a) + 0.5 * d * std::log(M_PI / a);
    const double got = make_engine(d, 2.0, a, true).value(x);
    worst = std::max(worst, std::abs(got - exact) / std::max(1.0, std::abs(exact)));
  }
  e.measured = worst;
  e.samples = 100;
  e.passed = worst <= e.tolerance;
  e.detail = "max relative error over 100 random (x, a, d <= 8)";
  return e;
}

double laplace_transform(const StableCountLaw& law, double t) {
  // Integrate in s = log lambda so both tails are short.
  auto f = [&](double s) {
    const double lam = std::exp(s);
    const double lf = law.log_density(lam);
    return std::isfinite(lf) ? std::exp(lf + s - lam * t) : 0.0;
  };
  const double cuts[] = {-60.0, -30.0, -15.0, -8.0, -4.0, -2.0, 0.0, 2.0, 4.0, 8.0};
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < std::size(cuts); ++i) {
    total += adaptive_gauss_legendre(f, cuts[i], cuts[i + 1], 1e-11);
  }
  return total;
}

DiagnosticEntry check_laplace(const DiagnosticsConfig&, Rng&) {
  DiagnosticEntry e;
  e.tolerance = 1e-4;
  double worst = 0.0;
  for (double c : {1.0 / 3.0, 0.5, 2.0 / 3.0, 0.9}) {
    const StableCountLaw law(c);
    for (double t : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      worst = std::max(worst, std::abs(laplace_transform(law, t) - std::exp(-std::pow(t, c))));
    }
  }
  e.measured = worst;
  e.samples = 20;
  e.passed = worst <= e.tolerance;
  e.detail = "max |int exp(-lambda t) mu_c - exp(-t^c)| over c in {1/3,1/2,2/3,0.9}, t in {1/4..4}";
  return e;
}

struct CumulantCase {
  double q;
  int d;
};
constexpr CumulantCase kCumulantCases[] = {{2.0, 2}, {2.0, 4}, {4.0, 2}, {4.0, 4}};
constexpr double kCumulantA = 0.5;

DiagnosticEntry check_cumulant_mean(const DiagnosticsConfig& cfg, Rng& rng) {
  DiagnosticEntry e;
  e.tolerance = 3.0;
  double worst = 0.0;
  for (const auto& c : kCumulantCases) {
    const double p = c.q / (c.q - 1.0);
    const LogLaplace engine = make_engine(c.d, p, kCumulantA);
    Vector x(c.d);
    for (int i = 0; i < c.d; ++i) x[i] = standard_normal(rng);
    const Vector grad = engine.gradient(x);
    const Matrix ys = engine.sample_dual_batch(x, cfg.mc_samples, rng);
    const auto est = estimate_cumulants(ys, Vector::Unit(c.d, 0));
    for (int i = 0; i < c.d; ++i) worst = std::max(worst, std::abs(est.mean[i] - grad[i]) / est.mean_se[i]);
  }
  e.measured = worst;
  e.samples = cfg.mc_samples * std::size(kCumulantCases);
  e.passed = worst <= e.tolerance;
  e.detail = "max |MC mean - FD gradient| in standard errors, q in {2,4}, d in {2,4}";
  return e;
}

DiagnosticEntry check_duality(const DiagnosticsConfig& cfg, Rng& rng) {
  DiagnosticEntry e;
  // measured: smallest (v' S v + 3 se) / bound; passes at >= 1.
  e.expected = 1.0;
  e.tolerance = 0.0;
  double worst = kInf;
  for (const auto& c : kCumulantCases) {
    const double p = c.q / (c.q - 1.0);
    const LogLaplace engine = make_engine(c.d, p, kCumulantA);
    Vector x(c.d);
    for (int i = 0; i < c.d; ++i) x[i] = standard_normal(rng);
    const Matrix ys = engine.sample_dual_batch(x, cfg.mc_samples, rng);
    const double bound = (p - 1.0) / (2.0 * kCumulantA);
    for (int k = 0; k < cfg.directions; ++k) {
      const Vector v = random_unit(c.d, p, rng);
      const auto m = directional_moments(ys, v);
      worst = std::min(worst, (m.second + 3.0 * m.second_se) / bound);
    }
  }
  e.measured = worst;
  e.samples = cfg.mc_samples * std::size(kCumulantCases);
  e.passed = worst >= 1.0;
  e.detail = "min over unit-l_p directions of (v'Cov v + 3 SE) / ((p-1)/(2a))";
  return e;
}

// q = 2 only: v' Hess psi v = ||v||^2 / (2a), checked on the quadrature path
// by a second central difference.
DiagnosticEntry check_gaussian_smoothness(const DiagnosticsConfig&, Rng& rng) {
  DiagnosticEntry e;
  e.tolerance = 1e-4;
  double worst = 0.0;
  const double h = 1e-3;
  for (int t = 0; t < 10; ++t) {
    const int d = 2 + t % 3;
    const double a = 0.25 + uniform01(rng);
    const LogLaplace engine = make_engine(d, 2.0, a, true);
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = standard_normal(rng);
    const Vector v = random_unit(d, 2.0, rng);
    const double fd = (engine.value(x + h * v) - 2.0 * engine.value(x) + engine.value(x - h * v)) / (h * h);
    const double exact = 1.0 / (2.0 * a);
    worst = std::max(worst, std::abs(fd - exact) / exact);
  }
  e.measured = worst;
  e.samples = 10;
  e.passed = worst <= e.tolerance;
  e.detail = "relative error of second difference of psi vs 1/(2a), q = 2 forced quadrature";
  return e;
}

DiagnosticEntry check_self_concordance(const DiagnosticsConfig& cfg, Rng& rng) {
  DiagnosticEntry e;
  // measured: largest (|m3| - 3 se3) / (2 (m2 + 3 se2)^{3/2}); passes at <= 1.
  e.expected = 1.0;
  double worst = -kInf;
  const int d = 3;
  const double p = 4.0 / 3.0;
  const LogLaplace engine = make_engine(d, p, kCumulantA);
  for (int k = 0; k < cfg.pairs; ++k) {
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = 2.0 * standard_normal(rng);
    const Vector h = random_unit(d, 2.0, rng);
    const Matrix ys = engine.sample_dual_batch(x, cfg.mc_samples, rng);
    const auto m = directional_moments(ys, h);
    const double lhs = std::abs(m.third) - 3.0 * m.third_se;
    const double rhs = 2.0 * std::pow(m.second + 3.0 * m.second_se, 1.5);
    worst = std::max(worst, lhs / rhs);
  }
  e.measured = worst;
  e.samples = cfg.mc_samples * static_cast<std::size_t>(cfg.pairs);
  e.passed = worst <= 1.0;
  e.detail = "max (|m3| - 3 SE) / (2 (m2 + 3 SE)^{3/2}) over random (x, h), q = 4, d = 3";
  return e;
}

DiagnosticEntry check_range_llt(const DiagnosticsConfig& cfg, Rng& rng) {
  DiagnosticEntry e;
  // measured: max a (psi(x) - psi(0)); the bound is 10 / a.
  e.expected = 10.0;
  double worst = -kInf;
  const double p = 4.0 / 3.0;
  for (int d : {4, 8, 16}) {
    const double a = 1.0 / (d * std::log(static_cast<double>(d)));
    const LogLaplace engine = make_engine(d, p, a);
    const double base = engine.value(Vector::Zero(d));
    for (int k = 0; k < cfg.range_points; ++k) {
      worst = std::max(worst, a * (engine.value(random_unit(d, p, rng)) - base));
    }
  }
  e.measured = worst;
  e.samples = 3 * static_cast<std::size_t>(cfg.range_points);
  e.passed = worst <= e.expected;
  e.detail = "max a (psi(x) - psi(0)) over unit-l_p x, q = 4, a = 1/(d ln d), d in {4,8,16}";
  return e;
}

DiagnosticEntry check_range_growth(const DiagnosticsConfig& cfg, Rng& rng) {
  DiagnosticEntry e;
  e.expected = 1.7;
  std::ostringstream os;
  double prev = 0.0;
  double worst = kInf;
  for (int d : {16, 64, 256}) {
    double se = 0.0;
    const double r = linf_range_mc(d, cfg.growth_samples, rng, &se);
    os << "d=" << d << " mc=" << r << " se=" << se << " exact=" << linf_range_exact(d) << "; ";
    if (prev > 0.0) worst = std::min(worst, r / prev);
    prev = r;
  }
  e.measured = worst;
  e.samples = 3 * cfg.growth_samples;
  e.passed = worst >= e.expected;
  e.detail = os.str() + "min ratio per d-quadrupling";
  return e;
}

// q = 2, a = 1/2: D_x = N(x, I). TV between D_x and D_x' at ||x - x'|| = 1/4
// by quadrature along the separating direction, against 2 Phi(1/8) - 1.
DiagnosticEntry check_tv_stability(const DiagnosticsConfig&, Rng&) {
  DiagnosticEntry e;
  const double a = 0.5;
  const LogLaplace engine = make_engine(1, 2.0, a);
  const Vector x = Vector::Constant(1, 0.0);
  const Vector xp = Vector::Constant(1, 0.25);
  const double px = engine.value(x), pxp = engine.value(xp);
  auto diff = [&](double y) {
    const double phi = a * y * y;
    return std::abs(std::exp(x[0] * y - phi - px) - std::exp(xp[0] * y - phi - pxp));
  };
  double tv = 0.0;
  const double cuts[] = {-12.0, -4.0, 0.125, 4.0, 12.0};
  for (std::size_t i = 0; i + 1 < std::size(cuts); ++i) tv += adaptive_gauss_legendre(diff, cuts[i], cuts[i + 1], 1e-12);
  tv *= 0.5;
  const double exact = 2.0 * normal_cdf(0.125) - 1.0;
  const double dist = riemannian_distance_gaussian(x, xp, a);
  e.measured = tv;
  e.expected = exact;
  e.tolerance = 1e-8;
  e.samples = 0;
  e.passed = std::abs(tv - exact) <= e.tolerance && tv <= 0.5 && dist <= 0.25 + 1e-15;
  std::ostringstream os;
  os << "d_psi = " << dist << ", TV = " << tv << " <= 1/2";
  e.detail = os.str();
  return e;
}

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> r = {
      {"closed-form-gaussian", check_closed_form},
      {"laplace-identity", check_laplace},
      {"cumulant-mean", check_cumulant_mean},
      {"duality-lower-bound", check_duality},
      {"gaussian-smoothness", check_gaussian_smoothness},
      {"self-concordance", check_self_concordance},
      {"range-llt", check_range_llt},
      {"range-growth-linf", check_range_growth},
      {"tv-stability", check_tv_stability},
  };
  return r;
}

}  // namespace

bool DiagnosticsReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const DiagnosticEntry& e) { return e.passed; });
}

const std::vector<std::string>& diagnostic_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

bool is_diagnostic(const std::string& name) {
  const auto& n = diagnostic_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

DiagnosticEntry run_diagnostic(const std::string& name, const DiagnosticsConfig& cfg) {
  const auto& r = registry();
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i].first != name) continue;
    Rng rng(split_seed(cfg.seed, i));
    const auto t0 = std::chrono::steady_clock::now();
    DiagnosticEntry e;
    try {
      e = r[i].second(cfg, rng);
    } catch (const std::exception& ex) {
      e = DiagnosticEntry{};
      e.passed = false;
      e.measured = std::numeric_limits<double>::quiet_NaN();
      e.detail = std::string("error: ") + ex.what();
    }
    e.name = name;
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return e;
  }
  throw ConfigError("unknown diagnostic check: " + name);
}

DiagnosticsReport diagnostics_suite(const DiagnosticsConfig& cfg) {
  std::vector<std::string> selected = cfg.checks.empty() ? diagnostic_names() : cfg.checks;
  for (const auto& s : selected) {
    if (!is_diagnostic(s)) throw ConfigError("unknown diagnostic check: " + s);
  }
  DiagnosticsReport report;
  report.seed = cfg.seed;
  report.entries.resize(selected.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < selected.size(); i = next++) report.entries[i] = run_diagnostic(selected[i], cfg);
  };
  const int nt = std::clamp(cfg.threads, 1, static_cast<int>(std::max<std::size_t>(1, selected.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return report;
}

double linf_range_exact(int d) {
  if (d < 1) throw ConfigError("linf_range_exact: d must be >= 1");
  const double dd = d;
  // r^2 ~ Gamma(d/2, 1); given r, E exp(y_1) = cosh(r)/d + (d-1)/d sinh(r)/r.
  auto log_h = [dd](double r) {
    if (r < 1e-8) return 0.0;
    const double e2 = std::exp(-2.0 * r);
    return r + std::log((1.0 + e2) / (2.0 * dd) + (dd - 1.0) / dd * (-std::expm1(-2.0 * r)) / (2.0 * r));
  };
  const double m = 0.5 * dd;
  auto log_f = [&](double g) {
    if (g <= 0.0) return kNegInf;
    return (m - 1.0) * std::log(g) - g - std::lgamma(m) + log_h(std::sqrt(g));
  };
  const double peak = log_f(std::max(m, 1.0));
  auto f = [&](double g) { return std::exp(log_f(g) - peak); };
  const double cuts[] = {0.0, m / 4, m / 2, m, 2 * m, 4 * m, 8 * m + 60.0};
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < std::size(cuts); ++i) total += adaptive_gauss_legendre(f, cuts[i], cuts[i + 1], 1e-12);
  return peak + std::log(total);
}

double linf_range_mc(int d, std::size_t n, Rng& rng, double* se) {
  if (d < 1 || n < 2) throw ConfigError("linf_range_mc: need d >= 1 and n >= 2");
  std::gamma_distribution<double> radius2(0.5 * d, 1.0);
  std::vector<double> y(n);
  for (auto& v : y) {
    const double r = std::sqrt(radius2(rng));
    if (uniform01(rng) * d < 1.0) {
      v = uniform01(rng) < 0.5 ? -r : r;
    } else {
      v = r * (2.0 * uniform01(rng) - 1.0);
    }
  }
  const double lse = log_sum_exp(y);
  const double nn = static_cast<double>(n);
  const double log_mean = lse - std::log(nn);
  if (se) {
    // w = exp(y - log_mean) has mean 1; se of log mean ~ sd(w) / sqrt(n).
    double s2 = 0.0;
    for (double v : y) {
      const double w = std::exp(v - log_mean) - 1.0;
      s2 += w * w;
    }
    *se = std::sqrt(s2 / (nn - 1.0) / nn);
  }
  return log_mean;
}

}  // namespace llt
