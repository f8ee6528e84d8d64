#include "llt/stable.hpp"

#include <algorithm>

namespace llt {

namespace {

// log A with the angle given both as u and as v = pi - u, so the upper half of
// (0, pi) keeps relative accuracy where sin(u) -> 0.
double log_a_uv(double c, double u, double v) {
  const double su = u < 0.5 * kPi ? std::sin(u) : std::sin(v);
  return (c / (1.0 - c)) * std::log(std::sin(c * u)) + std::log(std::sin((1.0 - c) * u)) -
         std::log(su) / (1.0 - c);
}

double log_a_at_zero(double c) { return (c / (1.0 - c)) * std::log(c) + std::log1p(-c); }

// log(sin(x) / x), accurate for small x.
double log_sinc(double x) {
  const double x2 = x * x;
  if (x2 < 1e-2) {
    return -x2 * (1.0 / 6 + x2 * (1.0 / 180 + x2 * (1.0 / 2835 + x2 * (1.0 / 37800 + x2 / 467775))));
  }
  return std::log(std::sin(x) / x);
}

// log A(u) - log A(0). The log u terms cancel exactly, so this keeps full
// relative accuracy as u -> 0, where A(u) z can be astronomically large.
double log_a_excess(double c, double u) {
  return (c / (1.0 - c)) * log_sinc(c * u) + log_sinc((1.0 - c) * u) - log_sinc(u) / (1.0 - c);
}

// Integral of g(u) = exp(-A(u) z) * A(u)^power over (0, pi), in log space.
// A is increasing on (0, pi), so g is unimodal: for the density (power = 1)
// it peaks where A(u) = 1/z (or at u = 0). The range is cut where log g has
// fallen 45 below its peak, then split at the peak and at pi/2.
double log_kanter_integral(double c, double z, double power) {
  const double log_z = std::log(z);
  const double la0 = log_a_at_zero(c);
  const double za0 = std::exp(la0 + log_z);
  const double half = 0.5 * kPi;
  // log g(u) - log g(0), with the excess of log A taken either from the
  // cancellation-free form (lower half) or directly (upper half, angle v = pi - u).
  auto rel = [&](double delta) { return power * delta - za0 * std::expm1(delta); };
  auto h_lower = [&](double u) { return rel(log_a_excess(c, u)); };
  auto h_upper = [&](double v) { return rel(log_a_uv(c, kPi - v, v) - la0); };
  auto h = [&](double u) { return u < half ? h_lower(u) : h_upper(kPi - u); };

  double peak = 0.0;
  double hmax = 0.0;
  if (power > 0.0 && -log_z > la0) {
    const double target = std::log(power) - log_z;
    double lo = 0.0, hi = kPi;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (log_a_uv(c, mid, kPi - mid) < target) lo = mid; else hi = mid;
    }
    peak = 0.5 * (lo + hi);
    hmax = h(peak);
  }
  const double floor = hmax - 45.0;
  // Bisection for the crossing of `floor` on a monotone stretch of h.
  auto crossing = [&](double below, double above) {
    for (int i = 0; i < 200 && std::abs(above - below) > 1e-15; ++i) {
      const double mid = 0.5 * (below + above);
      if (h(mid) < floor) below = mid; else above = mid;
    }
    return 0.5 * (below + above);
  };
  const double ua = (peak > 0.0 && 0.0 < floor) ? crossing(0.0, peak) : 0.0;
  const double ub = crossing(kPi, peak);

  // A(u) z carries relative round-off ~1e-15 in A away from u = 0; when A z
  // is large that noise dominates any tighter tolerance.
  const double tol = std::max(1e-12, 1e-13 * std::min(za0, 1e6));
  auto lower = [&](double u) { return std::exp(h_lower(u) - hmax); };
  auto upper = [&](double v) { return v <= 0.0 ? 0.0 : std::exp(h_upper(v) - hmax); };
  auto piece = [&](double a, double b) {
    double acc = 0.0;
    if (a < half) acc += adaptive_gauss_legendre(lower, a, std::min(b, half), tol);
    if (b > half) acc += adaptive_gauss_legendre(upper, kPi - b, kPi - std::max(a, half), tol);
    return acc;
  };
  double total = 0.0;
  if (peak > ua) total += piece(ua, peak);
  if (ub > peak) total += piece(std::max(peak, ua), ub);
  if (!(total > 0.0)) return kNegInf;
  return power * la0 - za0 + hmax + std::log(total);
}

}  // namespace

double kanter_log_a(double c, double u) { return log_a_uv(c, u, kPi - u); }

double kanter_log_density(double c, double lambda) {
  if (!(c > 0.0 && c < 1.0)) throw std::domain_error("kanter_log_density: c must lie in (0, 1)");
  if (!(lambda > 0.0)) throw std::domain_error("stable density: lambda must be positive");
  const double z = std::exp(-(c / (1.0 - c)) * std::log(lambda));
  if (z == 0.0 || !std::isfinite(z)) {
    if (z == 0.0) {
      // lambda -> infinity: f ~ c / Gamma(1 - c) lambda^{-1-c}.
      return std::log(c / std::tgamma(1.0 - c)) - (1.0 + c) * std::log(lambda);
    }
    return kNegInf;
  }
  const double li = log_kanter_integral(c, z, 1.0);
  return std::log(c / (1.0 - c)) - std::log(lambda) / (1.0 - c) - std::log(kPi) + li;
}

double kanter_cdf(double c, double lambda) {
  if (!(c > 0.0 && c < 1.0)) throw std::domain_error("kanter_cdf: c must lie in (0, 1)");
  if (lambda <= 0.0) return 0.0;
  const double z = std::exp(-(c / (1.0 - c)) * std::log(lambda));
  if (!std::isfinite(z)) return 0.0;
  if (z == 0.0) return 1.0;
  return std::clamp(std::exp(log_kanter_integral(c, z, 0.0)) / kPi, 0.0, 1.0);
}

StableCountLaw::StableCountLaw(double c) : c_(c) {
  if (!(c > 0.0 && c <= 1.0)) throw std::domain_error("StableCountLaw: index must lie in (0, 1]");
}

double StableCountLaw::log_density(double lambda) const {
  if (degenerate()) {
    throw DegenerateLawError("StableCountLaw(c=1) is the point mass at 1; use sample()");
  }
  if (!(lambda > 0.0)) throw std::domain_error("stable density: lambda must be positive");
  if (levy()) {
    return -std::log(2.0 * std::sqrt(kPi)) - 1.5 * std::log(lambda) - 0.25 / lambda;
  }
  return kanter_log_density(c_, lambda);
}

double StableCountLaw::density(double lambda) const {
  return std::max(0.0, std::exp(log_density(lambda)));
}

double StableCountLaw::cdf(double lambda) const {
  if (degenerate()) return lambda >= 1.0 ? 1.0 : 0.0;
  if (lambda <= 0.0) return 0.0;
  if (levy()) return std::erfc(0.5 / std::sqrt(lambda));
  return kanter_cdf(c_, lambda);
}

double StableCountLaw::sample(Rng& rng) const {
  if (degenerate()) return 1.0;
  if (levy()) {
    const double z = standard_normal(rng);
    return 0.5 / (z * z);
  }
  const double u = kPi * uniform01(rng);
  const double e = standard_exponential(rng);
  return std::exp(((1.0 - c_) / c_) * (kanter_log_a(c_, u) - std::log(e)));
}

}  // namespace llt
