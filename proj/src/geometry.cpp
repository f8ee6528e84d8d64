#include "llt/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace llt {

double lp_norm(const Vector& x, double p) {
  if (!(p >= 1.0)) throw std::domain_error("lp_norm: exponent must be >= 1");
  double m = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw std::domain_error("lp_norm: non-finite input");
    m = std::max(m, std::abs(x[i]));
  }
  if (m == 0.0 || std::isinf(p)) return m;
  double s = 0.0;
  if (p == 1.0) {
    for (Eigen::Index i = 0; i < x.size(); ++i) s += std::abs(x[i]);
    return s;
  }
  if (p == 2.0) {
    for (Eigen::Index i = 0; i < x.size(); ++i) s += (x[i] / m) * (x[i] / m);
    return m * std::sqrt(s);
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i]) / m, p);
  return m * std::pow(s, 1.0 / p);
}

double dual_exponent(double p) {
  if (!(p >= 1.0 && p <= 2.0)) throw std::domain_error("dual_exponent: p must lie in [1, 2]");
  if (p == 1.0) return kInf;
  return p / (p - 1.0);
}

LpGeometry::LpGeometry(int d, double p, double radius)
    : d_(d), p_(p), q_(0.0), radius_(radius), p_eff_(p), q_eff_(0.0) {
  if (d < 1) throw ConfigError("LpGeometry: dimension must be >= 1");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("LpGeometry: radius must be positive");
  if (!(p >= 1.0 && p <= 2.0)) throw ConfigError("LpGeometry: p must lie in [1, 2]");
  q_ = dual_exponent(p);
  if (p == 1.0) {
    p_eff_ = d > 1 ? std::min(2.0, 1.0 + 1.0 / std::log(static_cast<double>(d))) : 2.0;
  }
  q_eff_ = dual_exponent(p_eff_);
}

bool LpGeometry::contains(const Vector& x) const {
  if (x.size() != d_) throw std::invalid_argument("LpGeometry::contains: dimension mismatch");
  return norm(x) <= radius_ * (1.0 + 1e-12);
}

std::pair<double, double> LpGeometry::chord(const Vector& x, const Vector& u) const {
  if (x.size() != d_ || u.size() != d_) throw std::invalid_argument("LpGeometry::chord: dimension mismatch");
  if (p_ == 2.0) {
    const double uu = u.squaredNorm();
    const double xu = x.dot(u);
    const double c = x.squaredNorm() - radius_ * radius_;
    if (uu == 0.0) return {0.0, 0.0};
    const double disc = std::max(0.0, xu * xu - uu * c);
    const double root = std::sqrt(disc);
    // Stable quadratic roots; c <= 0 puts them on opposite sides of zero.
    const double qq = -(xu + std::copysign(root, xu));
    double t1 = qq / uu;
    double t2 = qq != 0.0 ? c / qq : -t1;
    if (t1 > t2) std::swap(t1, t2);
    return {std::min(t1, 0.0), std::max(t2, 0.0)};
  }
  const double un = norm(u);
  if (un == 0.0) return {0.0, 0.0};
  const double span = (radius_ + norm(x)) / un;
  auto edge = [&](double sign) {
    double lo = 0.0, hi = span;
    if (norm(x) > radius_) return 0.0;
    while (hi - lo > 1e-10 * span) {
      const double mid = 0.5 * (lo + hi);
      if (norm(x + (sign * mid) * u) <= radius_) lo = mid; else hi = mid;
    }
    return lo;
  };
  return {-edge(-1.0), edge(1.0)};
}

double riemannian_distance_gaussian(const Vector& x, const Vector& xp, double a) {
  if (!(a > 0.0)) throw std::domain_error("riemannian_distance_gaussian: a must be positive");
  return (x - xp).norm() / std::sqrt(2.0 * a);
}

Vector uniform_in_ball(const LpGeometry& geom, Rng& rng) {
  const double p = geom.p();
  std::gamma_distribution<double> gamma(1.0 / p, 1.0);
  Vector g(geom.dim());
  double s = 0.0;
  for (int i = 0; i < geom.dim(); ++i) {
    const double mag = std::pow(gamma(rng), 1.0 / p);
    g[i] = uniform01(rng) < 0.5 ? -mag : mag;
    s += std::pow(mag, p);
  }
  s += standard_exponential(rng);
  return geom.radius() * g / std::pow(s, 1.0 / p);
}

}  // namespace llt

namespace llt {

Vector lp_ball_linear_minimizer(const LpGeometry& geom, const Vector& g) {
  if (g.size() != geom.dim()) throw std::invalid_argument("linear minimizer: dimension mismatch");
  Vector x = Vector::Zero(g.size());
  const double gn = lp_norm(g, geom.q());
  if (gn == 0.0) return x;
  if (!std::isfinite(geom.q())) {
    Eigen::Index i = 0;
    g.cwiseAbs().maxCoeff(&i);
    x[i] = -std::copysign(geom.radius(), g[i]);
    return x;
  }
  const double q = geom.q();
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    x[i] = -std::copysign(std::pow(std::abs(g[i]) / gn, q - 1.0), g[i]) * geom.radius();
  }
  return x;
}

}  // namespace llt
