#include "llt/llt.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <map>

#include "llt/univariate.hpp"

namespace llt {

namespace {

inline double abs_pow(double u, double q) {
  const double a = std::abs(u);
  if (q == 2.0) return a * a;
  if (q == 4.0) {
    const double a2 = a * a;
    return a2 * a2;
  }
  return std::pow(a, q);
}

// log int exp(s u - |u|^q) du.
double log_j(double s, double q, double rel_tol, double drop) {
  if (s == 0.0) return std::log(2.0) + std::lgamma(1.0 + 1.0 / q);
  const double mode = std::copysign(std::pow(std::abs(s) / q, 1.0 / (q - 1.0)), s);
  auto g = [&](double u) { return s * u - abs_pow(u, q); };
  const double gmax = g(mode);
  const double curv = q * (q - 1.0) * std::pow(std::abs(mode), q - 2.0);
  const double w0 = curv > 0.0 ? std::min(1.0, 1.0 / std::sqrt(curv)) : 1.0;

  auto edge = [&](double dir) {
    double w = w0;
    for (int i = 0; i < 200; ++i) {
      if (g(mode + dir * w) < gmax - drop) return mode + dir * w;
      w *= 2.0;
    }
    throw NumericalError("one_dim_integral: tail window did not close (s=" + std::to_string(s) +
                         ", q=" + std::to_string(q) + ")");
  };
  const double left = edge(-1.0);
  const double right = edge(1.0);
  auto f = [&](double u) { return std::exp(g(u) - gmax); };

  std::vector<double> cuts{left, mode, right};
  if (left < 0.0 && right > 0.0 && mode != 0.0) cuts.push_back(0.0);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += adaptive_gauss_legendre(f, cuts[i], cuts[i + 1], rel_tol);
  }
  return gmax + std::log(total);
}

std::vector<std::uint64_t> bit_key(const Vector& x) {
  std::vector<std::uint64_t> key(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) key[i] = std::bit_cast<std::uint64_t>(x[i]);
  return key;
}

}  // namespace

double log_one_dim_integral(double theta, double coef, double q, double rel_tol, double tail_drop) {
  if (!(coef > 0.0) || !std::isfinite(coef)) {
    throw std::domain_error("one_dim_integral: coefficient must be positive and finite");
  }
  if (!(q > 1.0) || !std::isfinite(q)) throw std::domain_error("one_dim_integral: q must be finite and > 1");
  if (!std::isfinite(theta)) throw std::domain_error("one_dim_integral: theta must be finite");
  const double log_coef = std::log(coef);
  const double scale = std::exp(-log_coef / q);
  return -log_coef / q + log_j(theta * scale, q, rel_tol, tail_drop);
}

double one_dim_integral(double theta, double coef, double q) {
  return std::exp(log_one_dim_integral(theta, coef, q));
}

double llt_value_at_origin(int d, double q, double a) {
  if (d < 1 || !(a > 0.0)) throw std::domain_error("llt_value_at_origin: need d >= 1 and a > 0");
  const double dd = d;
  return dd * (std::log(2.0) + std::lgamma(1.0 + 1.0 / q)) + std::lgamma(1.0 + 0.5 * dd) -
         std::lgamma(1.0 + dd / q) - 0.5 * dd * std::log(a);
}

std::size_t LogLaplace::KeyHash::operator()(const std::vector<std::uint64_t>& k) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (auto v : k) h = split_seed(h, v);
  return static_cast<std::size_t>(h);
}

LogLaplace::LogLaplace(LLTSpec spec)
    : spec_(std::move(spec)),
      q_(spec_.regularizer_p ? dual_exponent(*spec_.regularizer_p) : spec_.geom.effective_q()),
      law_(2.0 / q_) {
  if (!std::isfinite(q_)) throw ConfigError("LLTSpec: regularizer exponent must exceed 1");
  if (!(spec_.a > 0.0) || !std::isfinite(spec_.a)) throw ConfigError("LLTSpec: a must be positive");
  const auto& qc = spec_.quad;
  if (!(qc.rel_tol > 0.0) || !(qc.mixing_tol > 0.0) || !(qc.tail_drop > 0.0) ||
      !(qc.coarse_step > 0.0) || qc.max_halvings < 0 || qc.max_halvings > 30) {
    throw ConfigError("LLTSpec: invalid quadrature configuration");
  }
}

double LogLaplace::lattice_step() const {
  return spec_.quad.coarse_step / static_cast<double>(1LL << spec_.quad.max_halvings);
}

double LogLaplace::log_mixing_density(long long j) const {
  {
    std::lock_guard<std::mutex> lock(mixing_mu_);
    auto it = mixing_cache_.find(j);
    if (it != mixing_cache_.end()) return it->second;
  }
  const double v = law_.log_density(std::exp(static_cast<double>(j) * lattice_step()));
  std::lock_guard<std::mutex> lock(mixing_mu_);
  mixing_cache_.emplace(j, v);
  return v;
}

// Integrand in s = log lambda: mu(lambda) lambda prod_i I(x_i, lambda a^{q/2}).
double LogLaplace::log_mixing_integrand(const Vector& x, long long j) const {
  const double s = static_cast<double>(j) * lattice_step();
  const double log_mu = log_mixing_density(j);
  if (log_mu == kNegInf) return kNegInf;
  const double log_coef = s + 0.5 * q_ * std::log(spec_.a);
  const double shrink = std::exp(-log_coef / q_);
  double total = log_mu + s;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    total += -log_coef / q_ + log_j(x[i] * shrink, q_, spec_.quad.rel_tol, spec_.quad.tail_drop);
  }
  return total;
}

double LogLaplace::value_uncached(const Vector& x) const {
  if (law_.degenerate()) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      total += log_one_dim_integral(x[i], spec_.a, 2.0, spec_.quad.rel_tol, spec_.quad.tail_drop);
    }
    return total;
  }
  return mixing_lattice(x).log_value;
}

LogLaplace::MixingLattice LogLaplace::mixing_lattice(const Vector& x, bool finest) const {
  const long long stride0 = 1LL << spec_.quad.max_halvings;
  const double drop = spec_.quad.tail_drop;
  std::map<long long, double> g;
  auto eval = [&](long long j) {
    auto it = g.find(j);
    if (it != g.end()) return it->second;
    const double v = log_mixing_integrand(x, j);
    g.emplace(j, v);
    return v;
  };

  // Hill-climb to the peak on the coarse lattice.
  long long peak = 0;
  double gmax = eval(0);
  const long long dir = eval(stride0) > gmax ? 1 : (eval(-stride0) > gmax ? -1 : 0);
  if (dir != 0) {
    for (int i = 0; i < 100000; ++i) {
      const double next = eval(peak + dir * stride0);
      if (!(next > gmax)) break;
      peak += dir * stride0;
      gmax = next;
    }
  }
  long long lo = peak, hi = peak;
  for (int i = 0; i < 100000; ++i) {
    lo -= stride0;
    const double v = eval(lo);
    gmax = std::max(gmax, v);
    if (v < gmax - drop) break;
  }
  for (int i = 0; i < 100000; ++i) {
    hi += stride0;
    const double v = eval(hi);
    gmax = std::max(gmax, v);
    if (v < gmax - drop) break;
  }
  if (!std::isfinite(gmax)) throw NumericalError("llt_value: mixing integrand is not finite");

  double sum = 0.0;
  for (long long j = lo; j <= hi; j += stride0) sum += std::exp(eval(j) - gmax);
  double h = spec_.quad.coarse_step;
  double prev = std::log(h * sum);
  double change = kInf;
  long long stride = stride0;
  while (stride > 1) {
    const long long half = stride / 2;
    for (long long j = lo + half; j < hi; j += stride) sum += std::exp(eval(j) - gmax);
    stride = half;
    h *= 0.5;
    const double cur = std::log(h * sum);
    change = std::abs(cur - prev);
    prev = cur;
    if (change < spec_.quad.mixing_tol && !finest) break;
  }
  if (change > 1e-8) {
    throw NumericalError("llt_value: lambda-mixing trapezoid did not stabilize (last change " +
                         std::to_string(change) + ")");
  }
  MixingLattice out;
  out.first = lo / stride;
  out.stride = stride;
  out.log_value = gmax + prev;
  for (long long j = lo; j <= hi; j += stride) out.log_g.push_back(eval(j));
  return out;
}

std::shared_ptr<const LogLaplace::MixingPosterior> LogLaplace::posterior(const Vector& x) const {
  auto key = bit_key(x);
  {
    std::lock_guard<std::mutex> lock(posterior_mu_);
    if (posterior_ && key == posterior_key_) return posterior_;
  }
  auto post = std::make_shared<MixingPosterior>();
  post->lattice = mixing_lattice(x, true);
  const auto& lg = post->lattice.log_g;
  const double h = static_cast<double>(post->lattice.stride) * lattice_step();
  const double top = *std::max_element(lg.begin(), lg.end());
  post->cdf.resize(lg.size() - 1);
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < lg.size(); ++j) {
    const double w0 = std::exp(lg[j] - top), w1 = std::exp(lg[j + 1] - top);
    const double dl = lg[j + 1] - lg[j];
    // Mass of the cell under log-linear interpolation.
    acc += std::abs(dl) > 1e-12 && std::isfinite(dl) ? h * (w1 - w0) / dl : h * 0.5 * (w0 + w1);
    post->cdf[j] = acc;
  }
  if (!(acc > 0.0)) throw NumericalError("sample_pix: lambda posterior has no mass");
  for (auto& c : post->cdf) c /= acc;
  std::lock_guard<std::mutex> lock(posterior_mu_);
  posterior_key_ = std::move(key);
  posterior_ = post;
  return post;
}

double LogLaplace::sample_lambda(const Vector& x, Rng& rng) const {
  if (law_.degenerate()) return 1.0;
  const auto post = posterior(x);
  const auto& cdf = post->cdf;
  const auto& lg = post->lattice.log_g;
  const auto cell = static_cast<std::size_t>(
      std::min<std::ptrdiff_t>(std::lower_bound(cdf.begin(), cdf.end(), uniform01(rng)) - cdf.begin(),
                               static_cast<std::ptrdiff_t>(cdf.size()) - 1));
  const double h = static_cast<double>(post->lattice.stride) * lattice_step();
  const double s0 = static_cast<double>(post->lattice.first + static_cast<long long>(cell)) * h;
  const double slope = (lg[cell + 1] - lg[cell]) / h;
  const double u = uniform01(rng);
  double t;
  if (!std::isfinite(slope)) {
    t = slope > 0.0 ? h : 0.0;
  } else if (std::abs(slope * h) < 1e-12) {
    t = u * h;
  } else {
    // Inverse CDF of exp(slope t) on [0, h].
    t = std::log1p(u * std::expm1(slope * h)) / slope;
  }
  return std::exp(s0 + std::clamp(t, 0.0, h));
}

double LogLaplace::value(const Vector& x) const {
  if (x.size() != dim()) throw std::invalid_argument("llt_value: dimension mismatch");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw std::domain_error("llt_value: non-finite input");
  }
  if (closed_form()) {
    return x.squaredNorm() / (4.0 * spec_.a) + 0.5 * dim() * std::log(kPi / spec_.a);
  }
  auto key = bit_key(x);
  {
    std::lock_guard<std::mutex> lock(cache_mu_);
    auto it = value_cache_.find(key);
    if (it != value_cache_.end()) return it->second;
  }
  const double v = value_uncached(x);
  std::lock_guard<std::mutex> lock(cache_mu_);
  if (value_cache_.size() >= spec_.quad.cache_capacity) value_cache_.clear();
  value_cache_.emplace(std::move(key), v);
  return v;
}

std::size_t LogLaplace::cache_size() const {
  std::lock_guard<std::mutex> lock(cache_mu_);
  return value_cache_.size();
}

Vector LogLaplace::gradient(const Vector& x) const {
  if (x.size() != dim()) throw std::invalid_argument("llt_gradient: dimension mismatch");
  const double h = 1e-5 * std::max(1.0, x.size() ? x.cwiseAbs().maxCoeff() : 0.0);
  Vector grad(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double up = value(xp);
    xp[i] = x[i] - h;
    const double down = value(xp);
    xp[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

Vector LogLaplace::sample_dual(const Vector& x, Rng& rng) const {
  if (x.size() != dim()) throw std::invalid_argument("sample_pix: dimension mismatch");
  const double lambda = sample_lambda(x, rng);
  const double kappa = lambda * std::pow(spec_.a, 0.5 * q_);
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw NumericalError("sample_pix: mixing draw gave coefficient " + std::to_string(kappa));
  }
  Vector y(x.size());
  if (q_ == 2.0) {
    const double sd = 1.0 / std::sqrt(2.0 * kappa);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      y[i] = x[i] / (2.0 * kappa) + sd * standard_normal(rng);
    }
    return y;
  }
  const double q = q_;
  const double width = std::pow(kappa, -1.0 / q);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double th = x[i];
    auto logf = [=](double t) { return th * t - kappa * abs_pow(t, q); };
    auto dlogf = [=](double t) {
      return th - kappa * q * std::copysign(std::pow(std::abs(t), q - 1.0), t);
    };
    const double m = std::copysign(std::pow(std::abs(th) / (kappa * q), 1.0 / (q - 1.0)), th);
    const double curv = kappa * q * (q - 1.0) * std::pow(std::abs(m), q - 2.0);
    const double scale = curv > 0.0 ? std::min(width, 1.0 / std::sqrt(curv)) : width;
    try {
      y[i] = sample_log_concave(logf, kNegInf, kInf, rng, m, scale, dlogf);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " [theta=" + std::to_string(th) +
                           ", kappa=" + std::to_string(kappa) + ", q=" + std::to_string(q) + "]");
    }
  }
  return y;
}

Matrix LogLaplace::sample_dual_batch(const Vector& x, std::size_t n, Rng& rng) const {
  Matrix out(static_cast<Eigen::Index>(n), x.size());
  for (std::size_t r = 0; r < n; ++r) out.row(static_cast<Eigen::Index>(r)) = sample_dual(x, rng).transpose();
  return out;
}

double llt_value(const LogLaplace& engine, const Vector& x) { return engine.value(x); }
Vector llt_gradient(const LogLaplace& engine, const Vector& x) { return engine.gradient(x); }
Vector sample_pix(const LogLaplace& engine, const Vector& x, Rng& rng) {
  return engine.sample_dual(x, rng);
}

DirectionalMoments directional_moments(const Matrix& samples, const Vector& v) {
  const auto n = samples.rows();
  if (n < 2) throw std::invalid_argument("directional_moments: need at least two samples");
  const Vector mean = samples.colwise().mean().transpose();
  const Vector z = (samples.rowwise() - mean.transpose()) * v;
  const Vector z2 = z.array().square().matrix();
  const Vector z3 = (z.array() * z2.array()).matrix();
  auto mean_se = [n](const Vector& w) {
    const double m = w.mean();
    const double var = (w.array() - m).square().sum() / static_cast<double>(n - 1);
    return std::pair{m, std::sqrt(var / static_cast<double>(n))};
  };
  DirectionalMoments out;
  std::tie(out.second, out.second_se) = mean_se(z2);
  std::tie(out.third, out.third_se) = mean_se(z3);
  return out;
}

CumulantEstimate estimate_cumulants(const Matrix& samples, const Vector& h) {
  const auto n = samples.rows();
  const auto d = samples.cols();
  if (n < 2) throw std::invalid_argument("estimate_cumulants: need at least two samples");
  if (h.size() != d) throw std::invalid_argument("estimate_cumulants: direction dimension mismatch");
  const double nn = static_cast<double>(n);
  CumulantEstimate est;
  est.sample_count = static_cast<std::size_t>(n);
  est.mean = samples.colwise().mean().transpose();
  const Matrix centered = samples.rowwise() - est.mean.transpose();
  est.mean_se = (centered.array().square().colwise().sum() / (nn - 1.0) / nn).sqrt().transpose();
  est.covariance = centered.transpose() * centered / (nn - 1.0);
  est.covariance = 0.5 * (est.covariance + est.covariance.transpose()).eval();
  est.covariance_se.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      const Eigen::ArrayXd prod = centered.col(i).array() * centered.col(j).array();
      const double m = prod.mean();
      const double var = (prod - m).square().sum() / (nn - 1.0);
      est.covariance_se(i, j) = est.covariance_se(j, i) = std::sqrt(var / nn);
    }
  }
  const auto dm = directional_moments(samples, h);
  est.second_directional = dm.second;
  est.second_directional_se = dm.second_se;
  est.third_directional = dm.third;
  est.third_directional_se = dm.third_se;
  return est;
}

CumulantEstimate cumulant_mc(const LogLaplace& engine, const Vector& x, const Vector& h,
                             std::size_t n, Rng& rng) {
  if (n < 100) throw std::invalid_argument("cumulant_mc: need N >= 100");
  return estimate_cumulants(engine.sample_dual_batch(x, n, rng), h);
}

}  // namespace llt
