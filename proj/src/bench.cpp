#include "llt/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace llt {

Vector HardInstance::draw_s(Rng& rng) const {
  Vector s(d);
  for (int i = 0; i < d; ++i) s[i] = kappa * v[i] + sigma * standard_normal(rng);
  if (truncated && lp_norm(s, q) >= lipschitz) s.setZero();
  return s;
}

HardInstance make_hard_instance(int d, double G, double p, double k_budget, Rng& rng, bool truncated) {
  if (d < 1) throw ConfigError("hard instance: d must be >= 1");
  if (!(G > 0.0)) throw ConfigError("hard instance: G must be positive");
  if (!(k_budget >= 1.0)) throw ConfigError("hard instance: query budget must be >= 1");
  HardInstance h;
  h.d = d;
  h.lipschitz = G;
  h.p = p;
  h.q = dual_exponent(p);
  h.k_budget = k_budget;
  h.truncated = truncated;
  h.v.resize(d);
  for (int i = 0; i < d; ++i) h.v[i] = uniform01(rng) < 0.5 ? -1.0 : 1.0;
  const double dd = d;
  const double d_pow = std::isfinite(h.q) ? std::pow(dd, -1.0 / h.q) : 1.0;
  h.sigma = G * d_pow / std::sqrt(dd / k_budget + 4.0 * std::log(dd));
  h.kappa = h.sigma * std::sqrt(dd) / (2.0 * std::sqrt(k_budget));
  return h;
}

HardProblem::HardProblem(const HardInstance& hard, double radius)
    : ProblemInstance(LpGeometry(hard.d, hard.p, radius), hard.lipschitz), hard_(hard) {}

double HardProblem::objective(const Vector& x) const { return hard_.mean().dot(x); }

ComponentFn HardProblem::draw_fn(Rng& rng) const {
  Vector s = hard_.draw_s(rng);
  return [s = std::move(s)](const Vector& x) { return s.dot(x); };
}

double risk_lower_bound(double G, double D, double p, int d, double k_budget) {
  if (d < 2) throw ConfigError("risk_lower_bound: needs d >= 2");
  if (!(k_budget > 0.0)) throw ConfigError("risk_lower_bound: budget must be positive");
  const double log_d = std::log(static_cast<double>(d));
  const double shape = std::max(1.0 - 1.0 / p, 1.0 / log_d);
  const double rate = std::min(1.0, std::sqrt(static_cast<double>(d) / (k_budget * log_d)));
  return G * D * shape * rate;
}

double hard_excess_risk(const HardInstance& hard, double radius, const Vector& x) {
  const Vector m = hard.mean();
  return m.dot(x) + radius * lp_norm(m, hard.q);
}

Vector query_baseline(const HardInstance& hard, double radius, double k_budget, Rng& rng) {
  const auto k = static_cast<long long>(std::max(1.0, std::floor(k_budget)));
  Vector g = Vector::Zero(hard.d);
  for (long long i = 0; i < k; ++i) g += hard.draw_s(rng);
  g /= static_cast<double>(k);
  return lp_ball_linear_minimizer(LpGeometry(hard.d, hard.p, radius), g);
}

std::vector<BenchRow> bench_risk_vs_k(int d, double G, double D, double p, const std::vector<double>& ks, int reps,
                                      std::uint64_t seed) {
  if (reps < 2) throw ConfigError("bench: need at least two repetitions");
  std::vector<BenchRow> rows;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(split_seed(seed, j));
    BenchRow row;
    row.d = d;
    row.k = ks[j];
    row.reps = reps;
    row.lower_bound = risk_lower_bound(G, D, p, d, ks[j]);
    double sum = 0.0, sum2 = 0.0;
    for (int r = 0; r < reps; ++r) {
      const HardInstance hard = make_hard_instance(d, G, p, ks[j], rng);
      const double risk = hard_excess_risk(hard, D, query_baseline(hard, D, ks[j], rng));
      sum += risk;
      sum2 += risk * risk;
    }
    row.mean_risk = sum / reps;
    const double var = std::max(0.0, (sum2 - reps * row.mean_risk * row.mean_risk) / (reps - 1));
    row.risk_se = std::sqrt(var / reps);
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back(row);
  }
  return rows;
}

GridOracle::GridOracle(std::vector<double> lo, std::vector<double> hi, std::vector<int> bins,
                       const std::function<double(const Vector&)>& log_density, int sub)
    : lo_(std::move(lo)), hi_(std::move(hi)), bins_(std::move(bins)) {
  const auto dim = lo_.size();
  if (dim < 1 || dim > 2 || hi_.size() != dim || bins_.size() != dim) {
    throw ConfigError("GridOracle: dimension must be 1 or 2 with matching bounds");
  }
  for (std::size_t a = 0; a < dim; ++a) {
    if (!(hi_[a] > lo_[a]) || bins_[a] < 1) throw ConfigError("GridOracle: empty box or no bins");
  }
  if (sub < 1) throw ConfigError("GridOracle: sub must be >= 1");
  const int nx = bins_[0];
  const int ny = dim == 2 ? bins_[1] : 1;
  const double hx = (hi_[0] - lo_[0]) / nx;
  const double hy = dim == 2 ? (hi_[1] - lo_[1]) / ny : 1.0;
  std::vector<double> logm(static_cast<std::size_t>(nx) * ny);
  std::vector<double> pts;
  Vector x(static_cast<Eigen::Index>(dim));
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      pts.clear();
      for (int sy = 0; sy < (dim == 2 ? sub : 1); ++sy) {
        for (int sx = 0; sx < sub; ++sx) {
          x[0] = lo_[0] + (ix + (sx + 0.5) / sub) * hx;
          if (dim == 2) x[1] = lo_[1] + (iy + (sy + 0.5) / sub) * hy;
          pts.push_back(log_density(x));
        }
      }
      logm[static_cast<std::size_t>(iy) * nx + ix] = log_sum_exp(pts);
    }
  }
  const double total = log_sum_exp(logm);
  if (!std::isfinite(total)) throw NumericalError("GridOracle: log-density has no finite mass on the box");
  probs_.resize(logm.size());
  cdf_.resize(logm.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < logm.size(); ++i) {
    probs_[i] = std::exp(logm[i] - total);
    acc += probs_[i];
    cdf_[i] = acc;
  }
  for (auto& c : cdf_) c /= acc;
}

long long GridOracle::cell_of(const Vector& x) const {
  long long idx = 0;
  long long stride = 1;
  for (std::size_t a = 0; a < lo_.size(); ++a) {
    if (!(x[static_cast<Eigen::Index>(a)] >= lo_[a] && x[static_cast<Eigen::Index>(a)] < hi_[a])) return -1;
    const double h = (hi_[a] - lo_[a]) / bins_[a];
    auto b = static_cast<long long>((x[static_cast<Eigen::Index>(a)] - lo_[a]) / h);
    b = std::min<long long>(b, bins_[a] - 1);
    idx += b * stride;
    stride *= bins_[a];
  }
  return idx;
}

Vector GridOracle::cell_center(std::size_t cell) const {
  Vector c(static_cast<Eigen::Index>(lo_.size()));
  std::size_t rest = cell;
  for (std::size_t a = 0; a < lo_.size(); ++a) {
    const double h = (hi_[a] - lo_[a]) / bins_[a];
    const std::size_t b = rest % static_cast<std::size_t>(bins_[a]);
    rest /= static_cast<std::size_t>(bins_[a]);
    c[static_cast<Eigen::Index>(a)] = lo_[a] + (static_cast<double>(b) + 0.5) * h;
  }
  return c;
}

Vector GridOracle::sample(Rng& rng) const {
  const double u = uniform01(rng);
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t cell = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  Vector x = cell_center(cell);
  for (std::size_t a = 0; a < lo_.size(); ++a) {
    const double h = (hi_[a] - lo_[a]) / bins_[a];
    x[static_cast<Eigen::Index>(a)] += (uniform01(rng) - 0.5) * h;
  }
  return x;
}

double grid_tv(const Matrix& samples, const GridOracle& oracle) {
  if (samples.rows() == 0) throw std::invalid_argument("grid_tv: empty sample set");
  if (samples.cols() != oracle.dim()) throw std::invalid_argument("grid_tv: sample dimension mismatch");
  std::vector<double> counts(oracle.cells(), 0.0);
  double outside = 0.0;
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    const long long c = oracle.cell_of(samples.row(r).transpose());
    if (c < 0) outside += 1.0; else counts[static_cast<std::size_t>(c)] += 1.0;
  }
  const double n = static_cast<double>(samples.rows());
  double tv = outside / n;
  const auto& p = oracle.probabilities();
  for (std::size_t i = 0; i < counts.size(); ++i) tv += std::abs(counts[i] / n - p[i]);
  return 0.5 * tv;
}

}  // namespace llt
