#include "llt/conditional.hpp"

#include <cmath>

#include "llt/univariate.hpp"

namespace llt {

double Component::operator()(const Vector& x) const {
  owner_->count_query();
  return fn_(x);
}

ProblemInstance::ProblemInstance(LpGeometry geom, double lipschitz)
    : geom_(std::move(geom)), lipschitz_(lipschitz) {
  if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz)) {
    throw ConfigError("ProblemInstance: Lipschitz bound must be finite and >= 0");
  }
}

Link parse_link(const std::string& name) {
  if (name == "linear") return Link::kLinear;
  if (name == "abs") return Link::kAbs;
  if (name == "logistic") return Link::kLogistic;
  if (name == "hinge") return Link::kHinge;
  throw ConfigError("unknown loss link '" + name + "' (expected linear, abs, logistic or hinge)");
}

std::string link_name(Link link) {
  switch (link) {
    case Link::kLinear: return "linear";
    case Link::kAbs: return "abs";
    case Link::kLogistic: return "logistic";
    case Link::kHinge: return "hinge";
  }
  return "linear";
}

double apply_link(Link link, double t) {
  switch (link) {
    case Link::kLinear: return t;
    case Link::kAbs: return std::abs(t);
    case Link::kLogistic: return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
    case Link::kHinge: return std::max(0.0, 1.0 - t);
  }
  return t;
}

namespace {

double max_dual_norm(const Matrix& rows, double q) {
  double g = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    g = std::max(g, lp_norm(rows.row(i).transpose(), q));
  }
  return g;
}

std::size_t uniform_index(std::size_t n, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

GlmInstance::GlmInstance(LpGeometry geom, Matrix rows, Link link, std::optional<double> lipschitz)
    : ProblemInstance(geom, lipschitz ? *lipschitz : max_dual_norm(rows, geom.q())),
      rows_(std::move(rows)),
      link_(link) {
  if (rows_.rows() == 0) throw ConfigError("GlmInstance: no components");
  if (rows_.cols() != geom.dim()) throw ConfigError("GlmInstance: row dimension does not match d");
  if (lipschitz && max_dual_norm(rows_, geom.q()) > *lipschitz * (1.0 + 1e-12)) {
    throw ConfigError("GlmInstance: a row exceeds the Lipschitz bound in the dual norm");
  }
}

double GlmInstance::objective(const Vector& x) const {
  const Vector t = rows_ * x;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) sum += apply_link(link_, t[i]);
  return sum / static_cast<double>(t.size());
}

ComponentFn GlmInstance::draw_fn(Rng& rng) const {
  const auto i = static_cast<Eigen::Index>(uniform_index(static_cast<std::size_t>(rows_.rows()), rng));
  return [this, i](const Vector& x) { return apply_link(link_, rows_.row(i).dot(x)); };
}

FunctionInstance::FunctionInstance(LpGeometry geom, double lipschitz, std::vector<ComponentFn> fns)
    : ProblemInstance(std::move(geom), lipschitz), fns_(std::move(fns)) {
  if (fns_.empty()) throw ConfigError("FunctionInstance: no components");
}

double FunctionInstance::objective(const Vector& x) const {
  double sum = 0.0;
  for (const auto& f : fns_) sum += f(x);
  return sum / static_cast<double>(fns_.size());
}

ComponentFn FunctionInstance::draw_fn(Rng& rng) const { return fns_[uniform_index(fns_.size(), rng)]; }

std::unique_ptr<ProblemInstance> make_zero_instance(const LpGeometry& geom) {
  return std::make_unique<FunctionInstance>(geom, 0.0,
                                            std::vector<ComponentFn>{[](const Vector&) { return 0.0; }});
}

InnerLoopConfig::InnerLoopConfig(double lipschitz, double delta_inner, double eta, double mu,
                                 int hr_steps, int hr_burn, int max_iterations)
    : lipschitz_(lipschitz),
      delta_inner_(delta_inner),
      eta_(eta),
      mu_(mu),
      hr_steps_(hr_steps),
      hr_burn_(hr_burn),
      max_iterations_(max_iterations) {
  if (!(delta_inner > 0.0 && delta_inner < 1.0)) throw ConfigError("inner loop: delta must lie in (0, 1)");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("inner loop: eta must be positive");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("inner loop: mu must be >= 0");
  if (hr_steps < 1 || hr_burn < 0) throw ConfigError("inner loop: need hr_steps >= 1 and hr_burn >= 0");
  if (max_iterations < 1) throw ConfigError("inner loop: max_iterations must be >= 1");
  if (1.0 / eta < 1e4 * lipschitz * lipschitz * std::log(1.0 / delta_inner)) {
    throw ConfigError("inner loop: eta = " + std::to_string(eta) + " violates 1/eta >= 1e4 G^2 ln(1/delta) (max " +
                      std::to_string(max_eta(lipschitz, delta_inner)) + ")");
  }
}

int InnerLoopConfig::analysis_horizon() const {
  return static_cast<int>(std::ceil(10.0 * std::log(1.0 / delta_inner_)));
}

double InnerLoopConfig::max_eta(double lipschitz, double delta_inner) {
  const double denom = 1e4 * lipschitz * lipschitz * std::log(1.0 / delta_inner);
  return denom > 0.0 ? 1.0 / denom : kInf;
}

double gamma_logdensity(const LogLaplace& engine, double eta, double mu, const Vector& y,
                        const Vector& x) {
  return -(1.0 + eta * mu) * engine.value(x) + x.dot(y);
}

ChainTarget gamma_target(const LogLaplace& engine, double eta, double mu, const Vector& y) {
  ChainTarget t;
  t.log_density = [&engine, eta, mu, y](const Vector& x) {
    return gamma_logdensity(engine, eta, mu, y, x);
  };
  if (engine.closed_form()) {
    t.alpha = (1.0 + eta * mu) / (4.0 * engine.a());
    t.b = y;
  }
  return t;
}

ChainTarget nu_target(const LogLaplace& engine, double eta_mu) {
  ChainTarget t;
  t.log_density = [&engine, eta_mu](const Vector& x) { return -eta_mu * engine.value(x); };
  if (engine.closed_form()) {
    t.alpha = eta_mu / (4.0 * engine.a());
    t.b = Vector::Zero(engine.dim());
  }
  return t;
}

HitAndRun::HitAndRun(const LpGeometry& geom, ChainTarget target, Vector start)
    : geom_(geom), target_(std::move(target)), x_(std::move(start)) {
  if (x_.size() != geom_.dim()) throw std::invalid_argument("HitAndRun: start has wrong dimension");
  if (!geom_.contains(x_)) throw std::invalid_argument("HitAndRun: start lies outside the ball");
}

void HitAndRun::step(Rng& rng) {
  const int d = geom_.dim();
  Vector u(d);
  double lo = 0.0, hi = 0.0;
  const double min_len = 1e-12 * geom_.radius();
  int tries = 0;
  for (;; ++tries) {
    if (tries >= 100) throw NumericalError("hit-and-run: degenerate chord after 100 directions");
    for (int i = 0; i < d; ++i) u[i] = standard_normal(rng);
    const double nu = u.norm();
    if (!(nu > 0.0)) continue;
    u /= nu;
    std::tie(lo, hi) = geom_.chord(x_, u);
    if (hi - lo > min_len) break;
  }
  double t;
  if (target_.alpha) {
    // Along the chord: -alpha t^2 + beta t + const.
    const double alpha = *target_.alpha;
    const double beta = target_.b.dot(u) - 2.0 * alpha * x_.dot(u);
    auto g = [alpha, beta](double s) { return s * (beta - alpha * s); };
    auto dg = [alpha, beta](double s) { return beta - 2.0 * alpha * s; };
    double mode;
    if (alpha > 0.0) {
      mode = beta / (2.0 * alpha);
    } else {
      mode = beta > 0.0 ? hi : (beta < 0.0 ? lo : 0.5 * (lo + hi));
    }
    const double scale = alpha > 0.0 ? 1.0 / std::sqrt(2.0 * alpha) : hi - lo;
    t = sample_log_concave(g, lo, hi, rng, mode, scale, dg);
  } else {
    const Vector x0 = x_;
    auto g = [&](double s) { return target_.log_density(x0 + s * u); };
    t = sample_log_concave(g, lo, hi, rng, std::nullopt, 0.25 * (hi - lo));
  }
  x_ += t * u;
  // Bisection tolerance on the chord can leave the point a hair outside.
  const double n = geom_.norm(x_);
  if (n > geom_.radius()) x_ *= geom_.radius() / n;
  ++steps_;
}

void HitAndRun::run(int steps, Rng& rng) {
  for (int i = 0; i < steps; ++i) step(rng);
}

Vector sample_gamma(const LogLaplace& engine, double eta, double mu, const Vector& y,
                    const InnerLoopConfig& cfg, Rng& rng, const Vector* start) {
  const Vector x0 = start ? *start : Vector::Zero(engine.dim());
  HitAndRun chain(engine.spec().geom, gamma_target(engine, eta, mu, y), x0);
  chain.run(cfg.hr_burn() + cfg.hr_steps(), rng);
  return chain.state();
}

int sample_depth(Rng& rng) {
  // a >= b + 1 iff u < 1/(b+1)!.
  const double u = uniform01(rng);
  int b = 1;
  double fact = 1.0;
  while (u * fact * (b + 1) < 1.0) {
    fact *= b + 1;
    ++b;
  }
  return b;
}

double rejection_estimator(const ProblemInstance& instance, const Vector& x1, const Vector& x2,
                           int depth, Rng& rng) {
  double rho = 1.0;
  for (int b = 1; b <= depth; ++b) {
    double prod = 1.0;
    for (int i = 0; i < b; ++i) {
      const Component f = instance.draw(rng);
      prod *= f(x2) - f(x1);
    }
    rho += prod;
  }
  return rho;
}

Vector inner_loop(const ProblemInstance& instance, const LogLaplace& engine,
                  const InnerLoopConfig& cfg, const Vector& y, Rng& rng, InnerLoopStats* stats,
                  const Vector* start) {
  const Vector x0 = start ? *start : Vector::Zero(engine.dim());
  HitAndRun chain(engine.spec().geom, gamma_target(engine, cfg.eta(), cfg.mu(), y), x0);
  chain.run(cfg.hr_burn(), rng);
  if (stats) ++stats->calls;
  for (int it = 0; it < cfg.max_iterations(); ++it) {
    chain.run(cfg.hr_steps(), rng);
    const Vector x1 = chain.state();
    chain.run(cfg.hr_steps(), rng);
    const Vector x2 = chain.state();
    const double u = uniform01(rng);
    const int depth = sample_depth(rng);
    const double rho = rejection_estimator(instance, x1, x2, depth, rng);
    if (stats) {
      ++stats->loops;
      stats->depth_total += static_cast<std::uint64_t>(depth);
      stats->queries += static_cast<std::uint64_t>(depth) * static_cast<std::uint64_t>(depth + 1);
    }
    if (accept_draw(u, rho)) return x1;
  }
  throw NumericalError("inner loop: no acceptance after " + std::to_string(cfg.max_iterations()) +
                       " attempts (eta precondition likely violated)");
}

}  // namespace llt
