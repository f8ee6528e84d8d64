#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "llt/llt.hpp"

namespace llt {

using ComponentFn = std::function<double(const Vector&)>;

class ProblemInstance;

/// One drawn component f_i. Every call is a value query and is counted.
class Component {
 public:
  Component(const ProblemInstance* owner, ComponentFn fn) : owner_(owner), fn_(std::move(fn)) {}
  double operator()(const Vector& x) const;

 private:
  const ProblemInstance* owner_;
  ComponentFn fn_;
};

/// Stochastic objective F = E_i f_i over an l_p ball, with an exact F for
/// oracles and an atomic tally of component value queries.
class ProblemInstance {
 public:
  ProblemInstance(LpGeometry geom, double lipschitz);
  virtual ~ProblemInstance() = default;
  ProblemInstance(const ProblemInstance&) = delete;
  ProblemInstance& operator=(const ProblemInstance&) = delete;

  const LpGeometry& geom() const { return geom_; }
  double lipschitz() const { return lipschitz_; }
  virtual std::optional<std::size_t> n_components() const { return std::nullopt; }

  /// Draws i ~ I.
  Component draw(Rng& rng) const { return Component(this, draw_fn(rng)); }
  /// F(x) computed exactly; does not count as a query.
  virtual double objective(const Vector& x) const = 0;

  std::uint64_t query_count() const { return queries_.load(std::memory_order_relaxed); }
  void reset_queries() const { queries_.store(0, std::memory_order_relaxed); }

 protected:
  virtual ComponentFn draw_fn(Rng& rng) const = 0;

 private:
  friend class Component;
  void count_query() const { queries_.fetch_add(1, std::memory_order_relaxed); }

  LpGeometry geom_;
  double lipschitz_;
  mutable std::atomic<std::uint64_t> queries_{0};
};

/// 1-Lipschitz scalar links for generalized-linear losses f(x; s) = link(<s, x>).
enum class Link { kLinear, kAbs, kLogistic, kHinge };

Link parse_link(const std::string& name);
std::string link_name(Link link);
double apply_link(Link link, double t);

/// Finite sum with uniform index law: f_i(x) = link(<s_i, x>), s_i the rows of
/// `rows`. G defaults to max_i ||s_i||_q; a supplied G must dominate it.
class GlmInstance : public ProblemInstance {
 public:
  GlmInstance(LpGeometry geom, Matrix rows, Link link = Link::kLinear,
              std::optional<double> lipschitz = std::nullopt);

  std::optional<std::size_t> n_components() const override {
    return static_cast<std::size_t>(rows_.rows());
  }
  double objective(const Vector& x) const override;
  const Matrix& rows() const { return rows_; }
  Link link() const { return link_; }

 protected:
  ComponentFn draw_fn(Rng& rng) const override;

 private:
  Matrix rows_;
  Link link_;
};

/// Finite family of arbitrary components, uniform index law. The caller vouches
/// for the Lipschitz bound.
class FunctionInstance : public ProblemInstance {
 public:
  FunctionInstance(LpGeometry geom, double lipschitz, std::vector<ComponentFn> fns);
  std::optional<std::size_t> n_components() const override { return fns_.size(); }
  double objective(const Vector& x) const override;

 protected:
  ComponentFn draw_fn(Rng& rng) const override;

 private:
  std::vector<ComponentFn> fns_;
};

/// F identically zero (a single constant component).
std::unique_ptr<ProblemInstance> make_zero_instance(const LpGeometry& geom);

/// Controls for one call of the stochastic rejection loop.
///
/// Construction enforces 1/eta >= 1e4 G^2 ln(1/delta_inner).
class InnerLoopConfig {
 public:
  InnerLoopConfig(double lipschitz, double delta_inner, double eta, double mu,
                  int hr_steps = 30, int hr_burn = 100, int max_iterations = 1000);

  double lipschitz() const { return lipschitz_; }
  double delta_inner() const { return delta_inner_; }
  double eta() const { return eta_; }
  double mu() const { return mu_; }
  int hr_steps() const { return hr_steps_; }
  int hr_burn() const { return hr_burn_; }
  int max_iterations() const { return max_iterations_; }
  /// ceil(10 ln(1/delta)); reported only, the loop never uses it.
  int analysis_horizon() const;

  /// Largest eta allowed for the given G and delta.
  static double max_eta(double lipschitz, double delta_inner);

 private:
  double lipschitz_;
  double delta_inner_;
  double eta_;
  double mu_;
  int hr_steps_;
  int hr_burn_;
  int max_iterations_;
};

/// Log-concave target on the ball for hit-and-run. When `alpha` is set the
/// log-density is exactly -alpha ||x||_2^2 + <b, x> + const, which lets each
/// chord be sampled without searching for the mode.
struct ChainTarget {
  std::function<double(const Vector&)> log_density;
  std::optional<double> alpha;
  Vector b;
};

/// gamma_y: -(1 + eta mu) psi(x) + <x, y>.
double gamma_logdensity(const LogLaplace& engine, double eta, double mu, const Vector& y,
                        const Vector& x);
ChainTarget gamma_target(const LogLaplace& engine, double eta, double mu, const Vector& y);
/// nu: -eta mu psi(x).
ChainTarget nu_target(const LogLaplace& engine, double eta_mu);

/// Hit-and-run over an l_p ball: uniform direction, chord by the geometry, and
/// an exact draw from the target restricted to the chord.
class HitAndRun {
 public:
  HitAndRun(const LpGeometry& geom, ChainTarget target, Vector start);
  void step(Rng& rng);
  void run(int steps, Rng& rng);
  const Vector& state() const { return x_; }
  std::uint64_t steps_taken() const { return steps_; }

 private:
  LpGeometry geom_;
  ChainTarget target_;
  Vector x_;
  std::uint64_t steps_ = 0;
};

/// Approximate draw from gamma_y: hr_burn + hr_steps hit-and-run moves from
/// `start` (the origin if absent).
Vector sample_gamma(const LogLaplace& engine, double eta, double mu, const Vector& y,
                    const InnerLoopConfig& cfg, Rng& rng, const Vector* start = nullptr);

/// a >= 1 with Pr[a >= b] = 1/b!.
int sample_depth(Rng& rng);

/// Acceptance test of the rejection loop: u <= rho / 2.
inline bool accept_draw(double u, double rho) { return u <= 0.5 * rho; }
/// med(0, rho, 2); accepting on this is the same event for u in [0, 1].
inline double clip_rho(double rho) { return std::clamp(rho, 0.0, 2.0); }

/// rho = 1 + sum_{b=1}^{a} prod_{i=1}^{b} (f_{j_{i,b}}(x2) - f_{j_{i,b}}(x1)) with
/// fresh components for every (i, b).
double rejection_estimator(const ProblemInstance& instance, const Vector& x1, const Vector& x2,
                           int depth, Rng& rng);

struct InnerLoopStats {
  std::uint64_t calls = 0;
  std::uint64_t loops = 0;
  std::uint64_t queries = 0;
  std::uint64_t depth_total = 0;
};

/// Draws from pi_y proportional to exp(-F(x) - (1 + eta mu) psi(x) + <x, y>) on
/// the ball by stochastic rejection from gamma_y. `start` seeds the hit-and-run
/// chain. Throws NumericalError after max_iterations rejected attempts.
Vector inner_loop(const ProblemInstance& instance, const LogLaplace& engine,
                  const InnerLoopConfig& cfg, const Vector& y, Rng& rng,
                  InnerLoopStats* stats = nullptr, const Vector* start = nullptr);

}  // namespace llt
