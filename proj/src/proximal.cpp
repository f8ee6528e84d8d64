#include "llt/proximal.hpp"

#include <chrono>
#include <cmath>

namespace llt {

std::uint64_t mixing_time(double eta, double mu, double beta, double delta, double c_t) {
  if (!(beta >= 1.0)) throw ConfigError("mixing_time: warmness beta must be >= 1");
  return mixing_time_log(eta, mu, std::log(beta), delta, c_t);
}

std::uint64_t mixing_time_log(double eta, double mu, double log_beta, double delta, double c_t) {
  const double em = eta * mu;
  if (!(em > 0.0)) throw ConfigError("mixing_time: eta * mu must be positive");
  if (em > 1.0) throw ConfigError("mixing_time: eta * mu = " + std::to_string(em) + " exceeds 1");
  if (!(log_beta >= 0.0) || !std::isfinite(log_beta)) throw ConfigError("mixing_time: warmness beta must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("mixing_time: delta must lie in (0, 1)");
  if (!(c_t > 0.0)) throw ConfigError("mixing_time: C_T must be positive");
  const double t = std::ceil(c_t * (log_beta - std::log(delta)) / em);
  if (!(t < 1.8e19)) throw ConfigError("mixing_time: round count overflows");
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::max(t, 0.0)));
}

ChainPlan plan_chain(const ProblemInstance& instance, const SamplerConfig& cfg) {
  ChainPlan plan;
  plan.log_beta = cfg.log_beta ? *cfg.log_beta : instance.lipschitz() * instance.geom().diameter();
  plan.rounds = cfg.rounds ? std::max<std::uint64_t>(1, *cfg.rounds)
                           : mixing_time_log(cfg.eta, cfg.mu, plan.log_beta, cfg.delta, cfg.c_t);
  if (cfg.eta * cfg.mu > 1.0) throw ConfigError("sampler: eta * mu exceeds 1");
  plan.delta_inner = cfg.delta / (2.0 * static_cast<double>(plan.rounds));
  plan.executed = plan.rounds;
  if (cfg.max_rounds > 0 && plan.rounds > cfg.max_rounds) {
    if (!cfg.allow_truncation) {
      throw ConfigError("sampler: T = " + std::to_string(plan.rounds) + " exceeds max_rounds = " +
                        std::to_string(cfg.max_rounds));
    }
    plan.executed = cfg.max_rounds;
    plan.truncated = true;
  }
  return plan;
}

Vector warm_start(const LogLaplace& engine, double eta, double mu, const SamplerConfig& cfg, Rng& rng) {
  HitAndRun chain(engine.spec().geom, nu_target(engine, eta * mu), Vector::Zero(engine.dim()));
  chain.run(std::max(1, cfg.warm_steps), rng);
  return chain.state();
}

ChainResult alternate_sample(const ProblemInstance& instance, const LogLaplace& engine,
                             const SamplerConfig& cfg, Rng& rng, const std::optional<Vector>& x0,
                             const RoundObserver& observer) {
  const auto t0 = std::chrono::steady_clock::now();
  if (instance.geom().dim() != engine.dim()) throw ConfigError("sampler: instance and regularizer dimensions differ");
  ChainResult res;
  res.plan = plan_chain(instance, cfg);
  const InnerLoopConfig inner(instance.lipschitz(), res.plan.delta_inner, cfg.eta, cfg.mu, cfg.hr_steps,
                              cfg.hr_burn, cfg.max_inner_iterations);
  Vector x = x0 ? *x0 : warm_start(engine, cfg.eta, cfg.mu, cfg, rng);
  if (!engine.spec().geom.contains(x)) throw ConfigError("sampler: start point lies outside the ball");
  const std::uint64_t q0 = instance.query_count();
  for (std::uint64_t k = 1; k <= res.plan.executed; ++k) {
    try {
      const Vector y = engine.sample_dual(x, rng);
      x = inner_loop(instance, engine, inner, y, rng, &res.inner, &x);
    } catch (const NumericalError& e) {
      throw NumericalError("round " + std::to_string(k) + ": " + e.what());
    }
    if (observer) observer(k, x);
  }
  res.x = x;
  res.queries = instance.query_count() - q0;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace llt
