#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "llt/conditional.hpp"

namespace llt {

/// ceil(C_T ln(beta/delta) / (eta mu)), at least 1. Requires eta mu in (0, 1].
std::uint64_t mixing_time(double eta, double mu, double beta, double delta, double c_t = 64.0);
/// Same with ln(beta) given directly (beta itself may overflow).
std::uint64_t mixing_time_log(double eta, double mu, double log_beta, double delta, double c_t = 64.0);

/// Controls of the alternating chain targeting pi proportional to
/// exp(-F(x) - eta mu psi(x)) on the ball.
struct SamplerConfig {
  double eta = 0.0;
  double mu = 0.0;
  double delta = 0.1;
  /// Warmness of the start as ln(beta); defaults to G * diameter.
  std::optional<double> log_beta;
  double c_t = 64.0;
  /// Overrides the derived round count.
  std::optional<std::uint64_t> rounds;
  std::uint64_t seed = 0;
  int hr_steps = 30;
  int hr_burn = 100;
  int warm_steps = 500;
  int max_inner_iterations = 1000;
  /// Cap on executed rounds (0 = none). Exceeding it is an error unless
  /// allow_truncation is set, in which case the run stops early and says so.
  std::uint64_t max_rounds = 0;
  bool allow_truncation = false;
};

/// Resolved quantities for a run.
struct ChainPlan {
  double log_beta = 0.0;
  std::uint64_t rounds = 0;        // T
  std::uint64_t executed = 0;      // min(T, max_rounds)
  double delta_inner = 0.0;        // delta / (2T)
  bool truncated = false;
};

ChainPlan plan_chain(const ProblemInstance& instance, const SamplerConfig& cfg);

struct ChainResult {
  Vector x;
  ChainPlan plan;
  std::uint64_t queries = 0;
  InnerLoopStats inner;
  double seconds = 0.0;
};

/// Called after each round with (round index starting at 1, x_k).
using RoundObserver = std::function<void(std::uint64_t, const Vector&)>;

/// Approximate draw from nu proportional to exp(-eta mu psi) on the ball by
/// hit-and-run (warm_steps moves from the origin). Never queries F.
Vector warm_start(const LogLaplace& engine, double eta, double mu, const SamplerConfig& cfg, Rng& rng);

/// Alternating chain: y_k ~ pi_{x_{k-1}} exactly, then x_k from the rejection
/// loop with inner budget delta/(2T). x0 defaults to warm_start.
ChainResult alternate_sample(const ProblemInstance& instance, const LogLaplace& engine,
                             const SamplerConfig& cfg, Rng& rng,
                             const std::optional<Vector>& x0 = std::nullopt,
                             const RoundObserver& observer = nullptr);

}  // namespace llt
