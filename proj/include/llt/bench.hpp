#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "llt/conditional.hpp"

namespace llt {

/// Gaussian linear-loss family f(x; s) = <s, x>, s ~ N(kappa v, sigma^2 I), with
/// v in {-1, +1}^d. Built for a query budget k:
///   sigma = G d^{-1/q} / sqrt(d/k + 4 ln d),  kappa = sigma sqrt(d) / (2 sqrt(k)).
/// The truncated variant emits s = 0 whenever ||s||_q >= G.
struct HardInstance {
  int d = 0;
  double lipschitz = 0.0;
  double p = 2.0;
  double q = 2.0;
  double k_budget = 1.0;
  Vector v;
  double kappa = 0.0;
  double sigma = 0.0;
  bool truncated = false;

  Vector mean() const { return kappa * v; }
  Vector draw_s(Rng& rng) const;
};

HardInstance make_hard_instance(int d, double G, double p, double k_budget, Rng& rng, bool truncated = false);

/// Streaming problem over the l_p ball of the given radius; objective uses
/// E s = kappa v (exact for the untruncated law).
class HardProblem : public ProblemInstance {
 public:
  HardProblem(const HardInstance& hard, double radius);
  double objective(const Vector& x) const override;
  const HardInstance& hard() const { return hard_; }

 protected:
  ComponentFn draw_fn(Rng& rng) const override;

 private:
  HardInstance hard_;
};

/// G D max(1 - 1/p, 1/ln d) min(1, sqrt(d/(k ln d))) with the constant set to 1;
/// a reference curve. Needs d >= 2.
double risk_lower_bound(double G, double D, double p, int d, double k_budget);

/// Excess population risk <m, x> + D ||m||_q of a point on the radius-D ball.
double hard_excess_risk(const HardInstance& hard, double radius, const Vector& x);

/// Spends k sample queries: averages s and returns the ball minimizer of the
/// averaged linear loss.
Vector query_baseline(const HardInstance& hard, double radius, double k_budget, Rng& rng);

struct BenchRow {
  int d = 0;
  double k = 0.0;
  double lower_bound = 0.0;
  double mean_risk = 0.0;
  double risk_se = 0.0;
  int reps = 0;
  double seconds = 0.0;
};

/// Risk-versus-budget sweep: for each k, fresh hard instances built for that
/// budget, the k-query baseline's excess risk averaged over reps.
std::vector<BenchRow> bench_risk_vs_k(int d, double G, double D, double p, const std::vector<double>& ks,
                                      int reps, std::uint64_t seed);

/// Brute-force normalization of a log-density on a 1-D or 2-D box. Cell
/// masses integrate exp(log_density) with a sub x sub midpoint rule per cell.
class GridOracle {
 public:
  GridOracle(std::vector<double> lo, std::vector<double> hi, std::vector<int> bins,
             const std::function<double(const Vector&)>& log_density, int sub = 4);

  int dim() const { return static_cast<int>(lo_.size()); }
  std::size_t cells() const { return probs_.size(); }
  const std::vector<double>& probabilities() const { return probs_; }
  /// Flat cell index, or -1 outside the box.
  long long cell_of(const Vector& x) const;
  /// Cell by inverse CDF, then uniform inside it.
  Vector sample(Rng& rng) const;
  Vector cell_center(std::size_t cell) const;

 private:
  std::vector<double> lo_, hi_;
  std::vector<int> bins_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

/// (1/2) sum over cells of |empirical - oracle|, with points outside the box
/// counted in a sentinel cell of oracle mass 0. Rows of `samples` are points.
double grid_tv(const Matrix& samples, const GridOracle& oracle);

}  // namespace llt
