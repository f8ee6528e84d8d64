#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "llt/proximal.hpp"

namespace llt {

enum class DpMode { kErm, kSco };

DpMode parse_dp_mode(const std::string& name);
std::string dp_mode_name(DpMode mode);

/// Inverse temperature k and regularization weight mu.
struct DpParams {
  double k = 0.0;
  double mu = 0.0;
};

/// k = sqrt(d) n eps / (G sqrt(2 Theta ln(1/(2 delta)))), mu = 2 G^2 k ln(1/(2 delta)) / (n eps)^2.
DpParams dp_params_erm(double n, double eps, double delta, double G, double d, double theta);
/// k = sqrt(d ln(1/(2 delta)) / (eps n)^2 + 1/n) min((eps n)^2 / ln(1/(2 delta)), n d) / (G sqrt(Theta)),
/// mu = G^2 k max(ln(1/(2 delta)) / (n eps)^2, 1/(n d)).
DpParams dp_params_sco(double n, double eps, double delta, double G, double d, double theta);

/// Rows s_i of a linear or generalized-linear loss f(x; s) = link(<s, x>).
struct Dataset {
  Matrix rows;
  Link link = Link::kLinear;
  /// Bound on ||s_i||_q checked at ingestion.
  double lipschitz = 1.0;

  std::size_t size() const { return static_cast<std::size_t>(rows.rows()); }
  int dim() const { return static_cast<int>(rows.cols()); }
};

/// Ingestion failure; `rows` lists 1-based data row numbers that broke the bound.
class DatasetError : public ConfigError {
 public:
  DatasetError(const std::string& what, std::vector<std::size_t> rows)
      : ConfigError(what), rows_(std::move(rows)) {}
  const std::vector<std::size_t>& rows() const { return rows_; }

 private:
  std::vector<std::size_t> rows_;
};

/// Comma-separated numeric rows, optional header line. Every row must have the
/// same width and satisfy ||s||_q <= G (q the dual of p); violations are
/// rejected together.
Dataset parse_dataset_csv(std::istream& in, double p, double lipschitz, Link link, bool header);
Dataset load_dataset_csv(const std::string& path, double p, double lipschitz, Link link, bool header);

struct MechanismConfig {
  double epsilon = 1.0;
  double delta_dp = 1e-6;
  DpMode mode = DpMode::kErm;
  /// Theta = theta_constant * min(1/(p-1), ln d) unless theta is given.
  double theta_constant = 4.0;
  std::optional<double> theta;
  double c_eta = 1.0 / 2e4;
  double c_t = 64.0;
  /// Sampler TV budget; defaults to delta_dp.
  std::optional<double> delta_tv;
  /// ln(beta); defaults to k G' * 2 (the rescaled diameter).
  std::optional<double> log_beta;
  int hr_steps = 30;
  int hr_burn = 100;
  int warm_steps = 500;
  std::uint64_t max_rounds = 0;
  bool allow_truncation = false;
};

/// Every derived quantity of one mechanism run, in the rescaled (radius 1) frame.
struct MechanismPlan {
  int d = 0;
  std::size_t n = 0;
  double radius = 1.0;
  double lipschitz = 0.0;         // G on the original domain
  double scaled_lipschitz = 0.0;  // G D
  double p = 2.0;
  double p_effective = 2.0;
  double theta = 0.0;
  DpParams params;
  double eta = 0.0;
  double eta_formula = 0.0;  // before precondition/shrink adjustments
  bool eta_shrunk = false;
  double a = 0.0;
  double log_beta = 0.0;
  double delta_tv = 0.0;
  std::uint64_t rounds = 0;
  std::uint64_t executed_rounds = 0;
  bool truncated = false;
  double delta_inner = 0.0;
  /// (n eps)^2 < d Theta ln(1/delta): no useful accuracy is possible, output is uniform.
  bool uniform_fallback = false;
  double epsilon_effective = 0.0;
  double delta_effective = 0.0;
  /// (1 + (n eps)^2 / ln(1/delta)) ln((1 + n eps) ln(beta/delta)) ln(beta/delta).
  double complexity_expression = 0.0;
};

MechanismPlan plan_mechanism(const Dataset& data, const LpGeometry& geom, const MechanismConfig& cfg);

struct MechanismReport {
  Vector solution;
  MechanismPlan plan;
  std::uint64_t queries = 0;
  double query_constant = 0.0;  // queries / complexity_expression
  double seconds = 0.0;
  bool privacy_guaranteed = false;
};

/// The full mechanism: rescale to radius 1, substitute p, derive (k, mu, eta, a),
/// run the alternating chain on k F with regularizer weight k mu, unscale.
/// `trace` receives each chain state on the original domain.
MechanismReport run_mechanism(const Dataset& data, const LpGeometry& geom, const MechanismConfig& cfg,
                              Rng& rng, const RoundObserver& trace = nullptr);

/// Empirical loss F(x) = mean_i link(<s_i, x>).
double empirical_risk(const Dataset& data, const Vector& x);
/// F(x) - min over the ball, for linear losses.
double excess_empirical_risk(const Dataset& data, const LpGeometry& geom, const Vector& x);

}  // namespace llt
