#include "llt/dp.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace llt {

DpMode parse_dp_mode(const std::string& name) {
  if (name == "erm") return DpMode::kErm;
  if (name == "sco") return DpMode::kSco;
  throw ConfigError("unknown mode '" + name + "' (expected erm or sco)");
}

std::string dp_mode_name(DpMode mode) { return mode == DpMode::kErm ? "erm" : "sco"; }

namespace {

void check_dp_inputs(double n, double eps, double delta, double G, double d, double theta) {
  if (!(n > 0.0) || !(G > 0.0) || !(d > 0.0) || !(theta > 0.0)) {
    throw std::domain_error("dp parameters: n, G, d and Theta must be positive");
  }
  if (!(eps > 0.0 && eps <= 1.0)) throw std::domain_error("dp parameters: epsilon must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 0.5)) {
    throw std::domain_error("dp parameters: delta must lie in (0, 1/2) so that ln(1/(2 delta)) > 0");
  }
}

}  // namespace

DpParams dp_params_erm(double n, double eps, double delta, double G, double d, double theta) {
  check_dp_inputs(n, eps, delta, G, d, theta);
  const double l = std::log(1.0 / (2.0 * delta));
  DpParams out;
  out.k = std::sqrt(d) * n * eps / (G * std::sqrt(2.0 * theta * l));
  out.mu = 2.0 * G * G * out.k * l / (n * n * eps * eps);
  return out;
}

DpParams dp_params_sco(double n, double eps, double delta, double G, double d, double theta) {
  check_dp_inputs(n, eps, delta, G, d, theta);
  const double l = std::log(1.0 / (2.0 * delta));
  const double ne2 = n * n * eps * eps;
  DpParams out;
  out.k = std::sqrt(d * l / ne2 + 1.0 / n) * std::min(ne2 / l, n * d) / (G * std::sqrt(theta));
  out.mu = G * G * out.k * std::max(l / ne2, 1.0 / (n * d));
  return out;
}

Dataset parse_dataset_csv(std::istream& in, double p, double lipschitz, Link link, bool header) {
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) throw ConfigError("dataset: G must be positive");
  const double q = dual_exponent(p);
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> bad_norm;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const char* begin = cell.c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      const bool ok = end != begin && std::string(end).find_first_not_of(" \t") == std::string::npos;
      if (!ok || !std::isfinite(v)) {
        throw DatasetError("dataset: line " + std::to_string(line_no) + ": cannot parse '" + cell + "'",
                           {rows.size() + 1});
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DatasetError("dataset: line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                             " columns, expected " + std::to_string(rows.front().size()),
                         {rows.size() + 1});
    }
    rows.push_back(std::move(row));
    const Vector s = Eigen::Map<const Vector>(rows.back().data(), static_cast<Eigen::Index>(rows.back().size()));
    if (lp_norm(s, q) > lipschitz * (1.0 + 1e-12)) bad_norm.push_back(rows.size());
  }
  if (rows.empty()) throw DatasetError("dataset: no rows", {});
  if (!bad_norm.empty()) {
    std::string list;
    for (std::size_t i = 0; i < bad_norm.size() && i < 20; ++i) list += (i ? ", " : "") + std::to_string(bad_norm[i]);
    if (bad_norm.size() > 20) list += ", ...";
    throw DatasetError("dataset: " + std::to_string(bad_norm.size()) + " row(s) exceed ||s||_q <= G: rows " + list,
                       bad_norm);
  }
  Dataset data;
  data.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      data.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  data.link = link;
  data.lipschitz = lipschitz;
  return data;
}

Dataset load_dataset_csv(const std::string& path, double p, double lipschitz, Link link, bool header) {
  std::ifstream in(path);
  if (!in) throw ConfigError("dataset: cannot open '" + path + "'");
  return parse_dataset_csv(in, p, lipschitz, link, header);
}

namespace {

// k f(D x; s) on the unit ball.
class ScaledGlmInstance : public ProblemInstance {
 public:
  ScaledGlmInstance(LpGeometry unit, Matrix rows, Link link, double factor, double lipschitz)
      : ProblemInstance(std::move(unit), lipschitz), rows_(std::move(rows)), link_(link), factor_(factor) {}

  std::optional<std::size_t> n_components() const override { return static_cast<std::size_t>(rows_.rows()); }

  double objective(const Vector& x) const override {
    const Vector t = rows_ * x;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < t.size(); ++i) sum += apply_link(link_, t[i]);
    return factor_ * sum / static_cast<double>(t.size());
  }

 protected:
  ComponentFn draw_fn(Rng& rng) const override {
    const auto i = static_cast<Eigen::Index>(
        std::uniform_int_distribution<std::size_t>(0, static_cast<std::size_t>(rows_.rows()) - 1)(rng));
    return [this, i](const Vector& x) { return factor_ * apply_link(link_, rows_.row(i).dot(x)); };
  }

 private:
  Matrix rows_;
  Link link_;
  double factor_;
};

}  // namespace

MechanismPlan plan_mechanism(const Dataset& data, const LpGeometry& geom, const MechanismConfig& cfg) {
  if (data.size() == 0) throw ConfigError("mechanism: empty dataset");
  if (data.dim() != geom.dim()) throw ConfigError("mechanism: dataset width does not match d");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0)) throw ConfigError("mechanism: epsilon must lie in (0, 1]");
  if (!(cfg.delta_dp > 0.0 && cfg.delta_dp < 0.5)) throw ConfigError("mechanism: delta must lie in (0, 1/2)");
  if (!(cfg.c_eta > 0.0) || !(cfg.theta_constant > 0.0)) throw ConfigError("mechanism: constants must be positive");

  MechanismPlan plan;
  plan.d = geom.dim();
  plan.n = data.size();
  plan.radius = geom.radius();
  plan.lipschitz = data.lipschitz;
  plan.scaled_lipschitz = data.lipschitz * geom.radius();
  plan.p = geom.p();
  const double d = plan.d;
  const double log_d = std::log(d);
  const double threshold = 1.0 + 1.0 / log_d;  // +inf at d = 1
  plan.p_effective = plan.p <= threshold ? std::min(2.0, threshold) : plan.p;
  if (cfg.theta) {
    plan.theta = *cfg.theta;
  } else {
    const double inv = 1.0 / (plan.p_effective - 1.0);
    plan.theta = cfg.theta_constant * (plan.d > 1 ? std::min(inv, log_d) : inv);
  }
  if (!(plan.theta > 0.0)) throw ConfigError("mechanism: Theta must be positive");

  const double n = static_cast<double>(plan.n);
  const double eps = cfg.epsilon;
  const double G = plan.scaled_lipschitz;
  plan.params = cfg.mode == DpMode::kErm ? dp_params_erm(n, eps, cfg.delta_dp, G, d, plan.theta)
                                         : dp_params_sco(n, eps, cfg.delta_dp, G, d, plan.theta);
  plan.delta_tv = cfg.delta_tv ? *cfg.delta_tv : cfg.delta_dp;
  if (!(plan.delta_tv > 0.0 && plan.delta_tv < 1.0)) throw ConfigError("mechanism: delta_tv must lie in (0, 1)");
  plan.epsilon_effective = eps;
  plan.delta_effective = cfg.delta_dp + plan.delta_tv;

  const double k = plan.params.k;
  const double gk = k * G;
  const double kmu = k * plan.params.mu;
  plan.log_beta = cfg.log_beta ? *cfg.log_beta : gk * 2.0;
  const double log_beta_delta = plan.log_beta - std::log(plan.delta_tv);
  plan.complexity_expression = (1.0 + n * n * eps * eps / std::log(1.0 / cfg.delta_dp)) *
                               std::max(1.0, std::log((1.0 + n * eps) * log_beta_delta)) * log_beta_delta;

  plan.uniform_fallback = (n * eps) * (n * eps) < d * plan.theta * std::log(1.0 / cfg.delta_dp);
  if (plan.uniform_fallback) return plan;

  plan.eta_formula = cfg.c_eta / (gk * gk * std::max(1.0, std::log((1.0 + n * eps) * log_beta_delta)));
  double eta = plan.eta_formula;
  if (eta * kmu > 1.0) {
    eta = 1.0 / kmu;
    plan.eta_shrunk = true;
  }
  // The rejection loop needs 1/eta >= 1e4 (kG)^2 ln(2T/delta) with T itself ~ 1/eta.
  for (int it = 0; it < 100; ++it) {
    const std::uint64_t t = mixing_time_log(eta, kmu, plan.log_beta, plan.delta_tv, cfg.c_t);
    const double delta_inner = plan.delta_tv / (2.0 * static_cast<double>(t));
    const double cap = InnerLoopConfig::max_eta(gk, delta_inner);
    plan.rounds = t;
    plan.delta_inner = delta_inner;
    if (eta <= cap) break;
    eta = cap * (1.0 - 1e-12);
    plan.eta_shrunk = true;
  }
  plan.eta = eta;
  plan.a = eta * (plan.p_effective - 1.0) / 2.0;
  plan.executed_rounds = plan.rounds;
  if (cfg.max_rounds > 0 && plan.rounds > cfg.max_rounds) {
    if (!cfg.allow_truncation) {
      throw ConfigError("mechanism: T = " + std::to_string(plan.rounds) + " rounds exceeds max_rounds = " +
                        std::to_string(cfg.max_rounds) + " (set allow_truncation for a non-private smoke run)");
    }
    plan.executed_rounds = cfg.max_rounds;
    plan.truncated = true;
  }
  return plan;
}

MechanismReport run_mechanism(const Dataset& data, const LpGeometry& geom, const MechanismConfig& cfg, Rng& rng,
                              const RoundObserver& trace) {
  const auto t0 = std::chrono::steady_clock::now();
  MechanismReport report;
  report.plan = plan_mechanism(data, geom, cfg);
  const auto& plan = report.plan;
  if (plan.uniform_fallback) {
    report.solution = uniform_in_ball(geom, rng);
    report.privacy_guaranteed = true;
  } else {
    const LpGeometry unit = geom.with_radius(1.0);
    const Matrix scaled_rows = data.rows * geom.radius();
    const double k = plan.params.k;
    ScaledGlmInstance instance(unit, scaled_rows, data.link, k, k * plan.scaled_lipschitz);
    LLTSpec spec{unit, plan.a};
    spec.regularizer_p = plan.p_effective;
    const LogLaplace engine(spec);

    SamplerConfig sc;
    sc.eta = plan.eta;
    sc.mu = k * plan.params.mu;
    sc.delta = plan.delta_tv;
    sc.log_beta = plan.log_beta;
    sc.c_t = cfg.c_t;
    sc.rounds = plan.rounds;
    sc.hr_steps = cfg.hr_steps;
    sc.hr_burn = cfg.hr_burn;
    sc.warm_steps = cfg.warm_steps;
    sc.max_rounds = cfg.max_rounds;
    sc.allow_truncation = cfg.allow_truncation;
    RoundObserver unscaled;
    if (trace) {
      const double r = geom.radius();
      unscaled = [&trace, r](std::uint64_t round, const Vector& x) { trace(round, x * r); };
    }
    const ChainResult res = alternate_sample(instance, engine, sc, rng, std::nullopt, unscaled);
    report.solution = res.x * geom.radius();
    report.queries = res.queries;
    report.privacy_guaranteed = !res.plan.truncated;
  }
  report.query_constant =
      plan.complexity_expression > 0.0 ? static_cast<double>(report.queries) / plan.complexity_expression : 0.0;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

double empirical_risk(const Dataset& data, const Vector& x) {
  const Vector t = data.rows * x;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) sum += apply_link(data.link, t[i]);
  return sum / static_cast<double>(t.size());
}

double excess_empirical_risk(const Dataset& data, const LpGeometry& geom, const Vector& x) {
  if (data.link != Link::kLinear) throw ConfigError("excess_empirical_risk: exact minimum needs linear losses");
  const Vector mean = data.rows.colwise().mean().transpose();
  return empirical_risk(data, x) + geom.radius() * lp_norm(mean, geom.q());
}

}  // namespace llt
