// llt: sampling runs, DP mechanisms, diagnostics and hard-instance benchmarks.
//
// Exit codes: 0 success, 1 failed diagnostics or internal error, 2 bad
// configuration or input, 3 numerical failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "llt/bench.hpp"
#include "llt/diagnostics.hpp"
#include "llt/dp.hpp"

#ifndef LLT_BUILD_ID
#define LLT_BUILD_ID "unknown"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace llt;

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string output_dir() {
  const char* env = std::getenv("LLT_OUTPUT_DIR");
  return env && *env ? std::string(env) : std::string(".");
}

std::string default_path(const std::string& name) { return (fs::path(output_dir()) / name).string(); }

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::ofstream open_out(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  return out;
}

// Every option of the subcommand with the value it resolved to (flag, config
// file or default). Replaying these as --name=value reruns the same command.
json resolved_options(const CLI::App* sub) {
  json out = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      std::string v;
      for (const auto& r : opt->reduced_results()) v += (v.empty() ? "" : ",") + r;
      out[name] = v;
    } else if (!opt->get_default_str().empty()) {
      out[name] = opt->get_default_str();
    }
  }
  return out;
}

void write_manifest(const std::string& path, const CLI::App* sub, std::uint64_t seed, const json& inputs,
                    const json& outputs, const std::string& started, double seconds, const json& extra) {
  json m;
  m["subcommand"] = sub->get_name();
  m["config"] = resolved_options(sub);
  m["seed"] = seed;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["build"] = LLT_BUILD_ID;
  m["started_utc"] = started;
  m["wall_seconds"] = seconds;
  if (!extra.is_null()) m["run"] = extra;
  open_out(path) << m.dump(2) << "\n";
}

void write_matrix_csv(std::ostream& out, const std::vector<Vector>& rows) {
  for (const auto& r : rows) {
    for (Eigen::Index i = 0; i < r.size(); ++i) out << (i ? "," : "") << fmt17(r[i]);
    out << "\n";
  }
}

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json plan_json(const MechanismPlan& p) {
  return json{{"d", p.d},
              {"n", p.n},
              {"radius", p.radius},
              {"lipschitz", p.lipschitz},
              {"scaled_lipschitz", p.scaled_lipschitz},
              {"p", p.p},
              {"p_effective", p.p_effective},
              {"theta", p.theta},
              {"k", p.params.k},
              {"mu", p.params.mu},
              {"eta", p.eta},
              {"eta_formula", p.eta_formula},
              {"eta_shrunk", p.eta_shrunk},
              {"a", p.a},
              {"log_beta", p.log_beta},
              {"delta_tv", p.delta_tv},
              {"T", p.rounds},
              {"executed_rounds", p.executed_rounds},
              {"truncated", p.truncated},
              {"delta_inner", p.delta_inner},
              {"uniform_fallback", p.uniform_fallback},
              {"epsilon_effective", p.epsilon_effective},
              {"delta_effective", p.delta_effective},
              {"complexity_expression", p.complexity_expression}};
}

json diag_json(const DiagnosticsReport& r) {
  json checks = json::array();
  for (const auto& e : r.entries) {
    checks.push_back({{"check_name", e.name},
                      {"status", e.passed ? "pass" : "fail"},
                      {"measured", e.measured},
                      {"expected", e.expected},
                      {"tolerance", e.tolerance},
                      {"samples", e.samples},
                      {"seconds", e.seconds},
                      {"detail", e.detail}});
  }
  return json{{"seed", r.seed}, {"passed", r.all_passed()}, {"checks", checks}};
}

struct SampleOpts {
  int d = 2;
  double p = 2.0;
  double radius = 1.0;
  std::string objective = "zero";
  int components = 5;
  double lipschitz = 1.0;
  std::string data;
  bool header = false;
  std::string link = "linear";
  double eta = 0.5;
  double mu = 1.0;
  std::optional<double> a;
  double delta = 0.1;
  std::optional<std::uint64_t> rounds;
  std::optional<double> log_beta;
  double c_t = 64.0;
  std::size_t n_samples = 1000;
  std::uint64_t thin = 1;
  int hr_steps = 30;
  int hr_burn = 100;
  int warm_steps = 500;
  std::uint64_t max_rounds = 10000000;
  bool allow_truncation = false;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_sample(const SampleOpts& o, const CLI::App* sub) {
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  const LpGeometry geom(o.d, o.p, o.radius);
  std::unique_ptr<ProblemInstance> instance;
  json inputs = json::object();
  if (o.objective == "zero") {
    instance = make_zero_instance(geom);
  } else if (o.objective == "linear") {
    if (o.components < 1) throw ConfigError("--components must be >= 1");
    Rng rows_rng(split_seed(o.seed, 1));
    Matrix rows(o.components, o.d);
    for (int i = 0; i < o.components; ++i) {
      Vector g(o.d);
      for (int j = 0; j < o.d; ++j) g[j] = standard_normal(rows_rng);
      rows.row(i) = (o.lipschitz * g / geom.dual_norm(g)).transpose();
    }
    instance = std::make_unique<GlmInstance>(geom, rows, Link::kLinear, o.lipschitz);
  } else if (o.objective == "dataset") {
    if (o.data.empty()) throw ConfigError("objective 'dataset' needs --data");
    Dataset ds = load_dataset_csv(o.data, o.p, o.lipschitz, parse_link(o.link), o.header);
    if (ds.dim() != o.d) throw ConfigError("dataset has " + std::to_string(ds.dim()) + " columns but --d is " +
                                           std::to_string(o.d));
    instance = std::make_unique<GlmInstance>(geom, ds.rows, ds.link, o.lipschitz);
    inputs["data"] = o.data;
  } else {
    throw ConfigError("unknown objective: " + o.objective + " (zero, linear, dataset)");
  }
  if (o.n_samples < 1 || o.thin < 1) throw ConfigError("--n-samples and --thin must be >= 1");

  LLTSpec spec{geom, o.a ? *o.a : o.eta * (geom.effective_p() - 1.0) / 2.0};
  const LogLaplace engine(spec);
  SamplerConfig cfg;
  cfg.eta = o.eta;
  cfg.mu = o.mu;
  cfg.delta = o.delta;
  cfg.log_beta = o.log_beta;
  cfg.c_t = o.c_t;
  cfg.hr_steps = o.hr_steps;
  cfg.hr_burn = o.hr_burn;
  cfg.warm_steps = o.warm_steps;
  cfg.max_rounds = o.max_rounds;
  cfg.allow_truncation = o.allow_truncation;
  cfg.rounds = o.rounds;
  const std::uint64_t burn = plan_chain(*instance, cfg).rounds;
  cfg.rounds = burn + o.n_samples * o.thin;

  std::vector<Vector> kept;
  kept.reserve(o.n_samples);
  Rng rng(split_seed(o.seed, 0));
  const ChainResult res = alternate_sample(*instance, engine, cfg, rng, std::nullopt,
                                           [&](std::uint64_t k, const Vector& x) {
                                             if (k > burn && (k - burn) % o.thin == 0) kept.push_back(x);
                                           });

  const std::string out = o.out.empty() ? default_path("samples.csv") : o.out;
  {
    auto f = open_out(out);
    write_matrix_csv(f, kept);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const json run{{"burn_rounds", burn},
                 {"total_rounds", res.plan.rounds},
                 {"executed_rounds", res.plan.executed},
                 {"truncated", res.plan.truncated},
                 {"delta_inner", res.plan.delta_inner},
                 {"a", spec.a},
                 {"queries", res.queries},
                 {"rows", kept.size()}};
  write_manifest(out + ".manifest.json", sub, o.seed, inputs, json{{"samples", out}}, started, secs, run);
  std::cerr << "wrote " << kept.size() << " samples to " << out << (res.plan.truncated ? " (truncated run)" : "")
            << "\n";
  return 0;
}

struct DpOpts {
  std::string data;
  bool header = false;
  std::string link = "linear";
  double p = 2.0;
  double radius = 1.0;
  double lipschitz = 1.0;
  double epsilon = 1.0;
  double delta = 1e-6;
  std::string mode = "erm";
  double theta_constant = 4.0;
  std::optional<double> theta;
  double c_eta = 5e-05;
  double c_t = 64.0;
  std::optional<double> delta_tv;
  std::optional<double> log_beta;
  int hr_steps = 30;
  int hr_burn = 100;
  int warm_steps = 500;
  std::uint64_t max_rounds = 10000000;
  bool allow_truncation = false;
  bool plan_only = false;
  std::string trace;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_dp(const DpOpts& o, const CLI::App* sub) {
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  if (o.data.empty()) throw ConfigError("dp needs --data");
  const Dataset ds = load_dataset_csv(o.data, o.p, o.lipschitz, parse_link(o.link), o.header);
  const LpGeometry geom(ds.dim(), o.p, o.radius);
  MechanismConfig cfg;
  cfg.epsilon = o.epsilon;
  cfg.delta_dp = o.delta;
  cfg.mode = parse_dp_mode(o.mode);
  cfg.theta_constant = o.theta_constant;
  cfg.theta = o.theta;
  cfg.c_eta = o.c_eta;
  cfg.c_t = o.c_t;
  cfg.delta_tv = o.delta_tv;
  cfg.log_beta = o.log_beta;
  cfg.hr_steps = o.hr_steps;
  cfg.hr_burn = o.hr_burn;
  cfg.warm_steps = o.warm_steps;
  cfg.max_rounds = o.max_rounds;
  cfg.allow_truncation = o.allow_truncation;

  const std::string out = o.out.empty() ? default_path("dp_report.json") : o.out;
  MechanismConfig uncapped = cfg;
  uncapped.max_rounds = 0;
  const MechanismPlan plan = plan_mechanism(ds, geom, uncapped);
  json report{{"mode", dp_mode_name(cfg.mode)}, {"link", link_name(ds.link)}, {"plan", plan_json(plan)}};
  int code = 0;
  const bool too_long = !plan.uniform_fallback && o.max_rounds > 0 && plan.rounds > o.max_rounds;
  if (o.plan_only) {
    report["status"] = "plan-only";
  } else if (too_long && !o.allow_truncation) {
    report["status"] = "refused";
    std::cerr << "error: T = " << plan.rounds << " exceeds --max-rounds = " << o.max_rounds
              << "; raise the cap or pass --allow-truncation (privacy is then not guaranteed)\n";
    code = kExitConfig;
  } else {
    Rng rng(split_seed(o.seed, 0));
    std::optional<std::ofstream> trace;
    if (!o.trace.empty()) trace.emplace(open_out(o.trace));
    const MechanismReport r = run_mechanism(ds, geom, cfg, rng, [&](std::uint64_t, const Vector& x) {
      if (trace) write_matrix_csv(*trace, {x});
    });
    report["status"] = "ok";
    report["plan"] = plan_json(r.plan);
    report["solution"] = vec_json(r.solution);
    report["queries"] = r.queries;
    report["query_constant"] = r.query_constant;
    report["privacy_guaranteed"] = r.privacy_guaranteed;
    report["seconds"] = r.seconds;
    report["empirical_risk"] = empirical_risk(ds, r.solution);
    if (ds.link == Link::kLinear) report["excess_empirical_risk"] = excess_empirical_risk(ds, geom, r.solution);
  }
  const std::string text = report.dump(2);
  std::cout << text << "\n";
  open_out(out) << text << "\n";
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json outputs{{"report", out}};
  if (!o.trace.empty()) outputs["trace"] = o.trace;
  write_manifest(out + ".manifest.json", sub, o.seed, json{{"data", o.data}}, outputs, started, secs, nullptr);
  return code;
}

struct DiagOpts {
  std::vector<std::string> checks;
  bool list = false;
  std::uint64_t seed = 1;
  std::size_t mc_samples = 20000;
  std::size_t growth_samples = 1000000;
  int pairs = 20;
  int directions = 50;
  int range_points = 200;
  int threads = 1;
  std::string out;
};

int cmd_diag(const DiagOpts& o) {
  if (o.list) {
    for (const auto& n : diagnostic_names()) std::cout << n << "\n";
    return 0;
  }
  DiagnosticsConfig cfg;
  cfg.seed = o.seed;
  cfg.mc_samples = o.mc_samples;
  cfg.growth_samples = o.growth_samples;
  cfg.pairs = o.pairs;
  cfg.directions = o.directions;
  cfg.range_points = o.range_points;
  cfg.threads = o.threads;
  cfg.checks = o.checks;
  const DiagnosticsReport r = diagnostics_suite(cfg);
  const std::string text = diag_json(r).dump(2);
  std::cout << text << "\n";
  if (!o.out.empty()) open_out(o.out) << text << "\n";
  return r.all_passed() ? 0 : kExitFailed;
}

struct BenchOpts {
  int d = 16;
  double lipschitz = 1.0;
  double radius = 1.0;
  double p = 2.0;
  std::vector<double> ks;
  int reps = 200;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_bench(const BenchOpts& o, const CLI::App* sub) {
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> ks = o.ks;
  if (ks.empty()) ks = {1.0 * o.d, 4.0 * o.d, 16.0 * o.d, 64.0 * o.d};
  const auto rows = bench_risk_vs_k(o.d, o.lipschitz, o.radius, o.p, ks, o.reps, o.seed);
  const std::string out = o.out.empty() ? default_path("bench.csv") : o.out;
  {
    auto f = open_out(out);
    f << "d,k,lower_bound_reference,mean_risk,risk_se,reps\n";
    for (const auto& r : rows) {
      f << r.d << "," << fmt17(r.k) << "," << fmt17(r.lower_bound) << "," << fmt17(r.mean_risk) << ","
        << fmt17(r.risk_se) << "," << r.reps << "\n";
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(out + ".manifest.json", sub, o.seed, json::object(), json{{"table", out}}, started, secs, nullptr);
  std::cerr << "wrote " << rows.size() << " rows to " << out << "\n";
  return 0;
}

int run(std::vector<std::string> args);

std::string config_key(std::string key) {
  static const std::map<std::string, std::string> alias = {
      {"D", "radius"}, {"G", "lipschitz"}, {"eps", "epsilon"}, {"delta_dp", "delta"}, {"C_T", "c-t"},
      {"c_eta", "c-eta"}, {"theta_constant", "theta-constant"}};
  if (auto it = alias.find(key); it != alias.end()) return it->second;
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Replaces `--config FILE` after the subcommand by the file's key = value
// lines, inserted ahead of the remaining flags so that flags take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  if (args.size() < 2) return args;
  std::optional<std::string> path;
  std::vector<std::string> rest;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!path) return args;
  std::ifstream in(*path);
  if (!in) throw ConfigError("cannot read config file: " + *path);
  std::vector<std::string> out{args[0], args[1]};
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(*path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out.push_back("--" + config_key(trim(line.substr(0, eq))) + "=" + value);
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

// --from-manifest m.json [--out path]: rebuild the command line from the
// resolved options and run it again.
int replay(const std::string& path, const std::optional<std::string>& out) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read manifest: " + path);
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw ConfigError("malformed manifest " + path + ": " + e.what());
  }
  if (!m.contains("subcommand") || !m.contains("config")) throw ConfigError("manifest lacks subcommand/config");
  std::vector<std::string> args{"llt", m["subcommand"].get<std::string>()};
  for (const auto& [k, v] : m["config"].items()) {
    if (k == "out" && out) continue;
    args.push_back("--" + k + "=" + v.get<std::string>());
  }
  if (out) args.push_back("--out=" + *out);
  return run(args);
}

int run(std::vector<std::string> args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--from-manifest") {
      if (i + 1 >= args.size()) throw ConfigError("--from-manifest needs a path");
      std::optional<std::string> out;
      for (std::size_t j = 1; j + 1 < args.size(); ++j) {
        if (args[j] == "--out") out = args[j + 1];
      }
      return replay(args[i + 1], out);
    }
  }

  args = expand_config(std::move(args));

  CLI::App app{"Proximal sampling with log-Laplace regularizers"};
  app.require_subcommand(1);
  // Config-file values are placed before the user's flags; the last one wins.
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--from-manifest", "Rerun the command recorded in a manifest (optionally with --out)");

  SampleOpts so;
  auto* sample = app.add_subcommand("sample", "Run the alternating chain and write retained states as CSV");
  sample->add_option("--config", "File of key = value lines; flags win");
  sample->add_option("--d", so.d, "Dimension")->capture_default_str();
  sample->add_option("--p", so.p, "Ball exponent in [1, 2]")->capture_default_str();
  sample->add_option("--radius", so.radius, "Ball radius D")->capture_default_str();
  sample->add_option("--objective", so.objective, "zero | linear | dataset")->capture_default_str();
  sample->add_option("--components", so.components, "Random linear components (objective linear)")
      ->capture_default_str();
  sample->add_option("--lipschitz", so.lipschitz, "G: bound on the dual norm of each row")->capture_default_str();
  sample->add_option("--data", so.data, "CSV rows for objective dataset");
  sample->add_flag("--header", so.header, "CSV has a header line")->capture_default_str();
  sample->add_option("--link", so.link, "linear | abs | logistic | hinge")->capture_default_str();
  sample->add_option("--eta", so.eta, "Step eta")->capture_default_str();
  sample->add_option("--mu", so.mu, "Regularizer weight mu")->capture_default_str();
  sample->add_option("--a", so.a, "Scale a of phi = a ||y||_q^2 (default eta (p-1)/2)");
  sample->add_option("--delta", so.delta, "Target TV accuracy")->capture_default_str();
  sample->add_option("--rounds", so.rounds, "Burn-in rounds (default: mixing time)");
  sample->add_option("--log-beta", so.log_beta, "ln of the warm-start warmness");
  sample->add_option("--c-t", so.c_t, "Mixing-time constant")->capture_default_str();
  sample->add_option("--n-samples", so.n_samples, "Retained rows")->capture_default_str();
  sample->add_option("--thin", so.thin, "Rounds between retained rows")->capture_default_str();
  sample->add_option("--hr-steps", so.hr_steps, "Hit-and-run steps per gamma draw")->capture_default_str();
  sample->add_option("--hr-burn", so.hr_burn, "Hit-and-run burn-in per inner call")->capture_default_str();
  sample->add_option("--warm-steps", so.warm_steps, "Hit-and-run steps of the warm start")->capture_default_str();
  sample->add_option("--max-rounds", so.max_rounds, "Cap on total rounds (0 = none)")->capture_default_str();
  sample->add_flag("--allow-truncation", so.allow_truncation, "Stop at the cap instead of failing")
      ->capture_default_str();
  sample->add_option("--seed", so.seed, "Master seed")->capture_default_str();
  sample->add_option("--out", so.out, "Output CSV (default $LLT_OUTPUT_DIR/samples.csv)");

  DpOpts dpo;
  auto* dp = app.add_subcommand("dp", "Differentially private ERM / SCO over an l_p ball");
  dp->add_option("--config", "File of key = value lines; flags win");
  dp->add_option("--data", dpo.data, "CSV dataset, one row s_i per line");
  dp->add_flag("--header", dpo.header, "CSV has a header line")->capture_default_str();
  dp->add_option("--link", dpo.link, "linear | abs | logistic | hinge")->capture_default_str();
  dp->add_option("--p", dpo.p, "Ball exponent in [1, 2]")->capture_default_str();
  dp->add_option("--radius", dpo.radius, "Ball radius D")->capture_default_str();
  dp->add_option("--lipschitz", dpo.lipschitz, "G")->capture_default_str();
  dp->add_option("--epsilon", dpo.epsilon, "Privacy epsilon in (0, 1]")->capture_default_str();
  dp->add_option("--delta", dpo.delta, "Privacy delta in (0, 1/2)")->capture_default_str();
  dp->add_option("--mode", dpo.mode, "erm | sco")->capture_default_str();
  dp->add_option("--theta-constant", dpo.theta_constant, "Constant in Theta")->capture_default_str();
  dp->add_option("--theta", dpo.theta, "Theta override");
  dp->add_option("--c-eta", dpo.c_eta, "Constant in eta")->capture_default_str();
  dp->add_option("--c-t", dpo.c_t, "Mixing-time constant")->capture_default_str();
  dp->add_option("--delta-tv", dpo.delta_tv, "Sampler TV budget (default: delta)");
  dp->add_option("--log-beta", dpo.log_beta, "ln of the warm-start warmness");
  dp->add_option("--hr-steps", dpo.hr_steps, "Hit-and-run steps per gamma draw")->capture_default_str();
  dp->add_option("--hr-burn", dpo.hr_burn, "Hit-and-run burn-in per inner call")->capture_default_str();
  dp->add_option("--warm-steps", dpo.warm_steps, "Hit-and-run steps of the warm start")->capture_default_str();
  dp->add_option("--max-rounds", dpo.max_rounds, "Cap on rounds (0 = none)")->capture_default_str();
  dp->add_flag("--allow-truncation", dpo.allow_truncation, "Run at most --max-rounds; voids the guarantee")
      ->capture_default_str();
  dp->add_flag("--plan-only", dpo.plan_only, "Report derived parameters without sampling")->capture_default_str();
  dp->add_option("--trace", dpo.trace, "CSV of every chain state");
  dp->add_option("--seed", dpo.seed, "Master seed")->capture_default_str();
  dp->add_option("--out", dpo.out, "Report JSON (default $LLT_OUTPUT_DIR/dp_report.json)");

  DiagOpts dgo;
  auto* diag = app.add_subcommand("diag", "Numerical checks of the log-Laplace machinery");
  diag->add_option("--check", dgo.checks, "Run only these checks (repeatable)");
  diag->add_flag("--list", dgo.list, "List check names");
  diag->add_option("--seed", dgo.seed, "Master seed")->capture_default_str();
  diag->add_option("--mc-samples", dgo.mc_samples, "Draws per cumulant estimate")->capture_default_str();
  diag->add_option("--growth-samples", dgo.growth_samples, "Draws per d in the range growth check")
      ->capture_default_str();
  diag->add_option("--pairs", dgo.pairs, "(x, h) pairs in the third-cumulant check")->capture_default_str();
  diag->add_option("--directions", dgo.directions, "Directions in the covariance check")->capture_default_str();
  diag->add_option("--range-points", dgo.range_points, "Points per d in the range check")->capture_default_str();
  diag->add_option("--threads", dgo.threads, "Checks run concurrently")->capture_default_str();
  diag->add_option("--out", dgo.out, "Also write the JSON report here");

  BenchOpts bo;
  auto* bench = app.add_subcommand("bench", "Risk-vs-k table on the Gaussian hard instance");
  bench->add_option("--config", "File of key = value lines; flags win");
  bench->add_option("--d", bo.d, "Dimension (>= 2)")->capture_default_str();
  bench->add_option("--lipschitz", bo.lipschitz, "G")->capture_default_str();
  bench->add_option("--radius", bo.radius, "D")->capture_default_str();
  bench->add_option("--p", bo.p, "Ball exponent")->capture_default_str();
  bench->add_option("--ks", bo.ks, "Query budgets, comma separated (default d,4d,16d,64d)")->delimiter(',');
  bench->add_option("--reps", bo.reps, "Instances per budget")->capture_default_str();
  bench->add_option("--seed", bo.seed, "Master seed")->capture_default_str();
  bench->add_option("--out", bo.out, "Output CSV (default $LLT_OUTPUT_DIR/bench.csv)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (sample->parsed()) return cmd_sample(so, sample);
  if (dp->parsed()) return cmd_dp(dpo, dp);
  if (diag->parsed()) return cmd_diag(dgo);
  return cmd_bench(bo, bench);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(std::vector<std::string>(argv, argv + argc));
  } catch (const DatasetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!e.rows().empty()) {
      std::cerr << "rejected rows:";
      for (auto r : e.rows()) std::cerr << " " << r;
      std::cerr << "\n";
    }
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DegenerateLawError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitFailed;
  }
}
