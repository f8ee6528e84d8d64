#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "llt/llt.hpp"

namespace llt {

struct DiagnosticsConfig {
  std::uint64_t seed = 1;
  /// Draws per Monte-Carlo cumulant estimate.
  std::size_t mc_samples = 20000;
  /// Draws per dimension for the l_inf range growth estimate.
  std::size_t growth_samples = 1000000;
  /// Random (x, h) pairs for the third-cumulant bound.
  int pairs = 20;
  /// Random unit directions for the covariance lower bound.
  int directions = 50;
  /// Random unit-l_p points per dimension for the range bound.
  int range_points = 200;
  /// Worker threads; checks are independent.
  int threads = 1;
  /// Subset of check names to run; empty runs everything.
  std::vector<std::string> checks;
};

struct DiagnosticEntry {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::size_t samples = 0;
  double seconds = 0.0;
  std::string detail;
};

struct DiagnosticsReport {
  std::uint64_t seed = 0;
  std::vector<DiagnosticEntry> entries;
  bool all_passed() const;
};

/// Names in suite order; the index is the rng stream of the check.
const std::vector<std::string>& diagnostic_names();
bool is_diagnostic(const std::string& name);

/// One check with its own stream split_seed(cfg.seed, index).
DiagnosticEntry run_diagnostic(const std::string& name, const DiagnosticsConfig& cfg);

/// Runs the selected checks (all by default). Unknown names throw ConfigError.
DiagnosticsReport diagnostics_suite(const DiagnosticsConfig& cfg);

/// Exact log E[exp(y_1)] for y with density proportional to exp(-||y||_inf^2) on R^d,
/// i.e. psi_{1,1}(e_1) - psi_{1,1}(0), by one-dimensional quadrature over the radius.
double linf_range_exact(int d);
/// The same quantity by direct Monte Carlo; se is the delta-method standard error.
double linf_range_mc(int d, std::size_t n, Rng& rng, double* se = nullptr);

}  // namespace llt
