#include <cmath>

#include "doctest.h"
#include "llt/bench.hpp"
#include "llt/diagnostics.hpp"

using namespace llt;

TEST_SUITE("bench") {
TEST_CASE("hard instance moments") {
  Rng rng(1);
  const int d = 16;
  const double G = 1.0, k = 64.0;
  const HardInstance h = make_hard_instance(d, G, 1.5, k, rng);
  CHECK(h.q == doctest::Approx(3.0));
  CHECK(h.sigma == doctest::Approx(G * std::pow(16.0, -1.0 / 3.0) / std::sqrt(16.0 / 64.0 + 4.0 * std::log(16.0))));
  CHECK(h.kappa == doctest::Approx(h.sigma * 4.0 / (2.0 * 8.0)));
  const int n = 20000;
  Vector sum = Vector::Zero(d), sum2 = Vector::Zero(d);
  double norm2 = 0.0, norm4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vector s = h.draw_s(rng);
    sum += s;
    sum2 += s.cwiseProduct(s);
    const double r = std::pow(lp_norm(s, h.q), 2.0);
    norm2 += r;
    norm4 += r * r;
  }
  for (int j = 0; j < d; ++j) {
    const double m = sum[j] / n;
    const double se = std::sqrt((sum2[j] / n - m * m) / n);
    CHECK(std::abs(m - h.kappa * h.v[j]) <= 3.5 * se);
  }
  const double m2 = norm2 / n;
  const double se2 = std::sqrt((norm4 / n - m2 * m2) / n);
  CHECK(m2 <= G * G + 3.0 * se2);
}

TEST_CASE("truncated instance stays in the dual ball") {
  Rng rng(2);
  const HardInstance h = make_hard_instance(4, 0.1, 2.0, 1.0, rng, true);
  for (int i = 0; i < 2000; ++i) CHECK(lp_norm(h.draw_s(rng), h.q) < 0.1);
  CHECK_THROWS_AS(make_hard_instance(0, 1.0, 2.0, 4.0, rng), ConfigError);
  CHECK_THROWS_AS(make_hard_instance(4, 1.0, 2.0, 0.5, rng), ConfigError);
}

TEST_CASE("problem wrapper") {
  Rng rng(3);
  const HardInstance h = make_hard_instance(3, 1.0, 2.0, 9.0, rng);
  HardProblem prob(h, 2.0);
  CHECK(prob.geom().radius() == 2.0);
  Vector x = Vector::Ones(3);
  CHECK(prob.objective(x) == doctest::Approx(h.mean().sum()));
  CHECK(hard_excess_risk(h, 2.0, -2.0 * h.mean() / h.mean().norm()) == doctest::Approx(0.0).epsilon(1e-12));
  const auto f = prob.draw(rng);
  f(x);
  CHECK(prob.query_count() == 1);
}

TEST_CASE("risk reference curve") {
  CHECK(risk_lower_bound(1, 1, 2, 100, 100) == doctest::Approx(0.232995300892328).epsilon(1e-12));
  CHECK(risk_lower_bound(1, 1, 2, 100, 1) == doctest::Approx(0.5));
  CHECK(risk_lower_bound(2, 3, 1.01, 100, 1e6) ==
        doctest::Approx(6.0 / std::log(100.0) * std::sqrt(100.0 / (1e6 * std::log(100.0)))));
  CHECK_THROWS_AS(risk_lower_bound(1, 1, 2, 1, 10), ConfigError);
}

TEST_CASE("bench rows decrease with the budget") {
  const auto rows = bench_risk_vs_k(16, 1.0, 1.0, 2.0, {16, 64, 256, 1024}, 200, 4);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].mean_risk < rows[i - 1].mean_risk);
    CHECK(rows[i].lower_bound <= rows[i - 1].lower_bound);
  }
  CHECK(rows[0].risk_se > 0.0);
  CHECK_THROWS_AS(bench_risk_vs_k(16, 1.0, 1.0, 2.0, {16}, 1, 4), ConfigError);
}

TEST_CASE("grid oracle") {
  const auto gauss = [](const Vector& x) { return -0.5 * x.squaredNorm(); };
  const GridOracle g2({-3.0, -3.0}, {3.0, 3.0}, {20, 20}, gauss);
  double total = 0.0;
  for (double p : g2.probabilities()) total += p;
  CHECK(std::abs(total - 1.0) <= 1e-12);
  CHECK(g2.cells() == 400);
  Vector out(2);
  out << 4.0, 0.0;
  CHECK(g2.cell_of(out) == -1);

  Rng rng(5);
  const int n = 1000000;
  Matrix xs(n, 2);
  for (int i = 0; i < n; ++i) xs.row(i) = g2.sample(rng).transpose();
  CHECK(grid_tv(xs, g2) <= 0.01);

  const GridOracle a({-5.0}, {5.0}, {400}, [](const Vector& x) { return -0.5 * x[0] * x[0]; });
  Matrix shifted(n, 1);
  for (int i = 0; i < n; ++i) shifted(i, 0) = 1.0 + standard_normal(rng);
  CHECK(grid_tv(shifted, a) == doctest::Approx(0.382924922548026).epsilon(0.03));

  const GridOracle left({0.0}, {1.0}, {10}, [](const Vector&) { return 0.0; });
  Matrix far(100, 1);
  far.setConstant(2.0);
  CHECK(grid_tv(far, left) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(grid_tv(Matrix(0, 1), left), std::invalid_argument);
  CHECK_THROWS_AS(grid_tv(xs, left), std::invalid_argument);
  CHECK_THROWS_AS(GridOracle({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {2, 2, 2}, gauss), ConfigError);
}

TEST_CASE("grid refinement is stable") {
  const auto dens = [](const Vector& x) { return -x.squaredNorm() + 0.3 * x[0]; };
  const GridOracle coarse({-1.0, -1.0}, {1.0, 1.0}, {20, 20}, dens, 4);
  const GridOracle fine({-1.0, -1.0}, {1.0, 1.0}, {20, 20}, dens, 16);
  double tv = 0.0;
  for (std::size_t i = 0; i < coarse.cells(); ++i) tv += std::abs(coarse.probabilities()[i] - fine.probabilities()[i]);
  CHECK(0.5 * tv < 0.01);
}

TEST_CASE("diagnostics are reproducible") {
  DiagnosticsConfig cfg;
  cfg.seed = 11;
  cfg.mc_samples = 2000;
  cfg.checks = {"laplace-identity", "tv-stability"};
  const DiagnosticsReport a = diagnostics_suite(cfg);
  const DiagnosticsReport b = diagnostics_suite(cfg);
  REQUIRE(a.entries.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.entries[i].name == b.entries[i].name);
    CHECK(a.entries[i].measured == b.entries[i].measured);
    CHECK(a.entries[i].passed);
  }
  cfg.checks = {"no-such-check"};
  CHECK_THROWS_AS(diagnostics_suite(cfg), ConfigError);
  CHECK(is_diagnostic("range-growth-linf"));
  CHECK(diagnostic_names().size() == 9);
}

TEST_CASE("l_inf range growth, exact against Monte Carlo") {
  CHECK(linf_range_exact(16) == doctest::Approx(1.24801149029744387).epsilon(1e-8));
  CHECK(linf_range_exact(64) == doctest::Approx(3.37541035037180188).epsilon(1e-8));
  Rng rng(6);
  double se = 0.0;
  const double mc = linf_range_mc(16, 200000, rng, &se);
  CHECK(std::abs(mc - linf_range_exact(16)) <= 3.0 * se);
}
}
