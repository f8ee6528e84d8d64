#include <cmath>
#include <sstream>

#include "doctest.h"
#include "llt/dp.hpp"

using namespace llt;

namespace {
Dataset small_dataset(int n, int d, double p, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.rows.resize(n, d);
  const double q = dual_exponent(p);
  for (int i = 0; i < n; ++i) {
    Vector s(d);
    for (int j = 0; j < d; ++j) s[j] = standard_normal(rng) + 0.5;
    s /= std::max(1.0, lp_norm(s, q));
    data.rows.row(i) = s.transpose();
  }
  data.lipschitz = 1.0;
  return data;
}
}  // namespace

TEST_SUITE("dp") {
TEST_CASE("parameter formulas") {
  const DpParams erm = dp_params_erm(1000, 1, 1e-6, 1, 10, 1);
  CHECK(erm.k == doctest::Approx(617.275403811113187).epsilon(1e-12));
  CHECK(erm.mu == doctest::Approx(0.0162002243054868403).epsilon(1e-12));
  const DpParams sco = dp_params_sco(1000, 1, 1e-6, 1, 10, 1);
  CHECK(sco.k == doctest::Approx(336.336681581721515).epsilon(1e-12));
  CHECK(sco.mu == doctest::Approx(0.0336336681581721515).epsilon(1e-12));
}

TEST_CASE("small-n branch") {
  const DpParams erm = dp_params_erm(1, 0.99, 1e-2, 1, 1, 1);
  CHECK(erm.k == doctest::Approx(0.353931728222045924).epsilon(1e-12));
  CHECK(erm.mu == doctest::Approx(2.82540365912781528).epsilon(1e-12));
  const DpParams sco = dp_params_sco(1, 0.99, 1e-2, 1, 1, 1);
  CHECK(sco.k == doctest::Approx(0.559735018836488523).epsilon(1e-12));
  CHECK(sco.mu == doctest::Approx(2.23415597452515027).epsilon(1e-12));
}

TEST_CASE("scaling") {
  const DpParams base = dp_params_erm(500, 0.5, 1e-5, 2.0, 8, 1.5);
  CHECK(dp_params_erm(1000, 0.5, 1e-5, 2.0, 8, 1.5).k == doctest::Approx(2.0 * base.k));
  const DpParams four = dp_params_erm(500, 0.5, 1e-5, 2.0, 8, 6.0);
  CHECK(four.k == doctest::Approx(base.k / 2.0));
  CHECK(four.mu / four.k == doctest::Approx(base.mu / base.k));
  CHECK_THROWS_AS(dp_params_erm(500, 1.5, 1e-5, 2.0, 8, 1.5), std::domain_error);
  CHECK_THROWS_AS(dp_params_sco(500, 0.5, 0.5, 2.0, 8, 1.5), std::domain_error);
  CHECK_THROWS_AS(dp_params_sco(500, 0.5, 1e-5, 0.0, 8, 1.5), std::domain_error);
  CHECK(parse_dp_mode("sco") == DpMode::kSco);
  CHECK_THROWS_AS(parse_dp_mode("pure"), ConfigError);
}

TEST_CASE("dataset ingestion") {
  SUBCASE("header and rows") {
    std::istringstream in("a,b\n0.5,0.25\n-0.1,0.3\r\n\n");
    const Dataset d = parse_dataset_csv(in, 2.0, 1.0, Link::kLinear, true);
    CHECK(d.size() == 2);
    CHECK(d.dim() == 2);
    CHECK(d.rows(1, 0) == -0.1);
  }
  SUBCASE("rows over the bound are listed together") {
    std::istringstream in("0.5,0.5\n3,0\n0.1,0.1\n0,-2\n");
    try {
      parse_dataset_csv(in, 2.0, 1.0, Link::kLinear, false);
      FAIL("expected DatasetError");
    } catch (const DatasetError& e) {
      CHECK(e.rows() == std::vector<std::size_t>{2, 4});
    }
  }
  SUBCASE("the bound uses the dual norm") {
    std::istringstream in("0.6,0.6\n");
    CHECK_NOTHROW(parse_dataset_csv(in, 1.0, 0.7, Link::kLinear, false));
    std::istringstream in2("0.6,0.6\n");
    CHECK_THROWS_AS(parse_dataset_csv(in2, 2.0, 0.7, Link::kLinear, false), DatasetError);
  }
  SUBCASE("ragged or non-numeric") {
    std::istringstream ragged("1,0\n0.5\n");
    CHECK_THROWS_AS(parse_dataset_csv(ragged, 2.0, 1.0, Link::kLinear, false), DatasetError);
    std::istringstream bad("0.1,x\n");
    CHECK_THROWS_AS(parse_dataset_csv(bad, 2.0, 1.0, Link::kLinear, false), DatasetError);
    std::istringstream empty("\n");
    CHECK_THROWS_AS(parse_dataset_csv(empty, 2.0, 1.0, Link::kLinear, false), DatasetError);
  }
  CHECK_THROWS_AS(load_dataset_csv("/nonexistent/file.csv", 2.0, 1.0, Link::kLinear, false), ConfigError);
}

TEST_CASE("effective exponent and Theta") {
  MechanismConfig cfg;
  cfg.epsilon = 0.5;
  cfg.delta_dp = 1e-3;
  cfg.max_rounds = 1;
  cfg.allow_truncation = true;
  const Dataset data = small_dataset(400, 10, 1.1, 1);
  const MechanismPlan near_one = plan_mechanism(data, LpGeometry(10, 1.1), cfg);
  CHECK(near_one.p_effective == doctest::Approx(1.0 + 1.0 / std::log(10.0)));
  CHECK(near_one.theta == doctest::Approx(4.0 * std::log(10.0)));
  const Dataset data2 = small_dataset(400, 10, 1.8, 1);
  const MechanismPlan mid = plan_mechanism(data2, LpGeometry(10, 1.8), cfg);
  CHECK(mid.p_effective == 1.8);
  CHECK(mid.theta == doctest::Approx(4.0 / 0.8));
  const Dataset data1 = small_dataset(400, 1, 1.2, 1);
  const MechanismPlan one = plan_mechanism(data1, LpGeometry(1, 1.2), cfg);
  CHECK(one.p_effective == 2.0);
  CHECK(mid.a == doctest::Approx(mid.eta * 0.8 / 2.0));
  CHECK(mid.delta_tv == cfg.delta_dp);
  CHECK(mid.eta <= InnerLoopConfig::max_eta(mid.params.k * mid.scaled_lipschitz, mid.delta_inner));
  CHECK(mid.eta * mid.params.k * mid.params.mu <= 1.0);
}

TEST_CASE("refusal and truncation") {
  const Dataset data = small_dataset(50, 3, 2.0, 2);
  const LpGeometry g(3, 2.0);
  MechanismConfig cfg;
  cfg.epsilon = 0.5;
  cfg.delta_dp = 1e-3;
  cfg.max_rounds = 5;
  CHECK_THROWS_AS(plan_mechanism(data, g, cfg), ConfigError);
  cfg.allow_truncation = true;
  Rng rng(3);
  int traced = 0;
  const MechanismReport r = run_mechanism(data, g, cfg, rng, [&](std::uint64_t, const Vector&) { ++traced; });
  CHECK(r.plan.truncated);
  CHECK_FALSE(r.privacy_guaranteed);
  CHECK(traced == 5);
  CHECK(g.contains(r.solution));
  CHECK(r.queries > 0);
  CHECK(excess_empirical_risk(data, g, r.solution) <= 2.0 + 1e-12);
}

TEST_CASE("uniform fallback") {
  const Dataset data = small_dataset(1, 10, 2.0, 4);
  const LpGeometry g(10, 2.0, 3.0);
  MechanismConfig cfg;
  cfg.epsilon = 0.5;
  Rng rng(5);
  const MechanismReport r = run_mechanism(data, g, cfg, rng);
  CHECK(r.plan.uniform_fallback);
  CHECK(r.privacy_guaranteed);
  CHECK(r.queries == 0);
  CHECK(g.contains(r.solution));
}

TEST_CASE("radius is handled by rescaling") {
  const Dataset data = small_dataset(60, 2, 2.0, 6);
  MechanismConfig cfg;
  cfg.epsilon = 0.5;
  cfg.delta_dp = 1e-3;
  cfg.max_rounds = 3;
  cfg.allow_truncation = true;
  const double D = 2.5;
  Rng r1(7), r2(7);
  const MechanismReport wide = run_mechanism(data, LpGeometry(2, 2.0, D), cfg, r1);
  Dataset scaled = data;
  scaled.rows = data.rows * D;
  scaled.lipschitz = data.lipschitz * D;
  const MechanismReport unit = run_mechanism(scaled, LpGeometry(2, 2.0, 1.0), cfg, r2);
  CHECK(wide.plan.params.k == unit.plan.params.k);
  CHECK(wide.solution == unit.solution * D);
}

TEST_CASE("linear excess risk") {
  Dataset data;
  data.rows.resize(2, 2);
  data.rows << 1.0, 0.0, 0.0, 1.0;
  const LpGeometry g(2, 2.0);
  Vector x(2);
  x << -std::sqrt(0.5), -std::sqrt(0.5);
  CHECK(excess_empirical_risk(data, g, x) == doctest::Approx(0.0).epsilon(1e-12));
  data.link = Link::kHinge;
  CHECK_THROWS_AS(excess_empirical_risk(data, g, x), ConfigError);
}
}
