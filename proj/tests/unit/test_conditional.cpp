#include <cmath>

#include "doctest.h"
#include "llt/bench.hpp"
#include "llt/conditional.hpp"

using namespace llt;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

LogLaplace gaussian_engine(int d, double a, double radius = 1.0) { return LogLaplace(LLTSpec{LpGeometry(d, 2.0, radius), a}); }

std::unique_ptr<FunctionInstance> linear_family(const LpGeometry& g, const Matrix& rows) {
  std::vector<ComponentFn> fns;
  double G = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const Vector s = rows.row(i).transpose();
    G = std::max(G, g.dual_norm(s));
    fns.push_back([s](const Vector& x) { return s.dot(x); });
  }
  return std::make_unique<FunctionInstance>(g, G, fns);
}
}  // namespace

TEST_SUITE("conditional") {
TEST_CASE("gamma log-density") {
  const LogLaplace e = gaussian_engine(2, 0.5);
  const double eta = 0.1, mu = 2.0;
  CHECK(gamma_logdensity(e, eta, mu, Vector::Zero(2), Vector::Zero(2)) ==
        doctest::Approx(-(1.0 + eta * mu) * e.value(Vector::Zero(2))));
  const Vector x = vec({0.3, -0.1}), y = vec({1.0, 2.0});
  const double closed = -(1.0 + eta * mu) * (x.squaredNorm() / 2.0 + std::log(2.0 * kPi)) + x.dot(y);
  CHECK(gamma_logdensity(e, eta, mu, y, x) == doctest::Approx(closed).epsilon(1e-14));
  const auto t = gamma_target(e, eta, mu, y);
  REQUIRE(t.alpha.has_value());
  CHECK(*t.alpha == doctest::Approx((1.0 + eta * mu) / 2.0));
}

TEST_CASE("GLM instance and query counting") {
  const LpGeometry g(2, 2.0);
  Matrix rows(2, 2);
  rows << 0.6, 0.0, 0.0, -0.8;
  GlmInstance inst(g, rows, Link::kLinear);
  CHECK(inst.lipschitz() == doctest::Approx(0.8));
  CHECK(inst.n_components().value() == 2);
  CHECK(inst.objective(vec({1, 1})) == doctest::Approx(-0.1));
  Rng rng(1);
  const auto f = inst.draw(rng);
  CHECK(inst.query_count() == 0);
  f(vec({1, 0}));
  f(vec({0, 1}));
  CHECK(inst.query_count() == 2);
  inst.reset_queries();
  CHECK(inst.query_count() == 0);
  CHECK_THROWS_AS(GlmInstance(g, rows, Link::kLinear, 0.5), ConfigError);
}

TEST_CASE("links") {
  CHECK(apply_link(Link::kHinge, 2.0) == 0.0);
  CHECK(apply_link(Link::kHinge, -1.0) == 2.0);
  CHECK(apply_link(Link::kAbs, -1.5) == 1.5);
  CHECK(apply_link(Link::kLogistic, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK(apply_link(Link::kLogistic, 800.0) == doctest::Approx(800.0));
  CHECK(apply_link(Link::kLogistic, -800.0) == 0.0);
  CHECK(parse_link("hinge") == Link::kHinge);
  CHECK(link_name(Link::kLogistic) == "logistic");
  CHECK_THROWS_AS(parse_link("probit"), ConfigError);
}

TEST_CASE("depth law") {
  Rng rng(2);
  const int n = 1000000;
  double s = 0.0, s2 = 0.0, ge3 = 0.0;
  int min_depth = 100;
  for (int i = 0; i < n; ++i) {
    const int a = sample_depth(rng);
    min_depth = std::min(min_depth, a);
    s += a;
    s2 += static_cast<double>(a) * a;
    ge3 += a >= 3;
  }
  CHECK(min_depth == 1);
  CHECK(s / n == doctest::Approx(std::exp(1.0) - 1.0).epsilon(0.01));
  CHECK(s2 / n == doctest::Approx(std::exp(1.0) + 1.0).epsilon(0.01));
  const double p = ge3 / n;
  CHECK(std::abs(p - 1.0 / 6.0) <= 3.0 * std::sqrt((1.0 / 6.0) * (5.0 / 6.0) / n));
}

TEST_CASE("clipping rho does not change the acceptance event") {
  for (double rho : {-1.0, 0.5, 3.0}) {
    for (int i = 1; i <= 1000; ++i) {
      const double u = i / 1000.0;
      CHECK(accept_draw(u, rho) == accept_draw(u, clip_rho(rho)));
    }
  }
}

TEST_CASE("rejection estimator") {
  const LpGeometry g(2, 2.0);
  SUBCASE("constant components give rho = 1") {
    auto zero = make_zero_instance(g);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) CHECK(rejection_estimator(*zero, vec({0.1, 0.2}), vec({-0.5, 0.1}), sample_depth(rng), rng) == 1.0);
  }
  SUBCASE("unbiased for exp(F(x2) - F(x1))") {
    Matrix rows(5, 2);
    rows << 0.5, -0.2, 0.1, 0.9, -0.7, 0.3, 0.2, 0.2, -0.1, -0.6;
    auto inst = linear_family(g, rows);
    const Vector x1 = vec({0.3, -0.4}), x2 = vec({-0.2, 0.5});
    Rng rng(4);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = rejection_estimator(*inst, x1, x2, sample_depth(rng), rng);
      s += r;
      s2 += r * r;
    }
    const double m = s / n, se = std::sqrt((s2 / n - m * m) / n);
    CHECK(std::abs(m - std::exp(inst->objective(x2) - inst->objective(x1))) <= 3.0 * se);
  }
}

TEST_CASE("inner-loop precondition") {
  CHECK_THROWS_AS(InnerLoopConfig(1.0, 0.01, 0.1, 1.0), ConfigError);
  const double eta = InnerLoopConfig::max_eta(1.0, 0.01);
  CHECK(eta == doctest::Approx(1.0 / (1e4 * std::log(100.0))));
  CHECK_NOTHROW(InnerLoopConfig(1.0, 0.01, eta * 0.999, 1.0));
  CHECK(InnerLoopConfig(1.0, 0.01, eta * 0.999, 1.0).analysis_horizon() == 47);
  CHECK_THROWS_AS(InnerLoopConfig(0.0, 1.5, 0.1, 1.0), ConfigError);
}

TEST_CASE("gamma draws: truncation-free Gaussian") {
  const LogLaplace e = gaussian_engine(2, 0.5, 5.0);
  const InnerLoopConfig cfg(0.0, 0.1, 1e-6, 1.0, 200, 100);
  Rng rng(5);
  const int n = 10000;
  Vector s = Vector::Zero(2), s2 = Vector::Zero(2);
  for (int i = 0; i < n; ++i) {
    const Vector x = sample_gamma(e, 1e-6, 1.0, Vector::Zero(2), cfg, rng);
    s += x;
    s2 += x.cwiseProduct(x);
  }
  for (int c = 0; c < 2; ++c) {
    const double m = s[c] / n;
    CHECK(s2[c] / n - m * m == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("gamma draws do not query F; d = 1 grid TV") {
  const double eta = 0.5, mu = 1.0, a = 0.25;
  const LogLaplace e = gaussian_engine(1, a);
  const Vector y = vec({1.5});
  const InnerLoopConfig cfg(0.0, 0.1, eta, mu);
  const GridOracle oracle({-1.0}, {1.0}, {100}, [&](const Vector& x) { return gamma_logdensity(e, eta, mu, y, x); });
  Rng rng(6);
  const int n = 100000;
  Matrix xs(n, 1);
  for (int i = 0; i < n; ++i) xs.row(i) = sample_gamma(e, eta, mu, y, cfg, rng).transpose();
  CHECK(grid_tv(xs, oracle) <= 0.03);
}

TEST_CASE("hit-and-run on the quadrature path stays in the ball") {
  LLTSpec spec{LpGeometry(2, 4.0 / 3.0), 0.5};
  const LogLaplace e(spec);
  HitAndRun chain(spec.geom, gamma_target(e, 0.5, 1.0, vec({1.0, -0.5})), Vector::Zero(2));
  Rng rng(7);
  for (int i = 0; i < 30; ++i) {
    chain.step(rng);
    REQUIRE(spec.geom.contains(chain.state()));
  }
  CHECK(chain.steps_taken() == 30);
}

TEST_CASE("inner loop: constant F accepts half the time and returns gamma draws") {
  const LpGeometry g(2, 2.0);
  const LogLaplace e = gaussian_engine(2, 0.25);
  auto zero = make_zero_instance(g);
  const InnerLoopConfig cfg(1.0, 0.1, 1e-5, 1.0);
  Rng rng(8);
  InnerLoopStats stats;
  for (int i = 0; i < 4000; ++i) {
    const Vector x = inner_loop(*zero, e, cfg, Vector::Zero(2), rng, &stats);
    REQUIRE(g.contains(x));
  }
  const double loops = static_cast<double>(stats.loops) / static_cast<double>(stats.calls);
  CHECK(loops == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("inner loop: mean loop count with compliant eta") {
  const LpGeometry g(2, 2.0);
  Matrix rows(5, 2);
  rows << 0.6, -0.8, 1.0, 0.0, 0.0, 1.0, -0.6, 0.8, 0.28, 0.96;
  auto inst = linear_family(g, rows);
  const double delta = 0.01;
  const double eta = InnerLoopConfig::max_eta(1.0, delta);
  const LogLaplace e = gaussian_engine(2, eta / 2.0);
  const InnerLoopConfig cfg(1.0, delta, eta, 1.0);
  Rng rng(9);
  InnerLoopStats stats;
  for (int i = 0; i < 10000; ++i) inner_loop(*inst, e, cfg, Vector::Zero(2), rng, &stats);
  CHECK(static_cast<double>(stats.loops) / static_cast<double>(stats.calls) <= 2.2);
  CHECK(inst->query_count() == stats.queries);
}
}
