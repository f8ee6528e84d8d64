#include <cmath>

#include "doctest.h"
#include "llt/geometry.hpp"

using namespace llt;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST_SUITE("geometry") {
TEST_CASE("lp_norm examples") {
  CHECK(lp_norm(vec({3, 4}), 2.0) == doctest::Approx(5.0));
  CHECK(lp_norm(vec({1, -1, 1}), 1.0) == 3.0);
  CHECK(lp_norm(vec({1, -2}), kInf) == 2.0);
  CHECK(lp_norm(vec({1, 1}), 4.0) == doctest::Approx(std::pow(2.0, 0.25)));
  CHECK_THROWS_AS(lp_norm(vec({1, NAN}), 2.0), std::domain_error);
  CHECK_THROWS_AS(lp_norm(vec({1, 1}), 0.5), std::domain_error);
}

TEST_CASE("dual exponent") {
  CHECK(dual_exponent(2.0) == 2.0);
  CHECK(dual_exponent(1.0) == kInf);
  CHECK(dual_exponent(4.0 / 3.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(dual_exponent(3.0), std::domain_error);
}

TEST_CASE("ball membership") {
  CHECK(LpGeometry(2, 2.0, 1.0).contains(vec({0, 0})));
  CHECK_FALSE(LpGeometry(2, 1.0, 1.0).contains(vec({0.6, 0.6})));
  CHECK(LpGeometry(2, 2.0, 1.0).contains(vec({1, 0})));
  CHECK(ball_contains(LpGeometry(3, 1.5, 2.0), vec({1, 1, 0})));
  CHECK_THROWS_AS(LpGeometry(0, 2.0), ConfigError);
  CHECK_THROWS_AS(LpGeometry(2, 2.5), ConfigError);
  CHECK_THROWS_AS(LpGeometry(2, 2.0, -1.0), ConfigError);
}

TEST_CASE("p = 1 substitutes 1 + 1/ln d for the regularizer only") {
  const LpGeometry g(8, 1.0);
  CHECK(g.q() == kInf);
  CHECK(g.effective_p() == doctest::Approx(1.0 + 1.0 / std::log(8.0)));
  CHECK(g.effective_q() == doctest::Approx(1.0 + std::log(8.0)));
  CHECK(g.effective_p() <= 2.0);
}

TEST_CASE("chords end on the boundary") {
  const LpGeometry l2(2, 2.0, 1.0);
  auto [lo, hi] = l2.chord(vec({0, 0}), vec({1, 0}));
  CHECK(lo == doctest::Approx(-1.0));
  CHECK(hi == doctest::Approx(1.0));
  const LpGeometry l15(3, 1.5, 2.0);
  const Vector x = vec({0.3, -0.2, 0.5});
  const Vector u = vec({0.6, 0.0, -0.8});
  auto [a, b] = l15.chord(x, u);
  CHECK(l15.norm(x + a * u) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(l15.norm(x + b * u) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(a < 0.0);
  CHECK(b > 0.0);
}

TEST_CASE("Riemannian distance in the Gaussian case") {
  CHECK(riemannian_distance_gaussian(vec({1, 2}), vec({1, 2}), 0.5) == 0.0);
  CHECK(riemannian_distance_gaussian(vec({0, 0}), vec({1, 0}), 0.5) == doctest::Approx(1.0));
  CHECK(riemannian_distance_gaussian(vec({0, 0}), vec({0, 2}), 2.0) == doctest::Approx(1.0));
}

TEST_CASE("linear minimizer attains -R ||g||_q") {
  for (double p : {1.0, 1.25, 1.5, 2.0}) {
    const LpGeometry g(3, p, 1.5);
    const Vector grad = vec({0.4, -1.0, 0.25});
    const Vector x = lp_ball_linear_minimizer(g, grad);
    CHECK(g.contains(x));
    CHECK(grad.dot(x) == doctest::Approx(-1.5 * g.dual_norm(grad)).epsilon(1e-12));
  }
  CHECK(lp_ball_linear_minimizer(LpGeometry(2, 2.0), vec({0, 0})).norm() == 0.0);
}

TEST_CASE("uniform draws stay in the ball") {
  Rng rng(5);
  for (double p : {1.0, 1.5, 2.0}) {
    const LpGeometry g(4, p, 0.7);
    for (int i = 0; i < 2000; ++i) REQUIRE(g.contains(uniform_in_ball(g, rng)));
  }
}
}
