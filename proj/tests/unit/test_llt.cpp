#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "llt/llt.hpp"

using namespace llt;

namespace {
LogLaplace engine(int d, double q, double a, bool force = false) {
  LLTSpec s{LpGeometry(d, q == 2.0 ? 2.0 : q / (q - 1.0)), a};
  s.force_quadrature = force;
  return LogLaplace(s);
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST_SUITE("llt") {
TEST_CASE("one-dimensional integral oracles") {
  CHECK(one_dim_integral(0.0, 1.0, 2.0) == doctest::Approx(1.7724538509055159).epsilon(1e-12));
  CHECK(one_dim_integral(1.0, 1.0, 2.0) == doctest::Approx(2.2758757944687472).epsilon(1e-12));
  CHECK(one_dim_integral(0.0, 1.0, 4.0) == doctest::Approx(1.8128049541109541).epsilon(1e-12));
  // scaling: int exp(-c|t|^q) = c^{-1/q} J(0)
  CHECK(log_one_dim_integral(0.0, 16.0, 4.0) == doctest::Approx(std::log(1.8128049541109541) - std::log(2.0)).epsilon(1e-12));
  // large theta: complete the square
  CHECK(log_one_dim_integral(40.0, 0.5, 2.0) == doctest::Approx(800.0 + 0.5 * std::log(2.0 * kPi)).epsilon(1e-13));
}

TEST_CASE("Gaussian closed form values") {
  CHECK(engine(2, 2.0, 1.0).value(vec({0, 0})) == doctest::Approx(1.1447298858494002).epsilon(1e-14));
  CHECK(engine(3, 2.0, 0.5).value(vec({1, 0, 0})) == doctest::Approx(3.2568155996140182).epsilon(1e-14));
  CHECK(engine(3, 2.0, 0.5, true).value(vec({1, 0, 0})) == doctest::Approx(3.2568155996140182).epsilon(1e-12));
}

TEST_CASE("generic q against independent two-dimensional quadrature") {
  // mpmath double integral over R^2 of exp(<x,y> - 0.3 ||y||_4^2)
  const LogLaplace e = engine(2, 4.0, 0.3);
  CHECK(e.value(vec({0, 0})) == doctest::Approx(2.5145057302374).epsilon(1e-10));
  CHECK(e.value(vec({-2, 0.7})) == doctest::Approx(7.0235195965).epsilon(1e-9));
}

TEST_CASE("in one dimension every q gives the Gaussian value") {
  for (double q : {3.0, 4.0}) {
    const LogLaplace e = engine(1, q, 1.0);
    CHECK(e.value(vec({0.0})) == doctest::Approx(0.5 * std::log(kPi)).epsilon(1e-10));
    CHECK(e.value(vec({1.3})) == doctest::Approx(1.69 / 4.0 + 0.5 * std::log(kPi)).epsilon(1e-10));
  }
}

TEST_CASE("value at the origin matches the Gamma-function form") {
  for (double q : {3.0, 4.0}) {
    for (int d : {2, 4}) {
      CHECK(engine(d, q, 0.3).value(Vector::Zero(d)) == doctest::Approx(llt_value_at_origin(d, q, 0.3)).epsilon(1e-10));
    }
  }
  CHECK(llt_value_at_origin(2, 2.0, 1.0) == doctest::Approx(std::log(kPi)).epsilon(1e-14));
}

TEST_CASE("cache returns identical values") {
  const LogLaplace e = engine(3, 4.0, 0.5);
  const Vector x = vec({0.2, -0.4, 1.0});
  const double v1 = e.value(x);
  CHECK(e.cache_size() >= 1);
  CHECK(e.value(x) == v1);
  CHECK(llt_value(e, x) == v1);
}

TEST_CASE("input checks") {
  const LogLaplace e = engine(2, 4.0, 0.5);
  CHECK_THROWS_AS(e.value(vec({1, 2, 3})), std::invalid_argument);
  CHECK_THROWS_AS(e.value(vec({1, INFINITY})), std::domain_error);
}

TEST_CASE("gradient") {
  const LogLaplace e4 = engine(3, 4.0, 0.5);
  CHECK(e4.gradient(Vector::Zero(3)).cwiseAbs().maxCoeff() < 1e-6);
  const LogLaplace e2 = engine(2, 2.0, 0.5);
  const Vector x = vec({0.7, -1.2});
  CHECK((llt_gradient(e2, x) - x).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("dual draws for q = 2, a = 1/2 are N(x, I)") {
  const LogLaplace e = engine(2, 2.0, 0.5);
  const Vector x = vec({0.5, -1.0});
  Rng rng(21);
  const int n = 100000;
  const Matrix ys = e.sample_dual_batch(x, n, rng);
  for (int c = 0; c < 2; ++c) {
    std::vector<double> z(n);
    for (int i = 0; i < n; ++i) z[i] = ys(i, c) - x[c];
    std::sort(z.begin(), z.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
      const double f = normal_cdf(z[i]);
      ks = std::max({ks, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
    }
    CHECK(ks <= 0.01);
  }
}

TEST_CASE("dual draws at x = 0 are centred, q = 4") {
  const LogLaplace e = engine(2, 4.0, 0.5);
  Rng rng(22);
  const auto est = cumulant_mc(e, Vector::Zero(2), vec({1, 0}), 100000, rng);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(est.mean[i]) <= 3.0 * est.mean_se[i]);
  CHECK(std::abs(est.third_directional) <= 3.0 * est.third_directional_se);
}

TEST_CASE("dual mean equals the gradient, q = 4, x = (1, 0)") {
  const LogLaplace e = engine(2, 4.0, 0.5);
  const Vector x = vec({1, 0});
  Rng rng(23);
  const auto est = cumulant_mc(e, x, vec({1, 0}), 100000, rng);
  const Vector g = e.gradient(x);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(est.mean[i] - g[i]) <= 3.0 * est.mean_se[i]);
}

TEST_CASE("Gaussian covariances") {
  Rng rng(24);
  {
    const auto est = cumulant_mc(engine(2, 2.0, 0.5), vec({1, 2}), vec({1, 0}), 100000, rng);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(est.covariance(i, j) - (i == j ? 1.0 : 0.0)) <= 3.0 * est.covariance_se(i, j));
      }
    }
    CHECK(est.covariance(0, 1) == est.covariance(1, 0));
  }
  {
    const auto est = cumulant_mc(engine(2, 2.0, 1.0), Vector::Zero(2), vec({0, 1}), 100000, rng);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(est.covariance(i, i) - 0.5) <= 3.0 * est.covariance_se(i, i));
    }
  }
}

TEST_CASE("standard errors shrink like 1/sqrt(N)") {
  const LogLaplace e = engine(2, 2.0, 0.5);
  Rng rng(25);
  const auto small = cumulant_mc(e, Vector::Zero(2), vec({1, 0}), 2500, rng);
  const auto large = cumulant_mc(e, Vector::Zero(2), vec({1, 0}), 40000, rng);
  const double ratio = small.mean_se[0] / large.mean_se[0];
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
  CHECK(small.mean_se[0] > 0.0);
  CHECK_THROWS_AS(cumulant_mc(e, Vector::Zero(2), vec({1, 0}), 50, rng), std::invalid_argument);
}
}
