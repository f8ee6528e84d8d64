#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace llt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Raised when a quadrature, root find or rejection loop fails to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for invalid user-supplied configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

double log_sum_exp(std::span<const double> values);

/// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b);

/// Standard normal CDF.
double normal_cdf(double z);

/// Derives an independent stream seed from a master seed and a stream index
/// (SplitMix64 finalizer applied to the pair).
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

double uniform01(Rng& rng);
double standard_normal(Rng& rng);
double standard_exponential(Rng& rng);

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point rule; nodes computed by Newton iteration on P_n.
const GaussLegendreRule& gauss_legendre(int n);

/// Fixed-rule integral of f over [a, b].
template <class F>
double gauss_legendre_integral(const F& f, double a, double b, int n = 32) {
  static const GaussLegendreRule& rule32 = gauss_legendre(32);
  const auto& rule = n == 32 ? rule32 : gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return half * sum;
}

namespace detail {

template <class F>
double adaptive_gl_step(const F& f, double a, double b, double whole,
                        double abs_tol, int depth, int& panels) {
  const double mid = 0.5 * (a + b);
  const double left = gauss_legendre_integral(f, a, mid);
  const double right = gauss_legendre_integral(f, mid, b);
  const double refined = left + right;
  ++panels;
  // Round-off floor: halving abs_tol forever would chase noise.
  abs_tol = std::max(abs_tol, 64.0 * std::numeric_limits<double>::epsilon() *
                                  (std::abs(left) + std::abs(right)));
  if (std::abs(refined - whole) <= abs_tol || depth <= 0) {
    if (depth <= 0 && std::abs(refined - whole) > 1e3 * abs_tol) {
      throw NumericalError("adaptive Gauss-Legendre: maximum depth reached on [" +
                           std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    return refined;
  }
  return adaptive_gl_step(f, a, mid, left, 0.5 * abs_tol, depth - 1, panels) +
         adaptive_gl_step(f, mid, b, right, 0.5 * abs_tol, depth - 1, panels);
}

}  // namespace detail

/// Adaptive bisection with a 32-point Gauss-Legendre rule per panel. Panels
/// are split until the two-half estimate agrees with the parent to within the
/// panel's share of rel_tol * |integral|.
template <class F>
double adaptive_gauss_legendre(const F& f, double a, double b,
                               double rel_tol = 1e-12, int max_depth = 40) {
  if (!(b > a)) return 0.0;
  const double whole = gauss_legendre_integral(f, a, b);
  // Rough magnitude from a two-panel estimate so the tolerance is relative.
  const double mid = 0.5 * (a + b);
  const double scale = std::abs(gauss_legendre_integral(f, a, mid)) +
                       std::abs(gauss_legendre_integral(f, mid, b));
  const double abs_tol = std::max(rel_tol * scale, 1e-300);
  int panels = 0;
  return detail::adaptive_gl_step(f, a, b, whole, abs_tol, max_depth, panels);
}

}  // namespace llt
