#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "llt/geometry.hpp"
#include "llt/stable.hpp"

namespace llt {

/// Quadrature controls for the log-Laplace transform.
struct QuadratureConfig {
  /// Relative tolerance of each one-dimensional integral.
  double rel_tol = 1e-13;
  /// Stop refining the lambda-mixing trapezoid once log-values agree this well.
  double mixing_tol = 1e-12;
  /// Integrands are truncated where they fall this many log-units below their peak.
  double tail_drop = 40.0;
  /// Coarsest lambda step (in log lambda) and number of halvings allowed.
  double coarse_step = 1.0;
  int max_halvings = 7;
  /// Memoized psi values kept before the cache is flushed.
  std::size_t cache_capacity = 1 << 18;
};

/// Parameters of phi(y) = a ||y||_q^2 and its log-Laplace transform
/// psi_{p,a}(x) = log int exp(<x, y> - a ||y||_q^2) dy, with q the effective
/// dual exponent of the geometry.
struct LLTSpec {
  LpGeometry geom;
  double a;
  QuadratureConfig quad{};
  /// Use the lambda-mixing quadrature even where a closed form exists (q = 2).
  bool force_quadrature = false;
  /// Primal exponent of the regularizer, in (1, 2]; defaults to geom.effective_p().
  std::optional<double> regularizer_p{};
};

/// Monte-Carlo cumulants of the induced density D_x(y) = exp(<x,y> - phi(y) - psi(x)).
struct CumulantEstimate {
  Vector mean;
  Vector mean_se;
  Matrix covariance;
  Matrix covariance_se;
  double second_directional = 0.0;
  double second_directional_se = 0.0;
  double third_directional = 0.0;
  double third_directional_se = 0.0;
  std::size_t sample_count = 0;
};

/// Directional central moments of a sample matrix (rows are draws).
struct DirectionalMoments {
  double second = 0.0;
  double second_se = 0.0;
  double third = 0.0;
  double third_se = 0.0;
};

/// log int exp(theta t - coef |t|^q) dt, by adaptive Gauss-Legendre on a window
/// around the integrand's mode.
double log_one_dim_integral(double theta, double coef, double q, double rel_tol = 1e-13,
                            double tail_drop = 40.0);
double one_dim_integral(double theta, double coef, double q);

/// Closed form of psi at x = 0 for any q:
///   log( (2 Gamma(1 + 1/q))^d Gamma(1 + d/2) / Gamma(1 + d/q) ) - (d/2) log a.
double llt_value_at_origin(int d, double q, double a);

/// Evaluates psi_{p,a}, its gradient, and draws from D_x.
///
/// Values go through the inverse-Laplace decomposition
///   exp(psi(x)) = int_0^inf prod_i I(x_i, lambda a^{q/2}) mu_{2/q}(lambda) dlambda,
/// integrated by a trapezoid rule in s = log lambda whose step is halved until
/// the result is stable. Mixing-density values are memoized on the step lattice
/// and psi values on exact bit patterns of x; both caches are mutex-guarded.
class LogLaplace {
 public:
  explicit LogLaplace(LLTSpec spec);

  const LLTSpec& spec() const { return spec_; }
  int dim() const { return spec_.geom.dim(); }
  double q() const { return q_; }
  double a() const { return spec_.a; }
  bool closed_form() const { return q_ == 2.0 && !spec_.force_quadrature; }

  double value(const Vector& x) const;
  /// Central differences with step 1e-5 max(1, ||x||_inf).
  Vector gradient(const Vector& x) const;
  /// Draw from D_x: lambda from its posterior given x, then independent
  /// coordinates exactly given lambda. The lambda posterior is read off the
  /// same lattice as value(); the last x's lattice is kept for repeated draws.
  Vector sample_dual(const Vector& x, Rng& rng) const;
  /// N x d matrix of draws from D_x.
  Matrix sample_dual_batch(const Vector& x, std::size_t n, Rng& rng) const;

  std::size_t cache_size() const;

 private:
  // Log of the s = log lambda integrand on the converged lattice: node j sits
  // at s = (first + j) * stride * lattice_step().
  struct MixingLattice {
    long long first = 0;
    long long stride = 1;
    double log_value = 0.0;
    std::vector<double> log_g;
  };
  // Posterior of lambda given x as cell masses of the exponentially
  // interpolated lattice integrand.
  struct MixingPosterior {
    MixingLattice lattice;
    std::vector<double> cdf;
  };

  double value_uncached(const Vector& x) const;
  // finest: refine to the full lattice even after convergence.
  MixingLattice mixing_lattice(const Vector& x, bool finest = false) const;
  std::shared_ptr<const MixingPosterior> posterior(const Vector& x) const;
  double sample_lambda(const Vector& x, Rng& rng) const;
  double log_mixing_integrand(const Vector& x, long long lattice_index) const;
  double log_mixing_density(long long lattice_index) const;
  double lattice_step() const;

  LLTSpec spec_;
  double q_;
  StableCountLaw law_;

  struct KeyHash {
    std::size_t operator()(const std::vector<std::uint64_t>& k) const noexcept;
  };
  mutable std::mutex cache_mu_;
  mutable std::unordered_map<std::vector<std::uint64_t>, double, KeyHash> value_cache_;
  mutable std::mutex mixing_mu_;
  mutable std::unordered_map<long long, double> mixing_cache_;
  mutable std::mutex posterior_mu_;
  mutable std::vector<std::uint64_t> posterior_key_;
  mutable std::shared_ptr<const MixingPosterior> posterior_;
};

double llt_value(const LogLaplace& engine, const Vector& x);
Vector llt_gradient(const LogLaplace& engine, const Vector& x);
Vector sample_pix(const LogLaplace& engine, const Vector& x, Rng& rng);
CumulantEstimate cumulant_mc(const LogLaplace& engine, const Vector& x, const Vector& h,
                             std::size_t n, Rng& rng);

/// Cumulant estimates from an existing sample matrix.
CumulantEstimate estimate_cumulants(const Matrix& samples, const Vector& h);
DirectionalMoments directional_moments(const Matrix& samples, const Vector& v);

}  // namespace llt
