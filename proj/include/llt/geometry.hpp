#pragma once

#include <utility>

#include "llt/numeric.hpp"

namespace llt {

/// l_p norm; p may be +infinity. Throws std::domain_error on non-finite input.
double lp_norm(const Vector& x, double p);

/// Dual exponent q with 1/p + 1/q = 1, for p in [1, 2]; returns +infinity at p = 1.
double dual_exponent(double p);

/// Origin-centred l_p ball of the given radius in R^d, p in [1, 2].
///
/// The ball itself always uses the raw exponent. The log-Laplace regularizer
/// needs a finite dual exponent, so p = 1 is replaced by 1 + 1/ln d (capped
/// at 2) in effective_p()/effective_q().
class LpGeometry {
 public:
  LpGeometry(int d, double p, double radius = 1.0);

  int dim() const { return d_; }
  double p() const { return p_; }
  double q() const { return q_; }
  double radius() const { return radius_; }
  double diameter() const { return 2.0 * radius_; }

  double effective_p() const { return p_eff_; }
  double effective_q() const { return q_eff_; }

  double norm(const Vector& x) const { return lp_norm(x, p_); }
  double dual_norm(const Vector& x) const { return lp_norm(x, q_); }

  /// Membership with relative boundary tolerance 1e-12.
  bool contains(const Vector& x) const;

  /// Parameter interval [t_lo, t_hi] of the chord {x + t u} inside the ball,
  /// for x in the ball. Closed form for p = 2, bisection to 1e-10 otherwise.
  std::pair<double, double> chord(const Vector& x, const Vector& u) const;

  LpGeometry with_radius(double radius) const { return LpGeometry(d_, p_, radius); }

 private:
  int d_;
  double p_;
  double q_;
  double radius_;
  double p_eff_;
  double q_eff_;
};

/// Alias kept close to the membership-oracle vocabulary.
inline bool ball_contains(const LpGeometry& geom, const Vector& x) { return geom.contains(x); }

/// Distance in the constant Hessian metric of psi for q = 2: ||x - x'||_2 / sqrt(2a).
double riemannian_distance_gaussian(const Vector& x, const Vector& xp, double a);

/// argmin of <g, x> over the ball: -R sign(g) |g|^{q-1} / ||g||_q^{q-1}
/// (a signed vertex when p = 1). The minimum value is -R ||g||_q.
Vector lp_ball_linear_minimizer(const LpGeometry& geom, const Vector& g);

/// Uniform draw from the l_p ball (generalized-Gaussian construction).
Vector uniform_in_ball(const LpGeometry& geom, Rng& rng);

}  // namespace llt
