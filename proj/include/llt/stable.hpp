#pragma once

#include <stdexcept>

#include "llt/numeric.hpp"

namespace llt {

/// Thrown when a density is requested from the point-mass law (c = 1).
class DegenerateLawError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Positive (one-sided) stable law with Laplace transform E[exp(-tS)] = exp(-t^c),
/// c in (0, 1]. c = 1 is the point mass at 1; c = 1/2 is the Levy law with
/// density exp(-1/(4 lambda)) / (2 sqrt(pi) lambda^{3/2}).
///
/// Other indices are evaluated through Kanter's single-integral representation
///   f(x) = c/(1-c) x^{-1/(1-c)} (1/pi) int_0^pi A(u) exp(-A(u) x^{-c/(1-c)}) du,
///   A(u) = sin(cu)^{c/(1-c)} sin((1-c)u) / sin(u)^{1/(1-c)},
/// and sampled as (A(U)/E)^{(1-c)/c} with U ~ Unif(0, pi), E ~ Exp(1).
class StableCountLaw {
 public:
  explicit StableCountLaw(double c);

  double index() const { return c_; }
  bool degenerate() const { return c_ == 1.0; }
  bool levy() const { return c_ == 0.5; }

  double density(double lambda) const;
  double log_density(double lambda) const;
  double cdf(double lambda) const;
  double sample(Rng& rng) const;

 private:
  double c_;
};

/// Kanter's integral for log f_c(lambda), c in (0, 1). Exposed so the Levy
/// closed form can be checked against the generic path.
double kanter_log_density(double c, double lambda);
double kanter_cdf(double c, double lambda);

/// log A(u) for Kanter's function, u in (0, pi).
double kanter_log_a(double c, double u);

}  // namespace llt
