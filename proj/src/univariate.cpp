#include "llt/univariate.hpp"

#include <array>

namespace llt {

namespace {

// log of int_0^len exp(slope * s) ds for slope < 0 (len may be infinite).
double log_decay_mass(double slope, double len) {
  const double rate = -slope;
  if (!std::isfinite(len)) return -std::log(rate);
  return std::log(-std::expm1(-rate * len)) - std::log(rate);
}

// Offset s in [0, len] with density proportional to exp(-rate s).
double draw_decay(double rate, double len, Rng& rng) {
  const double u = uniform01(rng);
  if (!std::isfinite(len)) return -std::log(u) / rate;
  return -std::log1p(u * std::expm1(-rate * len)) / rate;
}

}  // namespace

double LogConcaveEnvelope::log_envelope(double t) const {
  if (t < left) return left_value + left_slope * (t - left);
  if (t > right) return right_value + right_slope * (t - right);
  return top;
}

double LogConcaveEnvelope::propose(Rng& rng) const {
  std::array<double, 3> logm{kNegInf, kNegInf, kNegInf};
  if (left > lo) logm[0] = left_value + log_decay_mass(-left_slope, left - lo);
  if (right > left) logm[1] = top + std::log(right - left);
  if (right < hi) logm[2] = right_value + log_decay_mass(right_slope, hi - right);
  const double total = log_sum_exp(logm);
  double u = uniform01(rng);
  int piece = 2;
  for (int i = 0; i < 3; ++i) {
    const double w = std::exp(logm[i] - total);
    if (u < w) {
      piece = i;
      break;
    }
    u -= w;
  }
  if (logm[piece] == kNegInf) piece = logm[1] != kNegInf ? 1 : (logm[0] != kNegInf ? 0 : 2);
  switch (piece) {
    case 0:
      return left - draw_decay(left_slope, left - lo, rng);
    case 1:
      return left + (right - left) * uniform01(rng);
    default:
      return right + draw_decay(-right_slope, hi - right, rng);
  }
}

}  // namespace llt
