#pragma once

#include <algorithm>
#include <optional>
#include <type_traits>

#include "llt/numeric.hpp"

namespace llt {

/// Three-piece exponential envelope for a log-concave density on [lo, hi]:
/// flat at (an upper bound of) the log-mode on [left, right], and a line of
/// slope left_slope / right_slope (log scale) beyond each point. By concavity
/// each line lies above the log-density on its side.
struct LogConcaveEnvelope {
  double lo = kNegInf;
  double hi = kInf;
  double left = 0.0;
  double right = 0.0;
  double top = 0.0;
  double left_value = 0.0;
  double right_value = 0.0;
  double left_slope = 0.0;   // > 0 when a left tail exists
  double right_slope = 0.0;  // < 0 when a right tail exists

  double log_envelope(double t) const;

  /// Draws a proposal from the normalized envelope.
  double propose(Rng& rng) const;
};

/// Draws t in [lo, hi] from the density proportional to exp(log_f), which must
/// be concave. Rejection from the envelope above, so draws are exact.
///
/// `mode` is the argmax if known; otherwise it is found by golden section
/// (which requires a bounded interval). `scale` is a length hint for the
/// initial bracketing step. `dlog_f`, when supplied, gives exact tangents;
/// otherwise secants on the inner side of each anchor point are used (their
/// slopes bound the tangent from the correct side, so the envelope stays valid).
template <class F, class DF = std::nullptr_t>
double sample_log_concave(const F& log_f, double lo, double hi, Rng& rng,
                          std::optional<double> mode = std::nullopt, double scale = 1.0,
                          const DF& dlog_f = nullptr);

namespace detail {

inline double golden_section_max(const auto& f, double lo, double hi, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  const double m = 0.5 * (a + b);
  // Endpoint maxima (truncated densities).
  if (f(lo) >= f(m)) return lo;
  if (f(hi) >= f(m)) return hi;
  return m;
}

// Point on the side `dir` of `m` where log_f has dropped by `drop` below `top`,
// or the interval end if it never drops that far.
inline double drop_point(const auto& f, double m, double end, double dir, double top,
                         double drop, double scale) {
  const double target = top - drop;
  const double reach = std::abs(end - m);
  if (reach == 0.0) return m;
  double w = std::min(scale, reach);
  double inner = 0.0;
  for (int i = 0; i < 200; ++i) {
    if (w >= reach) {
      if (!std::isfinite(end) || f(end) < target) break;
      return end;
    }
    if (f(m + dir * w) < target) break;
    inner = w;
    w *= 2.0;
  }
  w = std::min(w, reach);
  double lo = inner, hi = w;
  for (int i = 0; i < 30 && hi - lo > 1e-3 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(m + dir * mid) < target) hi = mid; else lo = mid;
  }
  return m + dir * hi;
}

}  // namespace detail

template <class F, class DF>
double sample_log_concave(const F& log_f, double lo, double hi, Rng& rng,
                          std::optional<double> mode, double scale, const DF& dlog_f) {
  constexpr bool kHasDerivative = !std::is_same_v<DF, std::nullptr_t>;
  if (!(hi > lo)) {
    if (hi == lo) return lo;
    throw NumericalError("sample_log_concave: empty interval");
  }
  double m;
  if (mode) {
    m = std::clamp(*mode, lo, hi);
  } else {
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      throw NumericalError("sample_log_concave: unbounded interval needs the mode");
    }
    m = detail::golden_section_max(log_f, lo, hi, 1e-9 * (hi - lo));
  }
  const double fm = log_f(m);
  if (!std::isfinite(fm)) throw NumericalError("sample_log_concave: log-density not finite at mode");

  double slack = 1e-10 * std::max(1.0, std::abs(fm));
  if (!mode) {
    // Golden section leaves the true mode within 1e-9 (hi - lo) of m.
    const double h = 1e-9 * (hi - lo);
    double grad = 0.0;
    if (m - h >= lo) grad = std::max(grad, std::abs(fm - log_f(m - h)) / h);
    if (m + h <= hi) grad = std::max(grad, std::abs(log_f(m + h) - fm) / h);
    slack += 2.0 * grad * h;
  }
  if (scale <= 0.0 || !std::isfinite(scale)) scale = 1.0;

  LogConcaveEnvelope env;
  env.lo = lo;
  env.hi = hi;
  env.top = fm + slack;
  env.left = detail::drop_point(log_f, m, lo, -1.0, fm, 1.0, scale);
  env.right = detail::drop_point(log_f, m, hi, 1.0, fm, 1.0, scale);
  if (env.left > lo) {
    env.left_value = log_f(env.left);
    if constexpr (kHasDerivative) {
      env.left_slope = dlog_f(env.left);
    } else {
      const double e = 0.25 * (m - env.left);
      env.left_slope = (log_f(env.left + e) - env.left_value) / e;
    }
    if (!(env.left_slope > 0.0)) throw NumericalError("sample_log_concave: flat left tail");
  }
  if (env.right < hi) {
    env.right_value = log_f(env.right);
    if constexpr (kHasDerivative) {
      env.right_slope = dlog_f(env.right);
    } else {
      const double e = 0.25 * (env.right - m);
      env.right_slope = (env.right_value - log_f(env.right - e)) / e;
    }
    if (!(env.right_slope < 0.0)) throw NumericalError("sample_log_concave: flat right tail");
  }

  for (int attempt = 0; attempt < 100000; ++attempt) {
    const double t = env.propose(rng);
    const double lf = log_f(t);
    if (std::log(uniform01(rng)) <= lf - env.log_envelope(t)) return t;
  }
  throw NumericalError("sample_log_concave: rejection loop did not terminate");
}

}  // namespace llt
