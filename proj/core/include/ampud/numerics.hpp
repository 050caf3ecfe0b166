#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace ampud {

inline constexpr double kLogTwoPi = 1.8378770664093454836;

/// log N(x; mu, var) for var > 0.
inline double log_normal_pdf(double x, double mu, double var) {
  const double d = x - mu;
  return -0.5 * (kLogTwoPi + std::log(var) + d * d / var);
}

inline double normal_pdf(double x, double mu, double var) {
  return std::exp(log_normal_pdf(x, mu, var));
}

/// log(sum_i exp(v_i)) with max-subtraction; -inf for an empty span.
inline double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

inline double log_sum_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (!std::isfinite(a)) return a;
  return a + std::log1p(std::exp(b - a));
}

/// Standard normal CDF.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * M_SQRT1_2);
}

/// exp(x^2/2) * Phi(x), stable for large negative x (Mills-ratio asymptote).
inline double scaled_normal_cdf(double x) {
  if (x > -25.0) {
    return std::exp(0.5 * x * x) * normal_cdf(x);
  }
  const double inv_sqrt_2pi = 0.3989422804014327;
  const double ix2 = 1.0 / (x * x);
  return inv_sqrt_2pi * (-1.0 / x) * (1.0 - ix2 + 3.0 * ix2 * ix2);
}

/// Adaptive Simpson quadrature of f on [a, b].
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-12,
                        int max_depth = 40) {
  struct Impl {
    const F& f;
    int max_depth;
    double recurse(double a, double m, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) const {
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      const double delta = left + right - whole;
      if (depth >= max_depth || std::fabs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
      }
      return recurse(a, lm, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
             recurse(m, rm, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
    }
  };
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return Impl{f, max_depth}.recurse(a, m, b, fa, fm, fb, whole, tol, 0);
}

}  // namespace ampud
