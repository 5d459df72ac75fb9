#ifndef SUBSEG_NUMERIC_HPP
#define SUBSEG_NUMERIC_HPP

#include <cmath>
#include <limits>

#include "subseg/errors.hpp"

namespace subseg {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Expected counts below this are treated as zero and floored in the M-step.
constexpr double kCountFloor = 1e-10;

// log(exp(a) + exp(b)) without overflow; -inf acts as the additive identity.
inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

// Digamma via upward recurrence into the asymptotic series. Accurate to about
// 1e-12 over the range used here (arguments down to the count floor).
inline double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma requires a positive argument");
  double result = 0.0;
  while (x < 12.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // psi(x) ~ ln x - 1/(2x) - sum B_{2n} / (2n x^{2n})
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = inv2 * (1.0 / 12.0 +
                  inv2 * (-1.0 / 120.0 +
                  inv2 * (1.0 / 252.0 +
                  inv2 * (-1.0 / 240.0 +
                  inv2 * (1.0 / 132.0)))));
  return result + std::log(x) - 0.5 * inv - series;
}

// log C(n, k) through lgamma; n and k need not be small.
inline double log_binomial(double n, double k) {
  if (k < 0.0 || n < 0.0 || k > n)
    throw DomainError("log_binomial arguments outside 0 <= k <= n");
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Upper tail of the standard normal.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace subseg

#endif
