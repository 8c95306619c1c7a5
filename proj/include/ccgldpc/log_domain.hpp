#pragma once

#include <cmath>
#include <limits>

namespace ccgldpc {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  if (a < b) {
    double t = a;
    a = b;
    b = t;
  }
  return a + std::log1p(std::exp(b - a));
}

inline double log_factorial(long n) { return std::lgamma(double(n) + 1.0); }

inline double log_choose(long n, long k) {
  if (k < 0 || k > n) return kLogZero;
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

}  // namespace ccgldpc
