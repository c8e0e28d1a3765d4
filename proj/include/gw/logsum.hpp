#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace gw {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(e^x + e^y) without leaving the log domain.  The guard threshold skips
// the transcendental work once the smaller term cannot move the result at
// double precision.
inline double log_add(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  if (x < y) std::swap(x, y);
  const double d = y - x;
  if (d < -745.0) return x;
  return x + std::log1p(std::exp(d));
}

// log(sum_i e^{v_i}) via a max shift; exact for empty input (-inf).
inline double log_sum(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v)
    if (x > m) m = x;
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v)
    if (x != kNegInf) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace gw
