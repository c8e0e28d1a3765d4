#include "gw/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "gw/errors.hpp"

namespace gw {

FilonMoments filon_moments(double theta) {
  const double t2 = theta * theta;
  if (std::abs(theta) < 0.2) {
    /* Power series of the closed forms below.  The closed forms subtract
       terms agreeing through O(theta^2), so for small theta the series is
       the accurate branch; truncation after theta^6 stays under 2e-11. */
    const double m0 = 2.0 * (1.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2 * t2 * t2 / 5040.0);
    const double m1 =
        -2.0 * theta * (1.0 / 3.0 - t2 / 30.0 + t2 * t2 / 840.0 - t2 * t2 * t2 / 45360.0);
    const double m2 = 2.0 * (1.0 / 3.0 - t2 / 10.0 + t2 * t2 / 168.0 - t2 * t2 * t2 / 6480.0);
    return {{m0, 0.0}, {0.0, m1}, {m2, 0.0}};
  }
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double m0 = 2.0 * s / theta;
  const double m1 = -2.0 * (s - theta * c) / t2;
  const double m2 = 2.0 * ((t2 - 2.0) * s + 2.0 * theta * c) / (t2 * theta);
  return {{m0, 0.0}, {0.0, m1}, {m2, 0.0}};
}

FilonMoments filon_moments_partial(double theta, double a, double b) {
  if (!(a >= -1.0 - 1e-12 && b <= 1.0 + 1e-12 && a <= b)) {
    throw UsageError("filon_moments_partial: need -1 <= a <= b <= 1");
  }
  if (std::abs(theta) < 0.5) {
    // sum over j of (-i theta)^j / j! * (b^{k+j+1} - a^{k+j+1}) / (k+j+1)
    double bpow[28];
    double apow[28];
    bpow[0] = 1.0;
    apow[0] = 1.0;
    for (int p = 1; p < 28; ++p) {
      bpow[p] = bpow[p - 1] * b;
      apow[p] = apow[p - 1] * a;
    }
    std::complex<double> m[3] = {};
    std::complex<double> coef(1.0, 0.0);
    for (int j = 0; j + 3 < 28; ++j) {
      for (int k = 0; k <= 2; ++k) {
        const int p = k + j + 1;
        m[k] += coef * ((bpow[p] - apow[p]) / static_cast<double>(p));
      }
      coef *= std::complex<double>(0.0, -theta) / static_cast<double>(j + 1);
      if (std::abs(coef.real()) + std::abs(coef.imag()) < 1e-20) break;
    }
    return {m[0], m[1], m[2]};
  }
  const std::complex<double> itheta(0.0, theta);
  const std::complex<double> ea = std::exp(std::complex<double>(0.0, -theta * a));
  const std::complex<double> eb = std::exp(std::complex<double>(0.0, -theta * b));
  const std::complex<double> m0 = (ea - eb) / itheta;
  const std::complex<double> m1 = (1.0 * m0 - (b * eb - a * ea)) / itheta;
  const std::complex<double> m2 = (2.0 * m1 - (b * b * eb - a * a * ea)) / itheta;
  return {m0, m1, m2};
}

double power_law_extrapolate(const double* levels_data, int levels, double e0) {
  if (levels < 2 || levels > 5) {
    throw UsageError("power_law_extrapolate: levels must lie in [2, 5]");
  }
  if (!(e0 > 0.0)) {
    throw UsageError("power_law_extrapolate: decay exponent must be positive");
  }
  double A[5][6];
  for (int j = 0; j < levels; ++j) {
    A[j][0] = 1.0;
    for (int k = 1; k < levels; ++k) {
      A[j][k] = std::pow(2.0, -static_cast<double>(j) * (e0 + static_cast<double>(k - 1)));
    }
    A[j][levels] = levels_data[j];
  }
  for (int col = 0; col < levels; ++col) {
    int piv = col;
    for (int r = col + 1; r < levels; ++r) {
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    }
    if (A[piv][col] == 0.0) throw NumericFailure("power_law_extrapolate: singular system");
    if (piv != col) {
      for (int cc = 0; cc <= levels; ++cc) std::swap(A[piv][cc], A[col][cc]);
    }
    for (int r = 0; r < levels; ++r) {
      if (r == col) continue;
      const double f = A[r][col] / A[col][col];
      for (int cc = col; cc <= levels; ++cc) A[r][cc] -= f * A[col][cc];
    }
  }
  return A[0][levels] / A[0][0];
}

double sin_integral(double z) {
  if (z < 0.0) return -sin_integral(-z);
  if (z == 0.0) return 0.0;
  if (z <= 20.0) {
    // sum of (-1)^k z^{2k+1} / ((2k+1) (2k+1)!) in extended precision; the
    // largest term near k = z/2 costs about six digits of cancellation at
    // z = 20, which long double absorbs.
    const long double zz = static_cast<long double>(z) * static_cast<long double>(z);
    long double p = z;  // z^{2k+1} / (2k+1)!
    long double sum = 0.0L;
    for (int k = 0; k < 200; ++k) {
      const long double add = p / static_cast<long double>(2 * k + 1);
      sum += (k & 1) ? -add : add;
      p *= zz / (static_cast<long double>(2 * k + 2) * static_cast<long double>(2 * k + 3));
      if (p < 1e-24L * std::abs(sum) * static_cast<long double>(2 * k + 3)) break;
    }
    return static_cast<double>(sum);
  }
  /* Si(z) = pi/2 - cos(z)/z * P(1/z^2) - sin(z)/z^2 * Q(1/z^2) with the
     asymptotic series P = 1 - 2!/z^2 + 4!/z^4 - ..., Q = 1 - 3!/z^2 + ...;
     truncated at the smallest term, good to ~1e-9 at z = 20 and improving
     fast beyond. */
  const double zi2 = 1.0 / (z * z);
  double P = 0.0;
  double tP = 1.0;
  for (int k = 0; k < 40; ++k) {
    P += tP;
    const double nt = -tP * (2.0 * k + 1.0) * (2.0 * k + 2.0) * zi2;
    if (std::abs(nt) >= std::abs(tP)) break;
    tP = nt;
  }
  double Q = 0.0;
  double tQ = 1.0;
  for (int k = 0; k < 40; ++k) {
    Q += tQ;
    const double nt = -tQ * (2.0 * k + 2.0) * (2.0 * k + 3.0) * zi2;
    if (std::abs(nt) >= std::abs(tQ)) break;
    tQ = nt;
  }
  const double half_pi = 1.5707963267948966;
  return half_pi - std::cos(z) / z * P - std::sin(z) / (z * z) * Q;
}

}  // namespace gw
