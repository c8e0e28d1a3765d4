#pragma once

#include <complex>

namespace gw {

// Moments of the oscillatory weight over the reference panel [-1, 1]:
//
//   m_k(theta) = integral over t in [-1, 1] of t^k e^{-i theta t} dt
//
// for k = 0, 1, 2.  Fitting a slowly varying factor by a quadratic through
// the panel's three nodes and pairing the coefficients with these moments
// integrates factor * oscillation with the oscillation handled exactly, so
// panel width is limited by the factor's smoothness, not by the frequency.
struct FilonMoments {
  std::complex<double> m0;
  std::complex<double> m1;
  std::complex<double> m2;
};

FilonMoments filon_moments(double theta);

// The same moments restricted to [a, b] inside [-1, 1], for integration
// limits that land mid-panel.  -1 <= a <= b <= 1.
FilonMoments filon_moments_partial(double theta, double a, double b);

// Extrapolates partial integrals I[j] = I(U * 2^j), j = 0..levels-1, whose
// remainder is a combination of U^{-(e0+k)} for k = 0..levels-2.  Solves
// the small linear system for the constant term and returns it.
double power_law_extrapolate(const double* levels_data, int levels, double e0);

// Si(z) = integral of sin(t)/t over [0, z]; odd in z.
double sin_integral(double z);

}  // namespace gw
