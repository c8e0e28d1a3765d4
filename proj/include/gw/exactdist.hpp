#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "gw/offspring.hpp"
#include "gw/pmf.hpp"

namespace gw {

// Exact distribution of the generation size Z_n with Z_0 = z0.
//
// The recursion runs backward in the family tree: Z_{n+1} is a sum of X
// independent copies of Z_n, X drawn from the offspring law.  Each
// generation is therefore a small mixture of convolution powers of the
// previous pmf, never a k-fold power for large k.  Windows follow the
// common-width rule of the convolution engine, so every stored entry is
// exact no matter how much right tail has been cut.
Pmf iterate_pmf(const OffspringLaw& law, int n, std::int64_t z0 = 1,
                const ConvPolicy& policy = ConvPolicy{});

// log P(Z_n = k) and log P(Z_n <= k).  The window is sized to the query, so
// these are exact for any k the policy's window_cap can reach.
double point_log_prob(const OffspringLaw& law, int n, std::int64_t k, std::int64_t z0 = 1,
                      const ConvPolicy& policy = ConvPolicy{});
double cdf_log_leq(const OffspringLaw& law, int n, std::int64_t k, std::int64_t z0 = 1,
                   const ConvPolicy& policy = ConvPolicy{});

// Generating function of Z_n (one ancestor) at a point of the closed unit
// disk, by direct iteration.
std::complex<double> evaluate_fn(const OffspringLaw& law, int n, std::complex<double> z);

// Logarithms of f_n, f_n' and f_n'' at s = e^t, t <= 0, computed entirely
// in the log domain.  Stable down to t around -1e6 where f_n(s) itself is
// far below the smallest double.
struct LogDerivs {
  double lf;  // log f_n(e^t)
  double l1;  // log f_n'(e^t)
  double l2;  // log f_n''(e^t), -inf when n = 0
};
LogDerivs log_fn_derivs(const OffspringLaw& law, int n, double t);

// Monte Carlo draw of Z_n, one entry per replicate.  Deterministic for a
// fixed seed on every platform.
std::vector<std::int64_t> simulate(const OffspringLaw& law, int n, std::int64_t reps,
                                   std::uint64_t seed, std::int64_t z0 = 1,
                                   std::int64_t pop_cap = 100000000);

}  // namespace gw
