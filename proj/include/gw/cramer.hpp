#pragma once

#include <cstdint>
#include <vector>

#include "gw/limits.hpp"
#include "gw/offspring.hpp"
#include "gw/pmf.hpp"

namespace gw {

// One exponentially tilted copy of Z_n, ready to be summed: X_1(h, n) has
// P(X_1 = k) proportional to e^{-k h / c_n} P(Z_n = k).  The normalizer is
// taken over the stored window of `base`, so `tilted` is exactly stochastic
// on its window no matter how much right tail the base lost.
struct TiltedSumSpec {
  double h = 0.0;
  int n = -1;  // horizon; -1 when built from a bare pmf of unknown depth
  Pmf base;    // law of Z_n
  Pmf tilted;  // law of one summand X_1(h, n)
  double mean1 = 0.0;   // E X_1
  double sigma1 = 0.0;  // sd of X_1
  double c_n = 1.0;
  // Relative gap between the window normalizer and f_n(e^{-h/c_n}); a
  // truncation diagnostic, filled by make_tilted_spec only.
  double normalizer_gap = 0.0;
};

// Tilt a pmf by e^{-k h / c_n}.  h = 0 returns the base untouched.
TiltedSumSpec tilt(const Pmf& base, double h, double c_n);

// Convenience builder: iterates the law to depth n with a window wide
// enough that the cut tail is negligible at the tilt in question, then
// tilts.  Fills the horizon and the normalizer diagnostic.
TiltedSumSpec make_tilted_spec(const OffspringLaw& law, double h, int n,
                               const NormingSequence& norming);

// Law of S_ell = X_1 + ... + X_ell.  The default policy is the fft-hybrid
// path with a window sized from (mean1, sigma1); pass a policy explicitly
// to control the window or force the direct path.
Pmf tilted_sum_pmf(const TiltedSumSpec& spec, int ell);
Pmf tilted_sum_pmf(const TiltedSumSpec& spec, int ell, const ConvPolicy& policy);

// Tilt parameter h with E X_1(h, n) = x c_n, by bisection on the exact
// log-derivative of f_n.  Valid targets have mu^n < x c_n <= m^n; the
// upper boundary returns h = 0 exactly.
double solve_saddle(const OffspringLaw& law, int n, double x, const NormingSequence& norming);

// sup_k P(X = k): the modal probability.
double concentration_sup(const Pmf& pmf);

struct ConcentrationRow {
  int n = 0;
  int ell = 0;
  double value = 0.0;  // ell^{1/2} c_n sup_k P(S_ell = k)
};

// Table of ell^{1/2} c_n sup_k P(S_ell(h, n) = k) over n_set x ell_set.
// Bounded rows (no growth in ell) are the concentration inequality at work.
std::vector<ConcentrationRow> concentration_scaling_report(const OffspringLaw& law, double h,
                                                           const std::vector<int>& n_set,
                                                           const std::vector<int>& ell_set,
                                                           const NormingSequence& norming);

// sup over lattice points k of |ell^{1/2} sigma1 P(S_ell = k)
//   - (d / sqrt(2 pi)) e^{-x_k^2 / 2}|   with x_k = (k - ell mean1) / (ell^{1/2} sigma1),
// the local-CLT discrepancy of the tilted sum.  Requires h > 0.
double lclt_error(const OffspringLaw& law, double h, int n, int ell,
                  const NormingSequence& norming);

// Fit of c_n P(Z_n = k | Z_0 = ell) <= A e^{k / c_n} ell^{-1/2} e^{-delta ell}.
// fit_values[i] is N_ell = ell^{1/2} sup_k c_n P(Z_n = k | Z_0 = ell) e^{-k/c_n}
// at ell = fit_ells[i]; delta comes from the decay of log N_ell (rounded down
// to the 0.01 grid) and A is the smallest constant covering the fit grid at
// that delta.  max_holdout_ratio <= 1 means the bound extends to the
// held-out ells unchanged.
struct NonuniformReport {
  double a = 0.0;
  double delta = 0.0;
  std::vector<int> fit_ells;
  std::vector<double> fit_values;
  std::vector<int> holdout_ells;
  double max_holdout_ratio = 0.0;
};

NonuniformReport nonuniform_bound_check(const OffspringLaw& law, int n, int ell_max,
                                        const NormingSequence& norming);

}  // namespace gw
