#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gw/limits.hpp"
#include "gw/offspring.hpp"

namespace gw {

// One probe of a lower-deviation statement: the engine value at (n, k),
// the theorem-side quantity, and their comparison.  `ratio` holds
// exact/predicted for the ratio-style tables and the normalized bound
// value for the band-style ones; `index` is the a- or b-index where one
// participates.  A flagged row's exact value came out of an entry the
// engine marked unreliable, or off the stored window.
struct DeviationRow {
  int n = 0;
  std::int64_t k = 0;
  double exact_log = 0.0;
  double predicted_log = 0.0;
  double ratio = 0.0;
  int index = 0;
  bool flagged = false;
};

struct DeviationReport {
  LawProfile profile;
  NormingMode mode = NormingMode::Power;
  std::string schedule;
  std::vector<DeviationRow> rows;
};

// Minimal ell >= 1 with c_ell >= k.
int a_index(const NormingSequence& norming, std::int64_t k);

// Minimal ell >= 0 with c_ell mu^{n-ell} >= 2k.  The index may exceed n
// for deep schedules; it is only refused when even the last tabulated
// norming constant fails the threshold.
int b_index(const NormingSequence& norming, const LawProfile& profile, int n, std::int64_t k);

// Point predictor d/(m^{n-a} c_a) * w(k/(m^{n-a} c_a)) with a = a_index(k),
// and its cdf companion F_W(k/(m^{n-a} c_a)).  With power norming the
// scale collapses to m^n.  The density is refused (TargetOutOfRange) when
// its residual swamps the value.
double schroeder_predict(const OffspringLaw& law, const NormingSequence& norming, int n,
                         std::int64_t k, const QuadParams& params = {});
double schroeder_predict_cdf(const OffspringLaw& law, const NormingSequence& norming, int n,
                             std::int64_t k, const QuadParams& params = {});

// k_n = smallest support point of Z_n at or above c_n^rho, for
// n = n_from..n_to.
std::vector<std::int64_t> make_power_schedule(const OffspringLaw& law,
                                              const NormingSequence& norming, double rho,
                                              int n_from, int n_to);

// Ratio table exact/predicted over an explicit schedule (k_schedule[i]
// belongs to n_from + i).  use_cdf switches both sides to the cdf forms.
DeviationReport schroeder_ratio_table(const OffspringLaw& law, const NormingSequence& norming,
                                      const std::vector<std::int64_t>& k_schedule, int n_from,
                                      int n_to, bool use_cdf = false,
                                      const QuadParams& params = {});

// mu^{b-n} (log c_n + log P(Z_n = k)) and the cdf variant
// mu^{b-n} log P(Z_n <= k), the bounded functionals of the
// double-exponential lower-deviation regime.
double boettcher_log_ratio(const OffspringLaw& law, const NormingSequence& norming, int n,
                           std::int64_t k);
double boettcher_log_ratio_cdf(const OffspringLaw& law, const NormingSequence& norming, int n,
                               std::int64_t k);

// log P(Z_n = mu^n) in closed form: ((mu^n - 1)/(mu - 1)) log p_mu.
double minimal_point_logprob(const LawProfile& profile, int n);

// Rows of P(Z_n = mu^n + k_offset) / (mu^{n k_offset} P(Z_n = mu^n)), the
// stabilizing ratio at the left edge of the support.
DeviationReport neighbor_ratio_report(const OffspringLaw& law, int n_from, int n_to,
                                      std::int64_t k_offset);

// Rows of mu^{-n} log P(Z_n = mu^n + k_offset), converging to log p_mu.
DeviationReport log_scale_limit_check(const OffspringLaw& law, int n_from, int n_to,
                                      std::int64_t k_offset);

}  // namespace gw
