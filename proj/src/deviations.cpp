#include "gw/deviations.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gw/errors.hpp"
#include "gw/exactdist.hpp"
#include "gw/logsum.hpp"

namespace gw {

namespace {

std::int64_t pow_i64(std::int64_t base, int e) {
  std::int64_t v = 1;
  for (int i = 0; i < e; ++i) {
    if (v > (std::int64_t{1} << 62) / std::max<std::int64_t>(base, 1)) {
      throw TargetOutOfRange("integer power exceeds the representable range");
    }
    v *= base;
  }
  return v;
}

// Residue of the support lattice of Z_n, which is mu^n mod d.
std::int64_t generation_residue(std::int64_t mu, int n, std::int64_t d) {
  if (d == 1) return 0;
  std::int64_t r = 1 % d;
  std::int64_t b = mu % d;
  for (int e = n; e > 0; e >>= 1) {
    if (e & 1) r = (r * b) % d;
    b = (b * b) % d;
  }
  return r;
}

void require_on_lattice(std::int64_t k, const LawProfile& pr, int n) {
  std::int64_t r = generation_residue(pr.mu, n, pr.d);
  if (((k % pr.d) + pr.d) % pr.d != r) {
    throw LatticeMismatch("k = " + std::to_string(k) + " is not a support point of generation " +
                          std::to_string(n));
  }
}

// Policy for a pmf whose window must reach k exactly: right truncation past
// the query is deliberate, so the single-step cut allowance is lifted.  The
// fft path engages already at moderate widths; these windows hold slowly
// varying left tails where its rounding noise is far below any tolerance
// applied to the rows.
ConvPolicy window_policy(std::int64_t entries, ConvMode mode) {
  ConvPolicy pol;
  pol.mode = mode;
  pol.window_cap = std::max<std::int64_t>(entries, 2);
  pol.tail_tol = 1.0;
  pol.fft_min_width = 256;
  return pol;
}

Pmf generation_window(const OffspringLaw& law, const LawProfile& pr, int n, std::int64_t k,
                      ConvMode mode) {
  std::int64_t lo = pow_i64(pr.mu, n);
  if (k < lo) throw UsageError("k lies left of the minimal generation size");
  // The window cap counts integers, not lattice points.
  std::int64_t span = (k - lo) + 1 + 8 * pr.d;
  return iterate_pmf(law, n, 1, window_policy(span, mode));
}

bool prefix_unreliable(const Pmf& p, std::int64_t k) {
  if (p.unreliable_below() == kNegInf) return false;
  for (std::int64_t j = p.lo(); j <= std::min(k, p.hi()); j += p.lattice().d) {
    if (p.entry_unreliable(j)) return true;
  }
  return false;
}

double checked_density_log(const Approximated<double>& v, double x) {
  if (!(v.value > 0.0) || v.residual > 0.5 * v.value) {
    throw TargetOutOfRange("martingale limit value at x = " + std::to_string(x) +
                           " is below the reliable range of the inversion");
  }
  return std::log(v.value);
}

}  // namespace

int a_index(const NormingSequence& norming, std::int64_t k) {
  if (k < 1) throw UsageError("a_index needs k >= 1");
  // The threshold test tolerates the rounding of c_ell = exp(ell log m):
  // integer powers of the mean land within an ulp of the integer k they
  // should tie with, and a tie must count as reached.
  double thresh = static_cast<double>(k) * (1.0 - 1e-12);
  for (int ell = 1; ell <= norming.n_max(); ++ell) {
    if (!(norming.at(ell) < thresh)) return ell;
  }
  throw BeyondNorming("a_index: k exceeds the last tabulated norming constant");
}

int b_index(const NormingSequence& norming, const LawProfile& profile, int n, std::int64_t k) {
  if (profile.mu < 2) throw NotBoettcher("b_index needs a minimal family size of at least 2");
  if (n < 0) throw UsageError("b_index needs n >= 0");
  double lmu = std::log(static_cast<double>(profile.mu));
  if (k < 1 || std::log(static_cast<double>(k)) < n * lmu - 1e-9) {
    throw UsageError("b_index needs k at least the minimal generation size");
  }
  double target = std::log(2.0) + std::log(static_cast<double>(k));
  double slack = 1e-12 * std::max(1.0, std::abs(target));
  for (int ell = 0; ell <= norming.n_max(); ++ell) {
    if (norming.log_at(ell) + (n - ell) * lmu >= target - slack) return ell;
  }
  throw NoSuchIndex("b_index: no tabulated index reaches 2k on the mixed scale");
}

double schroeder_predict(const OffspringLaw& law, const NormingSequence& norming, int n,
                         std::int64_t k, const QuadParams& params) {
  LawProfile pr = classify(law);
  if (!pr.schroeder()) throw NotSchroeder("point predictor needs a law with p_1 > 0");
  if (n < 1) throw UsageError("predictor needs n >= 1");
  require_on_lattice(k, pr, n);
  int a = a_index(norming, k);
  double log_scale = (n - a) * std::log(pr.m) + norming.log_at(a);
  double x = std::exp(std::log(static_cast<double>(k)) - log_scale);
  double lw = checked_density_log(density_W(law, x, norming, params), x);
  return std::exp(std::log(static_cast<double>(pr.d)) - log_scale + lw);
}

double schroeder_predict_cdf(const OffspringLaw& law, const NormingSequence& norming, int n,
                             std::int64_t k, const QuadParams& params) {
  LawProfile pr = classify(law);
  if (!pr.schroeder()) throw NotSchroeder("cdf predictor needs a law with p_1 > 0");
  if (n < 1) throw UsageError("predictor needs n >= 1");
  require_on_lattice(k, pr, n);
  int a = a_index(norming, k);
  double log_scale = (n - a) * std::log(pr.m) + norming.log_at(a);
  double x = std::exp(std::log(static_cast<double>(k)) - log_scale);
  auto cv = cdf_W(law, x, norming, params);
  checked_density_log(cv, x);
  return std::min(cv.value, 1.0);
}

std::vector<std::int64_t> make_power_schedule(const OffspringLaw& law,
                                              const NormingSequence& norming, double rho,
                                              int n_from, int n_to) {
  if (!(rho > 0.0) || !(rho <= 1.0)) throw UsageError("rho must lie in (0, 1]");
  if (n_from < 1 || n_to < n_from) throw UsageError("schedule needs 1 <= n_from <= n_to");
  LawProfile pr = classify(law);
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(n_to - n_from + 1));
  for (int n = n_from; n <= n_to; ++n) {
    double target = std::exp(rho * norming.log_at(n));
    if (!(target < 4e18)) throw TargetOutOfRange("schedule point exceeds the integer range");
    std::int64_t mu_n = pow_i64(pr.mu, n);
    std::int64_t k = mu_n;
    if (target > static_cast<double>(mu_n)) {
      std::int64_t base = static_cast<std::int64_t>(std::ceil(target - 1e-9));
      std::int64_t r = generation_residue(pr.mu, n, pr.d);
      k = base + (((r - base) % pr.d) + pr.d) % pr.d;
      k = std::max(k, mu_n);
    }
    out.push_back(k);
  }
  return out;
}

DeviationReport schroeder_ratio_table(const OffspringLaw& law, const NormingSequence& norming,
                                      const std::vector<std::int64_t>& k_schedule, int n_from,
                                      int n_to, bool use_cdf, const QuadParams& params) {
  LawProfile pr = classify(law);
  if (!pr.schroeder()) throw NotSchroeder("ratio table needs a law with p_1 > 0");
  if (n_from < 1 || n_to < n_from) throw UsageError("ratio table needs 1 <= n_from <= n_to");
  if (k_schedule.size() != static_cast<std::size_t>(n_to - n_from + 1)) {
    throw UsageError("k_schedule must provide one point per generation in [n_from, n_to]");
  }

  WTransform transform(law, norming, params);
  DeviationReport rep;
  rep.profile = pr;
  rep.mode = norming.mode;
  rep.schedule = std::string(use_cdf ? "cdf" : "point") + " ratios, n = " +
                 std::to_string(n_from) + ".." + std::to_string(n_to);
  rep.rows.reserve(k_schedule.size());

  for (std::size_t i = 0; i < k_schedule.size(); ++i) {
    int n = n_from + static_cast<int>(i);
    std::int64_t k = k_schedule[i];
    require_on_lattice(k, pr, n);

    Pmf p = generation_window(law, pr, n, k, ConvMode::FftHybrid);
    DeviationRow row;
    row.n = n;
    row.k = k;
    row.exact_log = use_cdf ? p.log_cdf_at(k) : p.log_at(k);
    row.flagged = use_cdf ? prefix_unreliable(p, k) : p.entry_unreliable(k);
    row.index = a_index(norming, k);

    double log_scale = (n - row.index) * std::log(pr.m) + norming.log_at(row.index);
    double x = std::exp(std::log(static_cast<double>(k)) - log_scale);
    if (use_cdf) {
      row.predicted_log = checked_density_log(transform.cdf(x), x);
    } else {
      row.predicted_log = std::log(static_cast<double>(pr.d)) - log_scale +
                          checked_density_log(transform.density(x), x);
    }
    row.ratio = std::exp(row.exact_log - row.predicted_log);
    rep.rows.push_back(row);
  }
  return rep;
}

double boettcher_log_ratio(const OffspringLaw& law, const NormingSequence& norming, int n,
                           std::int64_t k) {
  LawProfile pr = classify(law);
  if (pr.mu < 2) throw NotBoettcher("log-ratio needs a minimal family size of at least 2");
  if (n < 1) throw UsageError("log-ratio needs n >= 1");
  require_on_lattice(k, pr, n);
  int b = b_index(norming, pr, n, k);
  Pmf p = generation_window(law, pr, n, k, ConvMode::DirectLog);
  double lp = p.log_at(k);
  return std::pow(static_cast<double>(pr.mu), b - n) * (norming.log_at(n) + lp);
}

double boettcher_log_ratio_cdf(const OffspringLaw& law, const NormingSequence& norming, int n,
                               std::int64_t k) {
  LawProfile pr = classify(law);
  if (pr.mu < 2) throw NotBoettcher("log-ratio needs a minimal family size of at least 2");
  if (n < 1) throw UsageError("log-ratio needs n >= 1");
  require_on_lattice(k, pr, n);
  int b = b_index(norming, pr, n, k);
  Pmf p = generation_window(law, pr, n, k, ConvMode::DirectLog);
  return std::pow(static_cast<double>(pr.mu), b - n) * p.log_cdf_at(k);
}

double minimal_point_logprob(const LawProfile& profile, int n) {
  if (n < 0) throw UsageError("minimal point needs n >= 0");
  if (!(profile.p_mu > 0.0)) throw UsageError("profile carries no minimal-atom weight");
  if (n == 0) return 0.0;
  double lp = std::log(profile.p_mu);
  if (profile.mu == 1) return static_cast<double>(n) * lp;
  double mu = static_cast<double>(profile.mu);
  return (std::pow(mu, n) - 1.0) / (mu - 1.0) * lp;
}

DeviationReport neighbor_ratio_report(const OffspringLaw& law, int n_from, int n_to,
                                      std::int64_t k_offset) {
  LawProfile pr = classify(law);
  if (n_from < 1 || n_to < n_from) throw UsageError("ratio report needs 1 <= n_from <= n_to");
  if (k_offset < 0) throw UsageError("offset must be nonnegative");
  if (k_offset % pr.d != 0) {
    throw LatticeMismatch("offset must be a multiple of the support spacing");
  }

  DeviationReport rep;
  rep.profile = pr;
  rep.schedule = "minimal point + " + std::to_string(k_offset) + ", n = " +
                 std::to_string(n_from) + ".." + std::to_string(n_to);
  double lmu = std::log(static_cast<double>(pr.mu));
  for (int n = n_from; n <= n_to; ++n) {
    std::int64_t mu_n = pow_i64(pr.mu, n);
    Pmf p = generation_window(law, pr, n, mu_n + k_offset, ConvMode::DirectLog);
    DeviationRow row;
    row.n = n;
    row.k = mu_n + k_offset;
    row.exact_log = p.log_at(row.k);
    row.predicted_log = static_cast<double>(n) * static_cast<double>(k_offset) * lmu +
                        p.log_at(mu_n);
    row.ratio = std::exp(row.exact_log - row.predicted_log);
    rep.rows.push_back(row);
  }
  return rep;
}

DeviationReport log_scale_limit_check(const OffspringLaw& law, int n_from, int n_to,
                                      std::int64_t k_offset) {
  LawProfile pr = classify(law);
  if (n_from < 1 || n_to < n_from) throw UsageError("limit check needs 1 <= n_from <= n_to");
  if (k_offset < 0) throw UsageError("offset must be nonnegative");
  if (k_offset % pr.d != 0) {
    throw LatticeMismatch("offset must be a multiple of the support spacing");
  }

  DeviationReport rep;
  rep.profile = pr;
  rep.schedule = "log scale at minimal point + " + std::to_string(k_offset) + ", n = " +
                 std::to_string(n_from) + ".." + std::to_string(n_to);
  for (int n = n_from; n <= n_to; ++n) {
    std::int64_t mu_n = pow_i64(pr.mu, n);
    Pmf p = generation_window(law, pr, n, mu_n + k_offset, ConvMode::DirectLog);
    DeviationRow row;
    row.n = n;
    row.k = mu_n + k_offset;
    row.exact_log = p.log_at(row.k);
    row.predicted_log = std::log(pr.p_mu);
    row.ratio = row.exact_log * std::pow(static_cast<double>(pr.mu), -n);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace gw
