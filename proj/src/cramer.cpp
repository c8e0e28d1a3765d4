#include "gw/cramer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gw/errors.hpp"
#include "gw/exactdist.hpp"
#include "gw/logsum.hpp"

namespace gw {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Window wide enough that the right tail cut behind it is far below any
// tolerance in play: everything up to the untilted mean plus a generous
// multiple of c_n, stretched further when the tilt is weak.
std::int64_t base_window_cap(double m, int n, double c_n, double h) {
  double want = std::pow(m, n) + c_n * (40.0 + 32.0 / std::max(h, 0.8)) + 64.0;
  double cap = std::min(want, 4194304.0);
  return static_cast<std::int64_t>(std::ceil(cap));
}

}  // namespace

TiltedSumSpec tilt(const Pmf& base, double h, double c_n) {
  if (!(h >= 0.0) || !std::isfinite(h)) throw UsageError("tilt: h must be finite and >= 0");
  if (!(c_n > 0.0) || !std::isfinite(c_n)) throw UsageError("tilt: c_n must be finite and > 0");
  if (base.width() == 0) throw UsageError("tilt: empty pmf");

  TiltedSumSpec spec;
  spec.h = h;
  spec.c_n = c_n;
  spec.base = base;

  if (h == 0.0) {
    spec.tilted = base;
  } else {
    const auto& lw = base.log_weights();
    std::vector<double> tw(lw.size(), kNegInf);
    const double rate = h / c_n;
    for (std::size_t i = 0; i < lw.size(); ++i) {
      if (lw[i] == kNegInf) continue;
      tw[i] = lw[i] - static_cast<double>(base.lo() + static_cast<std::int64_t>(i)) * rate;
    }
    const double ls = log_sum(tw);
    if (ls == kNegInf) throw NumericFailure("tilt: tilted mass underflowed");
    for (double& v : tw)
      if (v != kNegInf) v -= ls;
    spec.tilted = Pmf(base.lo(), std::move(tw), 0.0, base.lattice());
    spec.tilted.set_unreliable_below(base.unreliable_below() == kNegInf
                                         ? kNegInf
                                         : base.unreliable_below() - ls);
  }

  spec.mean1 = spec.tilted.mean();
  const double s2 = spec.tilted.second_moment();
  spec.sigma1 = std::sqrt(std::max(0.0, s2 - spec.mean1 * spec.mean1));
  return spec;
}

TiltedSumSpec make_tilted_spec(const OffspringLaw& law, double h, int n,
                               const NormingSequence& norming) {
  if (n < 1) throw UsageError("make_tilted_spec: n must be >= 1");
  if (!(h >= 0.0) || !std::isfinite(h)) throw UsageError("make_tilted_spec: h must be >= 0");
  const double c_n = norming.at(n);

  ConvPolicy pol;
  pol.mode = ConvMode::FftHybrid;
  pol.window_cap = base_window_cap(law.mean(), n, c_n, h);
  Pmf base = iterate_pmf(law, n, 1, pol);

  TiltedSumSpec spec = tilt(base, h, c_n);
  spec.n = n;

  // Window normalizer vs the full generating function: the relative gap is
  // the tilted mass lost to the right-tail cut.
  double log_z;
  if (h == 0.0) {
    log_z = std::log(spec.base.mass());
  } else {
    const std::int64_t k = spec.tilted.argmax();
    log_z = spec.base.log_at(k) - static_cast<double>(k) * (h / c_n) - spec.tilted.log_at(k);
  }
  const LogDerivs lg = log_fn_derivs(law, n, -h / c_n);
  spec.normalizer_gap = std::abs(std::expm1(log_z - lg.lf));
  return spec;
}

Pmf tilted_sum_pmf(const TiltedSumSpec& spec, int ell) {
  ConvPolicy pol;
  pol.mode = ConvMode::FftHybrid;
  const double lo1 = static_cast<double>(spec.tilted.lo());
  const double want = static_cast<double>(ell) * (spec.mean1 - lo1) +
                      40.0 * (spec.sigma1 * std::sqrt(static_cast<double>(ell)) + spec.c_n) +
                      64.0;
  pol.window_cap = std::min<std::int64_t>(static_cast<std::int64_t>(std::ceil(want)),
                                          std::int64_t{1} << 22);
  return tilted_sum_pmf(spec, ell, pol);
}

Pmf tilted_sum_pmf(const TiltedSumSpec& spec, int ell, const ConvPolicy& policy) {
  if (ell < 1) throw UsageError("tilted_sum_pmf: ell must be >= 1");
  if (spec.tilted.width() == 0) throw UsageError("tilted_sum_pmf: empty spec");
  return convolve_power(spec.tilted, ell, policy);
}

double solve_saddle(const OffspringLaw& law, int n, double x, const NormingSequence& norming) {
  if (n < 0) throw UsageError("solve_saddle: n must be >= 0");
  if (!(x > 0.0) || !std::isfinite(x)) throw TargetOutOfRange("solve_saddle: x must be > 0");
  const LawProfile prof = classify(law);
  const double lcn = norming.log_at(n);
  const double target = std::log(x) + lcn;
  const double log_upper = n * std::log(prof.m);
  const double log_lower = n * std::log(static_cast<double>(prof.mu));

  const double slack = 1e-12 * std::max(1.0, std::abs(log_upper));
  if (target > log_upper + slack)
    throw TargetOutOfRange("solve_saddle: x c_n above the mean m^n");
  if (target >= log_upper - slack) return 0.0;
  if (target <= log_lower)
    throw TargetOutOfRange("solve_saddle: x c_n at or below the minimum mu^n");
  if (n == 0) return 0.0;  // unreachable: the window above is empty for n = 0

  const double c_n = norming.at(n);
  const auto mean_log = [&](double h) {
    const double t = -h / c_n;
    const LogDerivs lg = log_fn_derivs(law, n, t);
    return t + lg.l1 - lg.lf;
  };

  // E X_1(h, n) is strictly decreasing in h, from m^n at h = 0 toward mu^n.
  double h_lo = 0.0;
  double h_hi = 1.0;
  int doublings = 0;
  while (mean_log(h_hi) > target) {
    h_lo = h_hi;
    h_hi *= 2.0;
    if (++doublings > 60)
      throw TargetOutOfRange("solve_saddle: target mean not reachable by any finite tilt");
  }

  double h = 0.5 * (h_lo + h_hi);
  for (int iter = 0; iter < 200; ++iter) {
    h = 0.5 * (h_lo + h_hi);
    const double g = mean_log(h);
    if (std::abs(g - target) < 5e-11) return h;
    if (g > target)
      h_lo = h;
    else
      h_hi = h;
    if (h_hi - h_lo < 1e-16 * std::max(1.0, h_hi)) break;
  }
  return h;
}

double concentration_sup(const Pmf& pmf) {
  if (pmf.width() == 0) throw UsageError("concentration_sup: empty pmf");
  return std::exp(pmf.max_log());
}

std::vector<ConcentrationRow> concentration_scaling_report(const OffspringLaw& law, double h,
                                                           const std::vector<int>& n_set,
                                                           const std::vector<int>& ell_set,
                                                           const NormingSequence& norming) {
  if (n_set.empty() || ell_set.empty())
    throw UsageError("concentration_scaling_report: empty n_set or ell_set");
  std::vector<ConcentrationRow> rows;
  rows.reserve(n_set.size() * ell_set.size());
  for (int n : n_set) {
    const TiltedSumSpec spec = make_tilted_spec(law, h, n, norming);
    for (int ell : ell_set) {
      const Pmf s = tilted_sum_pmf(spec, ell);
      ConcentrationRow row;
      row.n = n;
      row.ell = ell;
      row.value = std::sqrt(static_cast<double>(ell)) * spec.c_n * concentration_sup(s);
      rows.push_back(row);
    }
  }
  return rows;
}

double lclt_error(const OffspringLaw& law, double h, int n, int ell,
                  const NormingSequence& norming) {
  if (!(h > 0.0)) throw UsageError("lclt_error: needs a strict tilt h > 0");
  if (ell < 1) throw UsageError("lclt_error: ell must be >= 1");
  const TiltedSumSpec spec = make_tilted_spec(law, h, n, norming);
  const Pmf s = tilted_sum_pmf(spec, ell);

  const double sd = spec.sigma1 * std::sqrt(static_cast<double>(ell));
  const double mean = spec.mean1 * static_cast<double>(ell);
  const std::int64_t d = s.lattice().d;
  const double gauss_coef = static_cast<double>(d) / std::sqrt(2.0 * kPi);

  const auto& lw = s.log_weights();
  double err = 0.0;
  for (std::int64_t idx = 0; idx < s.width(); idx += d) {
    const std::int64_t k = s.lo() + idx;
    const double p = lw[static_cast<std::size_t>(idx)] == kNegInf
                         ? 0.0
                         : std::exp(lw[static_cast<std::size_t>(idx)]);
    const double xk = (static_cast<double>(k) - mean) / sd;
    const double g = gauss_coef * std::exp(-0.5 * xk * xk);
    err = std::max(err, std::abs(sd * p - g));
  }
  // Lattice points below the support minimum carry zero probability but a
  // live Gaussian term.
  for (std::int64_t k = s.lo() - d;; k -= d) {
    const double xk = (static_cast<double>(k) - mean) / sd;
    const double g = gauss_coef * std::exp(-0.5 * xk * xk);
    if (g <= err * 1e-6 || xk < -50.0) break;
    err = std::max(err, g);
  }
  return err;
}

NonuniformReport nonuniform_bound_check(const OffspringLaw& law, int n, int ell_max,
                                        const NormingSequence& norming) {
  if (n < 1) throw UsageError("nonuniform_bound_check: n must be >= 1");
  if (ell_max < 8) throw UsageError("nonuniform_bound_check: ell_max must be >= 8");
  const double c_n = norming.at(n);

  ConvPolicy pol0;
  pol0.mode = ConvMode::FftHybrid;
  pol0.window_cap = base_window_cap(law.mean(), n, c_n, 0.0);
  const Pmf base = iterate_pmf(law, n, 1, pol0);
  const double mb = base.mean();
  const double sb = std::sqrt(std::max(0.0, base.second_moment() - mb * mb));

  // Fit on a sparse ladder {1, 2, 4, 6, 8, 12, ...} and hold out the
  // points 2^j + 1 for the cross check.
  std::vector<int> fit_ells{1};
  for (int ell = 2; ell <= ell_max; ell *= 2) {
    fit_ells.push_back(ell);
    if (3 * ell / 2 <= ell_max && 3 * ell / 2 > ell) fit_ells.push_back(3 * ell / 2);
  }
  std::sort(fit_ells.begin(), fit_ells.end());
  fit_ells.erase(std::unique(fit_ells.begin(), fit_ells.end()), fit_ells.end());
  std::vector<int> holdout_ells;
  for (int ell = 3; ell <= ell_max; ell = 2 * (ell - 1) + 1)
    if (std::find(fit_ells.begin(), fit_ells.end(), ell) == fit_ells.end())
      holdout_ells.push_back(ell);

  const auto normalized_sup = [&](int ell) {
    ConvPolicy pol;
    pol.mode = ConvMode::FftHybrid;
    const double want = ell * (mb - static_cast<double>(base.lo())) +
                        40.0 * (sb * std::sqrt(static_cast<double>(ell)) + c_n) + 64.0;
    pol.window_cap = std::min<std::int64_t>(static_cast<std::int64_t>(std::ceil(want)),
                                            std::int64_t{1} << 22);
    const Pmf s = convolve_power(base, ell, pol);
    const auto& lw = s.log_weights();
    double best = kNegInf;
    for (std::int64_t idx = 0; idx < s.width(); ++idx) {
      if (lw[static_cast<std::size_t>(idx)] == kNegInf) continue;
      const double k = static_cast<double>(s.lo() + idx);
      best = std::max(best, lw[static_cast<std::size_t>(idx)] - k / c_n);
    }
    return std::sqrt(static_cast<double>(ell)) * c_n * std::exp(best);
  };

  NonuniformReport rep;
  rep.fit_ells = fit_ells;
  rep.holdout_ells = holdout_ells;
  rep.fit_values.reserve(fit_ells.size());
  for (int ell : fit_ells) rep.fit_values.push_back(normalized_sup(ell));

  // Least-squares decay rate of log N_ell, rounded down to the 0.01 grid:
  // sweeping the grid upward for the largest rate the fit supports and
  // picking the smallest envelope constant A at that rate coincide.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double cnt = static_cast<double>(fit_ells.size());
  for (std::size_t i = 0; i < fit_ells.size(); ++i) {
    const double xi = static_cast<double>(fit_ells[i]);
    const double yi = std::log(rep.fit_values[i]);
    sx += xi;
    sy += yi;
    sxx += xi * xi;
    sxy += xi * yi;
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  rep.delta = std::max(0.0, std::floor(-slope / 0.01 + 1e-12) * 0.01);

  double a = 0.0;
  for (std::size_t i = 0; i < fit_ells.size(); ++i)
    a = std::max(a, rep.fit_values[i] * std::exp(rep.delta * fit_ells[i]));
  rep.a = a;

  double worst = 0.0;
  for (int ell : holdout_ells)
    worst = std::max(worst, normalized_sup(ell) * std::exp(rep.delta * ell) / a);
  rep.max_holdout_ratio = worst;
  return rep;
}

}  // namespace gw
