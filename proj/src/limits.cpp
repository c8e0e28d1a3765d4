#include "gw/limits.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gw/errors.hpp"
#include "gw/exactdist.hpp"
#include "gw/logsum.hpp"
#include "gw/quadrature.hpp"

namespace gw {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;

}  // namespace

Approximated<std::complex<double>> schroeder_function(const OffspringLaw& law,
                                                      std::complex<double> z, int n_iters) {
  const LawProfile profile = classify(law);
  if (!profile.schroeder()) throw NotSchroeder("schroeder_function needs p_1 > 0");
  if (n_iters < 1) throw UsageError("schroeder_function: n_iters must be >= 1");
  if (!(std::abs(z) < 1.0)) throw TargetOutOfRange("schroeder_function: need |z| < 1");
  const double lg = std::log(profile.gamma);
  std::complex<double> w = z;
  std::complex<double> prev = z;
  std::complex<double> cur = z;  // S_0(z) = z
  int k = 0;
  // Once f_k(z) is tiny, f(w) = gamma w (1 + O(w)) and the scaled iterate
  // cannot move at double precision, so stopping early loses nothing.
  while (k < n_iters && std::abs(w) > 1e-250) {
    std::complex<double> fw{};
    std::complex<double> pw(1.0, 0.0);
    std::int64_t e = 0;
    for (std::size_t i = 0; i < law.support.size(); ++i) {
      for (; e < law.support[i]; ++e) pw *= w;
      fw += law.prob[i] * pw;
    }
    w = fw;
    ++k;
    prev = cur;
    cur = w * std::exp(-static_cast<double>(k) * lg);
  }
  return {cur, k == 0 ? 0.0 : std::abs(cur - prev)};
}

std::vector<Approximated<double>> schroeder_coeffs(const OffspringLaw& law, std::int64_t k_max,
                                                   int n) {
  const LawProfile profile = classify(law);
  if (!profile.schroeder()) throw NotSchroeder("schroeder_coeffs needs p_1 > 0");
  if (k_max < 1) throw UsageError("schroeder_coeffs: k_max must be >= 1");
  if (n < 2) throw UsageError("schroeder_coeffs: n must be >= 2");
  ConvPolicy policy;
  policy.window_cap = k_max;
  policy.tail_tol = 1.0;  // everything right of k_max is cut on purpose
  const Pmf cur = iterate_pmf(law, n, 1, policy);
  const Pmf prv = iterate_pmf(law, n - 1, 1, policy);
  const double lg = std::log(profile.gamma);
  std::vector<Approximated<double>> out(static_cast<std::size_t>(k_max));
  for (std::int64_t k = 1; k <= k_max; ++k) {
    const double vk = std::exp(-static_cast<double>(n) * lg + cur.log_at(k));
    const double vp = std::exp(-static_cast<double>(n - 1) * lg + prv.log_at(k));
    out[static_cast<std::size_t>(k - 1)] = {vk, std::abs(vk - vp)};
  }
  return out;
}

Approximated<double> boettcher_function(const OffspringLaw& law, double s, int n_iters) {
  const LawProfile profile = classify(law);
  if (profile.schroeder()) throw NotBoettcher("boettcher_function needs min support >= 2");
  if (n_iters < 1) throw UsageError("boettcher_function: n_iters must be >= 1");
  if (!(s > 0.0 && s <= 1.0)) throw TargetOutOfRange("boettcher_function: need s in (0, 1]");
  const double t = std::log(s);
  const double mu = static_cast<double>(profile.mu);
  const double prev =
      std::exp(log_fn_derivs(law, n_iters - 1, t).lf * std::pow(mu, -(n_iters - 1)));
  const double cur = std::exp(log_fn_derivs(law, n_iters, t).lf * std::pow(mu, -n_iters));
  return {cur, std::abs(cur - prev)};
}

Approximated<double> laplace_W(const OffspringLaw& law, double h, const NormingSequence& norming,
                               int n) {
  if (h < 0.0) throw UsageError("laplace_W: h must be >= 0");
  if (n < 1) throw UsageError("laplace_W: n must be >= 1");
  const double cur = std::exp(log_fn_derivs(law, n, -h / norming.at(n)).lf);
  const double prev = std::exp(log_fn_derivs(law, n - 1, -h / norming.at(n - 1)).lf);
  return {cur, std::abs(cur - prev)};
}

std::complex<double> charfn_W(const OffspringLaw& law, double u, const NormingSequence& norming,
                              int n) {
  const double au = std::abs(u);
  const std::complex<double> z = std::exp(std::complex<double>(0.0, au / norming.at(n)));
  std::complex<double> psi = evaluate_fn(law, n, z);
  if (u < 0.0) psi = std::conj(psi);
  return psi;
}

/* The Fourier cache.  psi is expensive (one generating-function iteration
   per point) while a density or cdf table queries thousands of x values,
   so psi is sampled once on panel nodes of dyadic frequency blocks
   [0, u_base], [u_base, 2 u_base], [2^b u_base, 2^{b+1} u_base], ... and
   every query reuses the same nodes.  Per panel a quadratic fit of the
   slow factor pairs with exact oscillatory moments (Filon), so the panels
   can stay coarse no matter how fast e^{-iux} spins.

   The iterate depth n(u) trades truncation against rounding.  Replacing W
   inside the functional equation by a point mass costs about
   K u^2 / c_n with K at the scale of E W^2, while complex rounding near
   z = 1 feeds noise of order eps * c_n / (1 + u^2) through the remaining
   derivative chain until it saturates around 3e-8.  c_n ~ K u^2 * 3e9
   balances the two; the construction-time self-check below confirms the
   choice on live values. */

struct WTransform::Impl {
  enum class Kind { Psi, ChiLow, PsiOverU };

  OffspringLaw law;
  LawProfile profile;
  NormingSequence norm;
  QuadParams qp;
  double ew = 1.0;
  double ew2 = 1.0;
  double depth_check = 0.0;
  double log_depth_scale = 0.0;
  std::vector<std::unique_ptr<std::vector<std::complex<double>>>> blocks;

  void ensure_depth(int n) {
    if (n <= norm.n_max()) return;
    norm = norming(law, std::max(n, 2 * norm.n_max()), norm.mode);
  }

  int depth_for(double u) {
    const double au = std::max(std::abs(u), 1.0);
    const double need = log_depth_scale + 2.0 * std::log(au);
    const double lm = std::log(norm.m);
    int n = std::max(25, static_cast<int>(std::ceil(need / lm)));
    if (n > 400) {
      throw QuadratureNotConverged("characteristic function would need iterate depth > 400");
    }
    ensure_depth(n + 8);
    while (n > 25 && norm.log_c[static_cast<std::size_t>(n - 1)] >= need) --n;
    while (norm.log_c[static_cast<std::size_t>(n)] < need) {
      ++n;
      if (n > 400) {
        throw QuadratureNotConverged("characteristic function would need iterate depth > 400");
      }
      ensure_depth(n + 8);
    }
    return n;
  }

  std::complex<double> psi_depth(double u, int n) {
    ensure_depth(n);
    const double theta = u * std::exp(-norm.log_at(n));
    return evaluate_fn(law, n, std::exp(std::complex<double>(0.0, theta)));
  }

  std::complex<double> psi(double u) {
    if (u == 0.0) return {1.0, 0.0};
    return psi_depth(u, qp.depth > 0 ? qp.depth : depth_for(u));
  }

  double block_lo(int b) const { return b == 0 ? 0.0 : qp.u_base * std::ldexp(1.0, b - 1); }
  double block_hi(int b) const { return qp.u_base * std::ldexp(1.0, b); }

  const std::vector<std::complex<double>>& block(int b) {
    if (b >= static_cast<int>(blocks.size())) blocks.resize(static_cast<std::size_t>(b) + 1);
    auto& slot = blocks[static_cast<std::size_t>(b)];
    if (!slot) {
      const int nn = 2 * qp.panels_per_block;
      auto v = std::make_unique<std::vector<std::complex<double>>>(static_cast<std::size_t>(nn) +
                                                                   1);
      const double lo = block_lo(b);
      const double hi = block_hi(b);
      for (int i = 0; i <= nn; ++i) {
        const double u = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(nn);
        (*v)[static_cast<std::size_t>(i)] = psi(u);
      }
      slot = std::move(v);
    }
    return *slot;
  }

  std::complex<double> node_value(Kind kind, double u, std::complex<double> ps) const {
    switch (kind) {
      case Kind::Psi:
        return ps;
      case Kind::ChiLow:
        // (psi(u) - 1)/u extends continuously to i E W at u = 0
        return u == 0.0 ? std::complex<double>(0.0, ew) : (ps - 1.0) / u;
      case Kind::PsiOverU:
        return ps / u;
    }
    return {};
  }

  struct Accum {
    std::complex<double> sum{};
    double abs_sum = 0.0;
    double fit_err = 0.0;
  };

  // One panel of the fitted integrand against e^{-iux}; tau < phi cuts the
  // panel short, reusing the same three-node fit on the sub-interval.
  std::complex<double> panel_piece(double x, double plo, double phi, std::complex<double> f0,
                                   std::complex<double> fm, std::complex<double> f1,
                                   double tau) const {
    const double c = 0.5 * (plo + phi);
    const double h = 0.5 * (phi - plo);
    const double theta = h * x;
    const std::complex<double> A = fm;
    const std::complex<double> B = 0.5 * (f1 - f0);
    const std::complex<double> C = 0.5 * (f1 + f0) - fm;
    const FilonMoments mom =
        tau < phi ? filon_moments_partial(theta, -1.0, std::clamp((tau - c) / h, -1.0, 1.0))
                  : filon_moments(theta);
    const std::complex<double> rot = std::exp(std::complex<double>(0.0, -c * x));
    return h * rot * (A * mom.m0 + B * mom.m1 + C * mom.m2);
  }

  void add_full_panel(Accum& acc, Kind kind, double x, int b, int p) {
    const auto& nodes = block(b);
    const double lo = block_lo(b);
    const double hi = block_hi(b);
    const int P = qp.panels_per_block;
    const double step = (hi - lo) / (2.0 * P);
    const double u0 = lo + step * (2 * p);
    const double um = lo + step * (2 * p + 1);
    const double u1 = (p == P - 1) ? hi : lo + step * (2 * p + 2);
    const std::complex<double> f0 = node_value(kind, u0, nodes[static_cast<std::size_t>(2 * p)]);
    const std::complex<double> fm =
        node_value(kind, um, nodes[static_cast<std::size_t>(2 * p + 1)]);
    const std::complex<double> f1 =
        node_value(kind, u1, nodes[static_cast<std::size_t>(2 * p + 2)]);
    const std::complex<double> val = panel_piece(x, u0, u1, f0, fm, f1, u1);
    acc.sum += val;
    const double av = std::abs(val);
    acc.abs_sum += av;
    const double scale = std::max({std::abs(f0), std::abs(fm), std::abs(f1), 1e-300});
    const double dv = std::min(2.0, std::abs(f1 - f0) / scale);
    acc.fit_err += av * dv * dv * dv * dv / 180.0;
  }

  std::complex<double> partial_to(Kind kind, double x, int b, int p, double tau) {
    const auto& nodes = block(b);
    const double lo = block_lo(b);
    const double hi = block_hi(b);
    const int P = qp.panels_per_block;
    const double step = (hi - lo) / (2.0 * P);
    const double u0 = lo + step * (2 * p);
    const double um = lo + step * (2 * p + 1);
    const double u1 = (p == P - 1) ? hi : lo + step * (2 * p + 2);
    const std::complex<double> f0 = node_value(kind, u0, nodes[static_cast<std::size_t>(2 * p)]);
    const std::complex<double> fm =
        node_value(kind, um, nodes[static_cast<std::size_t>(2 * p + 1)]);
    const std::complex<double> f1 =
        node_value(kind, u1, nodes[static_cast<std::size_t>(2 * p + 2)]);
    return panel_piece(x, u0, u1, f0, fm, f1, tau);
  }

  /* Slowly decaying transforms: partial integrals I(U), I(2U), I(4U),
     I(8U) with U snapped to whole periods of e^{-iux}, so the remainder at
     every cut carries the same oscillation phase and behaves like a clean
     combination of U^{-e0}, U^{-e0-1}, U^{-e0-2}; the 4x4 solve recovers
     the limit and the 3-level solve prices the model error. */
  Approximated<double> richardson(Kind kind, double x, int start_block, double e0,
                                  bool imag_part) {
    const double n_osc =
        std::max<double>(qp.phase_multiple, std::ceil(32.0 * qp.u_base * x / kTwoPi));
    const double u0 = kTwoPi * n_osc / x;
    const double cuts[4] = {u0, 2.0 * u0, 4.0 * u0, 8.0 * u0};
    double levels[4] = {};
    int cut_idx = 0;
    Accum acc;
    for (int b = start_block; b <= qp.max_blocks && cut_idx < 4; ++b) {
      const double lo = block_lo(b);
      const double hi = block_hi(b);
      const int P = qp.panels_per_block;
      const double pw = (hi - lo) / P;
      for (int p = 0; p < P && cut_idx < 4; ++p) {
        const double plo = lo + pw * p;
        const double phi = (p == P - 1) ? hi : lo + pw * (p + 1);
        while (cut_idx < 4 && cuts[cut_idx] <= phi * (1.0 + 1e-12)) {
          const double tau = std::min(cuts[cut_idx], phi);
          const std::complex<double> part =
              tau > plo ? partial_to(kind, x, b, p, tau) : std::complex<double>{};
          const std::complex<double> tot = acc.sum + part;
          levels[cut_idx] = imag_part ? tot.imag() : tot.real();
          ++cut_idx;
        }
        if (cut_idx >= 4) break;
        add_full_panel(acc, kind, x, b, p);
      }
    }
    if (cut_idx < 4) {
      throw QuadratureNotConverged("frequency budget exhausted before the extrapolation cuts");
    }
    const double l4 = power_law_extrapolate(levels, 4, e0);
    const double l3 = power_law_extrapolate(levels, 3, e0);
    const double noise = 1e-15 * acc.abs_sum + 1e-12;
    return {l4, std::abs(l4 - l3) + acc.fit_err + noise};
  }

  struct TailSum {
    std::complex<double> sum{};
    double err = 0.0;
  };

  // Rapidly decaying transforms: plain block sweep until two consecutive
  // blocks are negligible, plus a stretched-exponential tail estimate
  // fitted to the last sampled |psi|.
  TailSum decay_sum(Kind kind, double x, int start_block) {
    Accum acc;
    int small_streak = 0;
    int b = start_block;
    bool converged = false;
    double last_u = qp.u_base;
    double last_psi = 1.0;
    for (; b <= qp.max_blocks; ++b) {
      const auto& nodes = block(b);
      const int P = qp.panels_per_block;
      double block_max = 0.0;
      for (const auto& ps : nodes) block_max = std::max(block_max, std::abs(ps));
      last_u = block_hi(b);
      last_psi = std::abs(nodes.back());
      const double kind_scale = kind == Kind::Psi ? 1.0 : 1.0 / std::max(block_lo(b), 1e-300);
      const double bound = block_max * kind_scale * (block_hi(b) - block_lo(b));
      if (bound < 1e-17 * std::max(acc.abs_sum, 1e-300) && b > start_block) {
        if (++small_streak >= 2) {
          converged = true;
          break;
        }
        continue;  // skip the panel work; the bound already says negligible
      }
      small_streak = 0;
      for (int p = 0; p < P; ++p) add_full_panel(acc, kind, x, b, p);
    }
    if (!converged) {
      throw QuadratureNotConverged("transform tail still significant at the block budget");
    }
    double tail = 0.0;
    if (last_psi > 0.0 && profile.beta) {
      const double beta = *profile.beta;
      const double ce = -std::log(last_psi) / std::pow(last_u, beta);
      if (ce > 0.0) {
        tail = last_psi * std::pow(last_u, 1.0 - beta) / (ce * beta);
      } else {
        tail = last_psi * last_u;
      }
      if (kind != Kind::Psi) tail /= last_u;
    }
    return {acc.sum, tail + acc.fit_err + 1e-15 * acc.abs_sum + 1e-11};
  }

  Accum full_block_sum(Kind kind, double x, int b) {
    Accum acc;
    for (int p = 0; p < qp.panels_per_block; ++p) add_full_panel(acc, kind, x, b, p);
    return acc;
  }
};

WTransform::WTransform(const OffspringLaw& law, const NormingSequence& norming_seq,
                       QuadParams params)
    : impl_(new Impl) {
  if (params.panels_per_block < 8 || params.panels_per_block > 4096) {
    throw UsageError("WTransform: panels_per_block out of range [8, 4096]");
  }
  if (!(params.u_base > 0.0) || params.phase_multiple < 1 || !(params.tol > 0.0) ||
      params.max_blocks < 8 || params.depth < 0) {
    throw UsageError("WTransform: bad quadrature parameters");
  }
  impl_->law = law;
  impl_->profile = classify(law);
  impl_->norm = norming_seq;
  impl_->qp = params;
  if (std::abs(norming_seq.m - impl_->profile.m) > 1e-9 * impl_->profile.m) {
    throw UsageError("WTransform: norming sequence was built for a different law");
  }
  impl_->ensure_depth(60);
  const int nref = 60;
  impl_->ew = std::exp(static_cast<double>(nref) * std::log(impl_->profile.m) -
                       impl_->norm.log_at(nref));
  double second = 0.0;
  for (std::size_t i = 0; i < law.support.size(); ++i) {
    second += law.prob[i] * static_cast<double>(law.support[i]) * static_cast<double>(law.support[i]);
  }
  const double m = impl_->profile.m;
  const double var1 = second - m * m;
  impl_->ew2 = (1.0 + var1 / (m * m - m)) * impl_->ew * impl_->ew;
  impl_->log_depth_scale = std::log(std::max(1.0, impl_->ew2)) + std::log(3e9);
  double check = 0.0;
  for (const double u : {1.0, 3.0}) {
    const int n = impl_->qp.depth > 0 ? impl_->qp.depth : impl_->depth_for(u);
    check = std::max(check, std::abs(impl_->psi_depth(u, n) - impl_->psi_depth(u, n + 5)));
  }
  impl_->depth_check = check;
}

WTransform::~WTransform() = default;
WTransform::WTransform(WTransform&&) noexcept = default;
WTransform& WTransform::operator=(WTransform&&) noexcept = default;

const LawProfile& WTransform::profile() const { return impl_->profile; }
double WTransform::mean() const { return impl_->ew; }
double WTransform::second_moment() const { return impl_->ew2; }
double WTransform::depth_check_residual() const { return impl_->depth_check; }

std::complex<double> WTransform::charfn(double u) const {
  if (u < 0.0) return std::conj(impl_->psi(-u));
  return impl_->psi(u);
}

Approximated<double> WTransform::density(double x) const {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw TargetOutOfRange("density: x must be positive and finite");
  }
  Impl& im = *impl_;
  double value;
  double res;
  if (im.profile.schroeder()) {
    const Approximated<double> i0 =
        im.richardson(Impl::Kind::Psi, x, 0, *im.profile.alpha, false);
    value = i0.value / kPi;
    res = i0.residual / kPi;
    if (res > im.qp.tol) {
      throw QuadratureNotConverged("density residual " + std::to_string(res) + " at x = " +
                                   std::to_string(x));
    }
  } else {
    const Impl::TailSum s = im.decay_sum(Impl::Kind::Psi, x, 0);
    value = s.sum.real() / kPi;
    res = s.err / kPi;
  }
  if (value <= res) {
    // too close to zero to sign; the value lies somewhere in [0, res]
    return {0.0, res + std::max(value, 0.0)};
  }
  return {value, res};
}

Approximated<double> WTransform::cdf(double x) const {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw TargetOutOfRange("cdf: x must be positive and finite");
  }
  Impl& im = *impl_;
  /* Gil-Pelaez with the u->0 singularity split off analytically:
     P(W <= x) = 1/2 - (1/pi) [ I1 - Si(u_base x) + I2 ],
     I1 = integral over [0, u_base] of Im[e^{-iux} (psi(u) - 1)/u],
     I2 = integral over [u_base, inf) of Im[e^{-iux} psi(u)/u],
     since Im[e^{-iux}]/u integrates to the sine integral exactly. */
  const Impl::Accum low = im.full_block_sum(Impl::Kind::ChiLow, x, 0);
  const double i1 = low.sum.imag();
  const double err1 = low.fit_err + 1e-15 * low.abs_sum;
  double i2;
  double err2;
  if (im.profile.schroeder()) {
    const Approximated<double> r =
        im.richardson(Impl::Kind::PsiOverU, x, 1, *im.profile.alpha + 1.0, true);
    i2 = r.value;
    err2 = r.residual;
  } else {
    const Impl::TailSum s = im.decay_sum(Impl::Kind::PsiOverU, x, 1);
    i2 = s.sum.imag();
    err2 = s.err;
  }
  const double si = sin_integral(im.qp.u_base * x);
  double value = 0.5 - (i1 - si + i2) / kPi;
  const double res = (err1 + err2) / kPi + 1e-11;
  value = std::clamp(value, 0.0, 1.0);
  return {value, res};
}

Approximated<double> density_W(const OffspringLaw& law, double x, const NormingSequence& norming,
                               const QuadParams& params) {
  return WTransform(law, norming, params).density(x);
}

Approximated<double> cdf_W(const OffspringLaw& law, double x, const NormingSequence& norming,
                           const QuadParams& params) {
  return WTransform(law, norming, params).cdf(x);
}

DensityTable build_density_table(const OffspringLaw& law, const NormingSequence& norming,
                                 const std::vector<double>& grid, const QuadParams& params) {
  if (grid.size() < 2) throw UsageError("build_density_table: need at least two grid points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw UsageError("build_density_table: grid must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw UsageError("build_density_table: grid must be strictly increasing");
    }
  }
  WTransform wt(law, norming, params);
  DensityTable table;
  table.x = grid;
  table.w.resize(grid.size());
  table.err.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Approximated<double> d = wt.density(grid[i]);
    table.w[i] = d.value;
    table.err[i] = d.residual;
  }
  return table;
}

double table_integral(const DensityTable& table, const LawProfile& profile) {
  const std::size_t n = table.x.size();
  if (n < 3 || table.w.size() != n) throw UsageError("table_integral: malformed table");
  double integral = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    integral += 0.5 * (table.w[i] + table.w[i - 1]) * (table.x[i] - table.x[i - 1]);
  }
  // below the grid the density behaves like x^{alpha-1} in the p_1 > 0
  // case (integrable stub); with min support >= 2 it vanishes faster than
  // any power and the stub is negligible
  if (profile.alpha) integral += table.w.front() * table.x.front() / *profile.alpha;
  // beyond the grid: exponential fit through the last positive stretch
  std::size_t ib = n;
  for (std::size_t i = n; i-- > 0;) {
    if (table.w[i] > 0.0) {
      ib = i;
      break;
    }
  }
  if (ib != n && ib > 0) {
    std::size_t ia = n;
    for (std::size_t i = ib; i-- > 0;) {
      if (table.x[i] <= 0.8 * table.x[ib] && table.w[i] > 0.0) {
        ia = i;
        break;
      }
    }
    if (ia != n) {
      const double lambda = (std::log(table.w[ia]) - std::log(table.w[ib])) /
                            (table.x[ib] - table.x[ia]);
      if (lambda > 0.0) integral += table.w[ib] / lambda;
    }
  }
  return integral;
}

std::vector<double> log_grid(double x_min, double x_max, int count) {
  if (!(x_min > 0.0) || !(x_max > x_min) || count < 2) {
    throw UsageError("log_grid: need 0 < x_min < x_max and count >= 2");
  }
  std::vector<double> g(static_cast<std::size_t>(count));
  const double step = std::log(x_max / x_min) / (count - 1);
  for (int i = 0; i < count; ++i) {
    g[static_cast<std::size_t>(i)] = x_min * std::exp(step * i);
  }
  g.back() = x_max;
  return g;
}

Approximated<double> log_density_left_tail(const OffspringLaw& law, double x,
                                           const NormingSequence& norming) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw TargetOutOfRange("log_density_left_tail: x must be positive and finite");
  }
  const LawProfile profile = classify(law);
  const double lm = std::log(profile.m);
  const double lmu = std::log(static_cast<double>(profile.mu));
  NormingSequence seq = norming;
  const auto log_c_at = [&](int n) {
    if (n > seq.n_max()) seq = gw::norming(law, n + 16, seq.mode);
    return seq.log_at(n);
  };
  // depth where the target mean x c_n clears the minimum mu^n comfortably
  int n = std::max(12, static_cast<int>(std::ceil(std::log(6.0 / std::min(x, 6.0)) / (lm - lmu))));
  {
    // x at the mean itself is fine (the tilt degenerates to zero); only
    // points to the right of it have no left-tail tilt
    const double t_mean = std::log(x) + log_c_at(n);
    if (t_mean > static_cast<double>(n) * lm + 1e-9) {
      throw TargetOutOfRange("log_density_left_tail: x lies above the mean of W");
    }
  }
  double value = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  bool have = false;
  for (int round = 0; round < 14 && n <= 400; ++round, n += 4) {
    const double lcn = log_c_at(n);
    const double target = std::log(x) + lcn;  // log of the tilted mean to hit
    if (target <= static_cast<double>(n) * lmu + 1e-9) continue;
    const auto mean_log = [&](double t) {
      const LogDerivs d = log_fn_derivs(law, n, t);
      return t + d.l1 - d.lf;
    };
    double t_hi = 0.0;  // mean_log(0) = n log m > target
    double t_lo = -1.0;
    int guard = 0;
    while (mean_log(t_lo) > target && ++guard < 80) {
      t_hi = t_lo;
      t_lo *= 2.0;
    }
    if (guard >= 80) throw RootBracketFailure("left tail tilt would not bracket");
    for (int it = 0; it < 120 && (t_hi - t_lo) > 1e-13 * std::abs(t_lo); ++it) {
      const double mid = 0.5 * (t_lo + t_hi);
      if (mean_log(mid) > target) {
        t_hi = mid;
      } else {
        t_lo = mid;
      }
    }
    const double t = 0.5 * (t_lo + t_hi);
    const LogDerivs d = log_fn_derivs(law, n, t);
    const double mean = std::exp(t + d.l1 - d.lf);
    const double a = std::exp(t + d.l2 - d.l1);
    const double sigma2 = mean * ((a - mean) + 1.0);
    if (!(sigma2 > 0.0)) continue;
    const double v = lcn + d.lf - t * std::exp(target) - 0.5 * std::log(kTwoPi * sigma2);
    if (have) residual = std::abs(v - value);
    value = v;
    have = true;
    if (residual < std::max(1e-6 * std::abs(value), 1e-7)) break;
  }
  if (!have) throw NumericFailure("log_density_left_tail: no usable depth found");
  return {value, residual};
}

}  // namespace gw
