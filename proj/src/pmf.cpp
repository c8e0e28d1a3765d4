#include "gw/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "gw/errors.hpp"
#include "gw/threading.hpp"

#if defined(__SSE2__)
#include <pmmintrin.h>
#include <xmmintrin.h>
#endif

namespace gw {

namespace {

// Below this scaled linear magnitude an output entry is recomputed with the
// exact per-entry log-sum-exp.  With flush-to-zero active the linear pass
// silently drops terms under about e^-708; entries above e^-630 lose at most
// width * e^-708 of relative mass to that, which is far below double
// precision, so the fast path is exact wherever it is trusted.
const double kLinearTrust = std::exp(-630.0);

// Scoped FTZ/DAZ: denormal products appear en masse when convolving pmfs
// whose entries span hundreds of orders of magnitude, and the hardware
// penalty for honoring them would dominate the run time.  Correctness is
// preserved by the kLinearTrust fallback above.
struct ScopedFlushDenormals {
#if defined(__SSE2__)
  unsigned int saved;
  ScopedFlushDenormals() : saved(_mm_getcsr()) { _mm_setcsr(saved | 0x8040); }
  ~ScopedFlushDenormals() { _mm_setcsr(saved); }
#else
  ScopedFlushDenormals() {}
#endif
};

double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j |= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> step(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        // Resync the twiddle from std::polar periodically; a pure running
        // product drifts by ~len*eps, which matters at multi-million sizes.
        if ((k & 63u) == 0 && k != 0)
          w = std::polar(1.0, ang * static_cast<double>(k));
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= step;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv;
  }
}

}  // namespace

Pmf::Pmf(std::int64_t lo, std::vector<double> logw, double tail_defect, Lattice lattice)
    : lo_(lo), logw_(std::move(logw)), tail_defect_(tail_defect), lattice_(lattice) {
  if (logw_.empty()) throw Error("pmf window must be nonempty");
  if (lattice_.d < 1) throw Error("lattice span must be >= 1");
}

Pmf Pmf::point_mass(std::int64_t k, Lattice lattice) {
  lattice.residue = ((k % lattice.d) + lattice.d) % lattice.d;
  return Pmf(k, {0.0}, 0.0, lattice);
}

double Pmf::log_at(std::int64_t k) const {
  if (k < lo_) return kNegInf;
  if (k > hi()) {
    if (tail_defect_ > 1e-300)
      throw WindowOverflow("query at k=" + std::to_string(k) + " lies beyond the truncated window [" +
                           std::to_string(lo_) + "," + std::to_string(hi()) + "]");
    return kNegInf;
  }
  return logw_[static_cast<size_t>(k - lo_)];
}

double Pmf::log_cdf_at(std::int64_t k) const {
  if (k < lo_) return kNegInf;
  if (k > hi() && tail_defect_ > 1e-300)
    throw WindowOverflow("cdf query beyond the truncated window");
  const std::int64_t last = std::min(k, hi()) - lo_;
  double m = kNegInf;
  for (std::int64_t t = 0; t <= last; ++t) m = std::max(m, logw_[static_cast<size_t>(t)]);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::int64_t t = 0; t <= last; ++t) {
    const double v = logw_[static_cast<size_t>(t)];
    if (v != kNegInf) s += std::exp(v - m);
  }
  const double r = m + std::log(s);
  return r > 0.0 ? 0.0 : r;
}

double Pmf::mass() const {
  double s = 0.0;
  for (double v : logw_)
    if (v != kNegInf) s += std::exp(v);
  return s;
}

double Pmf::mean() const {
  double s = 0.0, num = 0.0;
  for (size_t t = 0; t < logw_.size(); ++t) {
    if (logw_[t] == kNegInf) continue;
    const double p = std::exp(logw_[t]);
    s += p;
    num += p * static_cast<double>(lo_ + static_cast<std::int64_t>(t));
  }
  if (s == 0.0) throw Error("mean of an all-zero window");
  return num / s;
}

double Pmf::second_moment() const {
  double s = 0.0, num = 0.0;
  for (size_t t = 0; t < logw_.size(); ++t) {
    if (logw_[t] == kNegInf) continue;
    const double p = std::exp(logw_[t]);
    const double k = static_cast<double>(lo_ + static_cast<std::int64_t>(t));
    s += p;
    num += p * k * k;
  }
  if (s == 0.0) throw Error("moment of an all-zero window");
  return num / s;
}

double Pmf::max_log() const {
  double m = kNegInf;
  for (double v : logw_) m = std::max(m, v);
  return m;
}

std::int64_t Pmf::argmax() const {
  size_t best = 0;
  for (size_t t = 1; t < logw_.size(); ++t)
    if (logw_[t] > logw_[best]) best = t;
  return lo_ + static_cast<std::int64_t>(best);
}

bool Pmf::entry_unreliable(std::int64_t k) const {
  if (unreliable_below_ == kNegInf) return false;
  if (k < lo_ || k > hi()) return false;
  return logw_[static_cast<size_t>(k - lo_)] < unreliable_below_;
}

void Pmf::check() const {
  if (lo_ < 0) throw Error("pmf window starts at a negative point");
  if (tail_defect_ < -1e-12 || tail_defect_ > 1.0 + 1e-9)
    throw Error("tail defect " + std::to_string(tail_defect_) + " outside [0,1]");
  const std::int64_t d = lattice_.d;
  for (size_t t = 0; t < logw_.size(); ++t) {
    const double v = logw_[t];
    if (std::isnan(v)) throw Error("NaN log-weight in pmf window");
    if (v > 1e-9) throw Error("log-weight " + std::to_string(v) + " exceeds 0");
    const std::int64_t k = lo_ + static_cast<std::int64_t>(t);
    if ((k - lattice_.residue) % d != 0 && v != kNegInf)
      throw Error("positive mass off the lattice at k=" + std::to_string(k));
  }
  const double total = mass() + tail_defect_;
  if (total < 1.0 - 1e-9 || total > 1.0 + 1e-9)
    throw Error("mass plus defect is " + std::to_string(total) + ", not 1");
}

namespace {

// Direct convolution.  The bulk runs in the linear domain after scaling both
// inputs by their maxima; any output entry whose scaled value falls below
// kLinearTrust is redone with an exact two-pass log-sum-exp over its
// diagonal, so deep-tail entries keep full relative precision.  Entries are
// mutually independent, which keeps the result bit-identical for any worker
// count.
std::vector<double> direct_core(const std::vector<double>& la, const std::vector<double>& lb,
                                std::int64_t W, double sa, double sb) {
  const std::int64_t Wa = static_cast<std::int64_t>(la.size());
  const std::int64_t Wb = static_cast<std::int64_t>(lb.size());
  std::vector<double> A(Wa), Brev(Wb);
  for (std::int64_t i = 0; i < Wa; ++i)
    A[i] = la[i] == kNegInf ? 0.0 : std::exp(la[i] - sa);
  for (std::int64_t j = 0; j < Wb; ++j)
    Brev[Wb - 1 - j] = lb[j] == kNegInf ? 0.0 : std::exp(lb[j] - sb);

  std::vector<double> out(static_cast<size_t>(W), kNegInf);
  parallel_for(0, W, [&](std::int64_t t0, std::int64_t t1) {
    ScopedFlushDenormals ftz;
    for (std::int64_t t = t0; t < t1; ++t) {
      const std::int64_t ia = std::max<std::int64_t>(0, t - Wb + 1);
      const std::int64_t ib = std::min<std::int64_t>(Wa - 1, t);
      if (ia > ib) continue;
      const std::int64_t len = ib - ia + 1;
      const std::int64_t boff = Wb - 1 - t + ia;  // >= 0 once ia is clamped
      const double* pa = A.data() + ia;
      const double* pb = Brev.data() + boff;
      double acc = 0.0;
      for (std::int64_t l = 0; l < len; ++l) acc += pa[l] * pb[l];
      if (acc > kLinearTrust) {
        const double v = std::log(acc) + sa + sb;
        out[t] = v > 0.0 ? 0.0 : v;
      } else {
        double m = kNegInf;
        for (std::int64_t i = ia; i <= ib; ++i) {
          const double v = la[i] + lb[t - i];
          if (v > m) m = v;
        }
        if (m == kNegInf) continue;
        double s = 0.0;
        for (std::int64_t i = ia; i <= ib; ++i) {
          const double v = la[i] + lb[t - i];
          if (v != kNegInf) s += std::exp(v - m);
        }
        out[t] = m + std::log(s);
      }
    }
  });
  return out;
}

std::vector<double> fft_core(const std::vector<double>& la, const std::vector<double>& lb,
                             std::int64_t W, double sa, double sb, double fft_floor,
                             double& unreliable_below, std::int64_t out_lo, const Lattice& lat) {
  const std::int64_t Wa = static_cast<std::int64_t>(la.size());
  const std::int64_t Wb = static_cast<std::int64_t>(lb.size());
  size_t M = 1;
  while (static_cast<std::int64_t>(M) < Wa + Wb - 1) M <<= 1;
  std::vector<std::complex<double>> fa(M), fb(M);
  for (std::int64_t i = 0; i < Wa; ++i)
    fa[i] = la[i] == kNegInf ? 0.0 : std::exp(la[i] - sa);
  for (std::int64_t j = 0; j < Wb; ++j)
    fb[j] = lb[j] == kNegInf ? 0.0 : std::exp(lb[j] - sb);
  fft_inplace(fa, false);
  fft_inplace(fb, false);
  for (size_t i = 0; i < M; ++i) fa[i] *= fb[i];
  fft_inplace(fa, true);

  double maxv = 0.0;
  for (std::int64_t t = 0; t < W; ++t) maxv = std::max(maxv, fa[t].real());
  const double floor_lin = fft_floor * maxv;
  unreliable_below = maxv > 0.0 ? std::log(floor_lin) + sa + sb : kNegInf;

  std::vector<double> out(static_cast<size_t>(W), kNegInf);
  for (std::int64_t t = 0; t < W; ++t) {
    const std::int64_t k = out_lo + t;
    if ((k - lat.residue) % lat.d != 0) continue;  // structural zero: drop FFT noise
    const double v = fa[t].real();
    if (v <= 0.0) continue;
    const double lg = std::log(v) + sa + sb;
    out[t] = lg > 0.0 ? 0.0 : lg;
  }
  return out;
}

}  // namespace

Pmf convolve(const Pmf& a, const Pmf& b, const ConvPolicy& policy) {
  if (a.lattice().d != b.lattice().d)
    throw LatticeMismatch("convolution of pmfs on different lattices (d=" +
                          std::to_string(a.lattice().d) + " vs d=" + std::to_string(b.lattice().d) + ")");
  if (policy.window_cap < 1) throw UsageError("window_cap must be >= 1");

  Lattice lat;
  lat.d = a.lattice().d;
  lat.residue = (a.lattice().residue + b.lattice().residue) % lat.d;

  const std::int64_t lo = a.lo() + b.lo();
  const std::int64_t natural_hi = a.hi() + b.hi();
  const std::int64_t hi = std::min(natural_hi, lo + policy.window_cap - 1);
  const std::int64_t W = hi - lo + 1;

  // A point mass only shifts the other operand.
  if (a.width() == 1 || b.width() == 1) {
    const Pmf& point = a.width() == 1 ? a : b;
    const Pmf& other = a.width() == 1 ? b : a;
    const double c = point.log_weights()[0];
    std::vector<double> out(static_cast<size_t>(W), kNegInf);
    double S = 0.0;
    for (std::int64_t t = 0; t < W && t < other.width(); ++t) {
      const double v = other.log_weights()[static_cast<size_t>(t)];
      if (v == kNegInf) continue;
      const double lg = std::min(v + c, 0.0);
      out[static_cast<size_t>(t)] = lg;
      S += std::exp(lg);
    }
    if (natural_hi > hi) {
      const double cut = std::max(0.0, std::exp(std::min(c, 0.0)) * other.mass() - S);
      if (cut > policy.tail_tol)
        throw WindowOverflow("window cap truncates " + std::to_string(cut) + " of mass in one step");
    }
    Pmf res(lo, std::move(out), clamp01(1.0 - S), lat);
    res.set_unreliable_below(std::max(a.unreliable_below(), b.unreliable_below()));
    return res;
  }

  const double sa = a.max_log();
  const double sb = b.max_log();
  if (sa == kNegInf || sb == kNegInf)
    throw Error("convolution of a pmf with no positive mass in its window");

  std::vector<double> out;
  double unreliable = kNegInf;
  const bool use_fft = policy.mode == ConvMode::FftHybrid && W >= policy.fft_min_width &&
                       a.width() >= 2 && b.width() >= 2;
  if (use_fft) {
    out = fft_core(a.log_weights(), b.log_weights(), W, sa, sb, policy.fft_floor, unreliable, lo, lat);
    // Entries assembled mostly from unreliable inputs stay unreliable.
    if (a.unreliable_below() != kNegInf) unreliable = std::max(unreliable, a.unreliable_below() + sb);
    if (b.unreliable_below() != kNegInf) unreliable = std::max(unreliable, b.unreliable_below() + sa);
  } else {
    out = direct_core(a.log_weights(), b.log_weights(), W, sa, sb);
  }

  double S = 0.0;
  for (double v : out)
    if (v != kNegInf) S += std::exp(v);

  double defect;
  if (natural_hi > hi) {
    const double cut = std::max(0.0, a.mass() * b.mass() - S);
    if (cut > policy.tail_tol)
      throw WindowOverflow("window cap truncates " + std::to_string(cut) +
                           " of mass in one step (tail_tol=" + std::to_string(policy.tail_tol) + ")");
    defect = clamp01(std::max(a.tail_defect() + b.tail_defect(), 1.0 - S));
  } else {
    defect = clamp01(a.tail_defect() + b.tail_defect() - a.tail_defect() * b.tail_defect());
  }

  Pmf res(lo, std::move(out), defect, lat);
  res.set_unreliable_below(unreliable);
  return res;
}

Pmf convolve_power(const Pmf& base, std::int64_t ell, const ConvPolicy& policy) {
  if (ell < 1) throw UsageError("convolution power needs ell >= 1");
  std::optional<Pmf> acc;
  Pmf sq = base;
  std::int64_t e = ell;
  while (true) {
    if (e & 1) acc = acc ? convolve(*acc, sq, policy) : sq;
    e >>= 1;
    if (e == 0) break;
    sq = convolve(sq, sq, policy);
  }
  return *acc;
}

}  // namespace gw
