#pragma once

#include <cstdint>
#include <vector>

#include "gw/logsum.hpp"

namespace gw {

// Arithmetic progression carrying the support: k = residue (mod d).
struct Lattice {
  std::int64_t d = 1;
  std::int64_t residue = 0;
};

// Probability mass function on integers, kept in the log domain so entries
// thousands of orders below the mode survive.  The window [lo, hi] always
// starts at the true minimum of the support; only right-tail mass is ever
// truncated, and whatever is cut is accounted in tail_defect.  Entries
// inside the window are exact up to floating-point rounding (convolution
// never lets truncated right tails contaminate entries left of the cut).
class Pmf {
 public:
  Pmf() = default;
  Pmf(std::int64_t lo, std::vector<double> logw, double tail_defect, Lattice lattice);

  static Pmf point_mass(std::int64_t k, Lattice lattice);

  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return lo_ + static_cast<std::int64_t>(logw_.size()) - 1; }
  std::int64_t width() const { return static_cast<std::int64_t>(logw_.size()); }
  const std::vector<double>& log_weights() const { return logw_; }
  double tail_defect() const { return tail_defect_; }
  const Lattice& lattice() const { return lattice_; }

  // log P(X = k).  -inf off the lattice, left of the window, or right of it
  // when nothing was truncated; a query right of a truncated window has no
  // known answer and throws WindowOverflow.
  double log_at(std::int64_t k) const;

  // log P(X <= k), exact for k <= hi (prefix sums are unaffected by right
  // truncation); throws WindowOverflow for k > hi when mass was truncated.
  double log_cdf_at(std::int64_t k) const;

  double mass() const;       // sum of exp(logw)
  double mean() const;       // conditional on the window
  double second_moment() const;
  double max_log() const;    // log of the modal probability
  std::int64_t argmax() const;

  // fft-hybrid bookkeeping: entries with logw below this came out of a
  // floating-point FFT too close to its noise floor to be trusted.
  double unreliable_below() const { return unreliable_below_; }
  void set_unreliable_below(double v) { unreliable_below_ = v; }
  bool entry_unreliable(std::int64_t k) const;

  // Validates the class invariants (mass + defect near 1, logw <= 0,
  // support on the lattice); throws Error with a description if violated.
  void check() const;

 private:
  std::int64_t lo_ = 0;
  std::vector<double> logw_;
  double tail_defect_ = 0.0;
  Lattice lattice_;
  double unreliable_below_ = kNegInf;
};

enum class ConvMode { DirectLog, FftHybrid };

struct ConvPolicy {
  ConvMode mode = ConvMode::DirectLog;
  std::int64_t window_cap = std::int64_t{1} << 22;  // max stored width
  double tail_tol = 1e-12;    // mass one convolution may truncate silently
  double fft_floor = 1e-13;   // relative reliability floor of the FFT path
  std::int64_t fft_min_width = 4096;
};

// Exact convolution of two pmfs over the same lattice span.  Output is
// truncated to policy.window_cap; truncating more than policy.tail_tol of
// mass in this single step throws WindowOverflow.
Pmf convolve(const Pmf& a, const Pmf& b, const ConvPolicy& policy);

// ell-fold convolution power by repeated squaring, same truncation rules
// applied at every intermediate step.
Pmf convolve_power(const Pmf& base, std::int64_t ell, const ConvPolicy& policy);

}  // namespace gw
