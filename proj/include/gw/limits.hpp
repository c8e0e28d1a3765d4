#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "gw/offspring.hpp"
#include "gw/pmf.hpp"

namespace gw {

enum class NormingMode { Power, Seneta };

// Norming constants c_0..c_N for Z_n / c_n -> W.  Power mode takes
// c_n = m^n; Seneta mode takes c_n = 1/h_n with h_n solving
// f_n(e^{-h_n}) = 1/e, which pins c_0 = 1 by construction.  Both satisfy
// c_n < c_{n+1} <= m c_n.  log_c carries the same sequence in logs so deep
// indices stay usable after c_n itself overflows.
struct NormingSequence {
  NormingMode mode = NormingMode::Power;
  double m = 0.0;
  std::vector<double> c;
  std::vector<double> log_c;

  int n_max() const { return static_cast<int>(c.size()) - 1; }
  double at(int n) const;      // throws BeyondNorming outside [0, n_max]
  double log_at(int n) const;  // same range, log domain
};

NormingSequence norming(const OffspringLaw& law, int N, NormingMode mode);

// A value together with a numerical error estimate.  The estimate is a
// residual (last observed correction or quadrature tail), not a rigorous
// bound; value 0 with residual r means the result lies in [0, r].
template <class T>
struct Approximated {
  T value{};
  double residual = 0.0;
};

// S_n(z) = f_n(z) / gamma^n on |z| < 1, with |S_n - S_{n-1}| as residual.
// Stops early once f_n(z) is so close to the fixed point 0 that further
// iterations cannot move S at double precision.
Approximated<std::complex<double>> schroeder_function(const OffspringLaw& law,
                                                      std::complex<double> z, int n_iters);

// nu_k = gamma^{-n} P(Z_n = k) for k = 1..k_max, residual from the same
// quantity one generation earlier.  Off-lattice k get an exact zero.
std::vector<Approximated<double>> schroeder_coeffs(const OffspringLaw& law, std::int64_t k_max,
                                                   int n);

// B_n(s) = exp(mu^{-n} log f_n(s)) on (0, 1], with |B_n - B_{n-1}| as
// residual.  Log-domain iteration: f_n(s) itself underflows in a handful
// of generations.
Approximated<double> boettcher_function(const OffspringLaw& law, double s, int n_iters);

// phi(h) ~ f_n(e^{-h / c_n}), the Laplace transform of W at h >= 0, with
// |value_n - value_{n-1}| as residual (the n-1 term uses c_{n-1}).
Approximated<double> laplace_W(const OffspringLaw& law, double h, const NormingSequence& norming,
                               int n);

// psi(u) ~ f_n(e^{i u / c_n}), the characteristic function of W at a fixed
// iterate depth n.  psi(-u) = conj(psi(u)) exactly.
std::complex<double> charfn_W(const OffspringLaw& law, double u, const NormingSequence& norming,
                              int n);

struct QuadParams {
  int panels_per_block = 64;  // Filon panels per dyadic frequency block
  double u_base = 4.0;        // end of the first (linear) block
  int phase_multiple = 8;     // least whole periods of e^{-iux} before the first cut
  double tol = 1e-6;          // residual above this throws QuadratureNotConverged
  int max_blocks = 60;        // hard cap on dyadic blocks
  int depth = 0;              // fixed iterate depth for psi; 0 = per-frequency choice
};

// Fourier machinery for the law's martingale limit W.  Caches psi(u) on
// panel nodes, so a table of density or cdf values shares every iterate
// evaluation.  The cache mutates lazily behind const access; share one
// instance across threads only behind a lock.
class WTransform {
 public:
  WTransform(const OffspringLaw& law, const NormingSequence& norming, QuadParams params = {});
  ~WTransform();
  WTransform(WTransform&&) noexcept;
  WTransform& operator=(WTransform&&) noexcept;

  const LawProfile& profile() const;
  double mean() const;           // E W implied by the norming
  double second_moment() const;  // E W^2 from the offspring variance
  // Largest deviation seen between the automatic iterate depth and five
  // extra generations, sampled at construction; a depth-choice self-check.
  double depth_check_residual() const;

  std::complex<double> charfn(double u) const;
  Approximated<double> density(double x) const;
  Approximated<double> cdf(double x) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot wrappers around a private WTransform.
Approximated<double> density_W(const OffspringLaw& law, double x, const NormingSequence& norming,
                               const QuadParams& params = {});
Approximated<double> cdf_W(const OffspringLaw& law, double x, const NormingSequence& norming,
                           const QuadParams& params = {});

struct DensityTable {
  std::vector<double> x;    // ascending, positive
  std::vector<double> w;    // density estimates, >= 0
  std::vector<double> err;  // per-point residuals
};

DensityTable build_density_table(const OffspringLaw& law, const NormingSequence& norming,
                                 const std::vector<double>& grid, const QuadParams& params = {});

// Trapezoid integral over the table plus a power-law stub below the first
// grid point and a fitted exponential remainder beyond the last.
double table_integral(const DensityTable& table, const LawProfile& profile);

// Geometrically spaced grid from x_min to x_max inclusive.
std::vector<double> log_grid(double x_min, double x_max, int count);

// log w(x) by exponential tilting at depth n: the tilt solving
// mean = x c_n, a local normal approximation at that mean, and depth
// increased until the value stabilizes (the residual).  Sharp in the
// Boettcher case where the tilted law tightens; for laws with p_1 > 0 the
// normal step leaves an O(1) factor, so treat the value as a left-tail
// exponent, not a density.
Approximated<double> log_density_left_tail(const OffspringLaw& law, double x,
                                           const NormingSequence& norming);

}  // namespace gw
