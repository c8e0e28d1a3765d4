#include "gw/exactdist.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "gw/errors.hpp"
#include "gw/logsum.hpp"

namespace gw {

namespace {

std::int64_t mod_residue(std::int64_t x, std::int64_t d) { return ((x % d) + d) % d; }

}  // namespace

Pmf iterate_pmf(const OffspringLaw& law, int n, std::int64_t z0, const ConvPolicy& policy) {
  if (n < 0) throw UsageError("generation index must be >= 0");
  if (z0 < 1) throw UsageError("initial population must be >= 1");
  const LawProfile pr = classify(law);
  const std::int64_t d = pr.d;
  const std::int64_t mu = pr.mu;

  Pmf cur = Pmf::point_mass(1, Lattice{d, 0});
  for (int g = 0; g < n; ++g) {
    const std::int64_t lo_out = mu * cur.lo();
    const std::int64_t nat_hi = law.max_support() * cur.hi();
    const std::int64_t hi_out = std::min(nat_hi, lo_out + policy.window_cap - 1);
    const std::int64_t W = hi_out - lo_out + 1;

    std::vector<double> acc(static_cast<size_t>(W), kNegInf);
    double cut = 0.0;
    bool all_exact = true;

    // Running convolution powers of the current pmf; power j serves the
    // atom p_j of the offspring law.
    Pmf power = cur;
    size_t atom = 0;
    for (std::int64_t j = 1; j <= law.max_support(); ++j) {
      if (j > 1) power = convolve(power, cur, policy);
      if (atom >= law.support.size() || law.support[atom] != j) continue;
      const double lpj = std::log(law.prob[atom]);
      ++atom;

      if (power.tail_defect() != 0.0) all_exact = false;
      double beyond = 0.0;
      const std::vector<double>& lw = power.log_weights();
      for (std::int64_t k = power.lo(); k <= power.hi(); ++k) {
        const double v = lw[static_cast<size_t>(k - power.lo())];
        if (v == kNegInf) continue;
        if (k > hi_out) {
          beyond += std::exp(v);
          continue;
        }
        double& slot = acc[static_cast<size_t>(k - lo_out)];
        slot = log_add(slot, lpj + v);
      }
      cut += std::exp(lpj) * beyond;
      if (beyond > 0.0) all_exact = false;
    }

    if (cut > policy.tail_tol)
      throw WindowOverflow("generation step " + std::to_string(g + 1) + " cuts " +
                           std::to_string(cut) + " of mass at the window cap");

    double S = 0.0;
    for (double& v : acc) {
      if (v > 0.0) v = 0.0;
      if (v != kNegInf) S += std::exp(v);
    }
    const double defect = all_exact ? 0.0 : std::min(1.0, std::max(0.0, 1.0 - S));
    cur = Pmf(lo_out, std::move(acc), defect, Lattice{d, mod_residue(mu * cur.lattice().residue, d)});
  }

  if (z0 > 1) cur = convolve_power(cur, z0, policy);
  return cur;
}

namespace {

// Query-sized window: entries up to k are exact once the window reaches k,
// by the right-truncation property of the engine.
Pmf pmf_for_query(const OffspringLaw& law, int n, std::int64_t k, std::int64_t z0,
                  const ConvPolicy& policy, std::int64_t* lo_out) {
  if (z0 < 1) throw UsageError("initial population must be >= 1");
  std::int64_t lo = z0;
  for (int g = 0; g < n; ++g) lo *= law.min_support();  // z0 * mu^n
  *lo_out = lo;
  ConvPolicy local = policy;
  local.tail_tol = 1.0;
  const std::int64_t need = k - lo + 1;
  if (need > policy.window_cap)
    throw WindowOverflow("query at k=" + std::to_string(k) + " needs a window of " +
                         std::to_string(need) + " > window_cap=" + std::to_string(policy.window_cap));
  local.window_cap = std::max<std::int64_t>(need, 1);
  return iterate_pmf(law, n, z0, local);
}

}  // namespace

double point_log_prob(const OffspringLaw& law, int n, std::int64_t k, std::int64_t z0,
                      const ConvPolicy& policy) {
  if (n < 0) throw UsageError("generation index must be >= 0");
  std::int64_t lo = 0;
  if (k < z0) return kNegInf;
  Pmf p = pmf_for_query(law, n, k, z0, policy, &lo);
  if (k < lo) return kNegInf;
  return p.log_at(k);
}

double cdf_log_leq(const OffspringLaw& law, int n, std::int64_t k, std::int64_t z0,
                   const ConvPolicy& policy) {
  if (n < 0) throw UsageError("generation index must be >= 0");
  std::int64_t lo = 0;
  if (k < z0) return kNegInf;
  Pmf p = pmf_for_query(law, n, k, z0, policy, &lo);
  if (k < lo) return kNegInf;
  return p.log_cdf_at(k);
}

std::complex<double> evaluate_fn(const OffspringLaw& law, int n, std::complex<double> z) {
  if (n < 0) throw UsageError("generation index must be >= 0");
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw UsageError("generating function argument must be finite");
  if (std::abs(z) > 1.0 + 1e-12)
    throw UsageError("generating function is only evaluated on the closed unit disk");

  std::complex<double> w = z;
  for (int it = 0; it < n; ++it) {
    std::complex<double> acc(0.0, 0.0);
    std::complex<double> pw(1.0, 0.0);
    std::int64_t e = 0;
    for (size_t i = 0; i < law.support.size(); ++i) {
      for (; e < law.support[i]; ++e) pw *= w;
      acc += law.prob[i] * pw;
    }
    w = acc;
    // |f(w)| <= 1 on the disk; shave off accumulated rounding so long
    // iterates cannot drift outside.
    const double r = std::abs(w);
    if (r > 1.0) w /= r;
  }
  return w;
}

LogDerivs log_fn_derivs(const OffspringLaw& law, int n, double t) {
  if (n < 0) throw UsageError("generation index must be >= 0");
  if (!(t <= 0.0)) throw UsageError("log_fn_derivs needs t <= 0");

  const std::int64_t mu = law.min_support();
  std::int64_t j2 = -1;  // smallest atom with j(j-1) > 0
  for (std::int64_t j : law.support)
    if (j >= 2) {
      j2 = j;
      break;
    }

  LogDerivs s{t, 0.0, kNegInf};
  for (int it = 0; it < n; ++it) {
    const double lu = s.lf;

    /*
     * One offspring-law layer at u = e^lu, in logs.  All sums below have
     * positive terms, anchored so the leading exponent is 0:
     *   f(u)   = u^mu * (1 + sum_j p_j expm1((j - mu) lu))   since sum p_j = 1
     *   f'(u)  = u^(mu-1) * sum_j p_j j e^((j - mu) lu)
     *   f''(u) = u^(j2-2) * sum_{j>=2} p_j j (j-1) e^((j - j2) lu)
     */
    double s0m1 = 0.0, s1 = 0.0, s2 = 0.0;
    for (size_t i = 0; i < law.support.size(); ++i) {
      const double j = static_cast<double>(law.support[i]);
      const double pj = law.prob[i];
      s0m1 += pj * std::expm1((j - static_cast<double>(mu)) * lu);
      s1 += pj * j * std::exp((j - static_cast<double>(mu)) * lu);
      if (law.support[i] >= 2)
        s2 += pj * j * (j - 1.0) * std::exp((j - static_cast<double>(j2)) * lu);
    }
    const double lf_u = static_cast<double>(mu) * lu + std::log1p(s0m1);
    const double l1_u = static_cast<double>(mu - 1) * lu + std::log(s1);
    const double l2_u = j2 < 0 ? kNegInf : static_cast<double>(j2 - 2) * lu + std::log(s2);

    const double l1_old = s.l1;
    const double l2_old = s.l2;
    s.lf = std::min(lf_u, 0.0);
    s.l1 = l1_u + l1_old;
    s.l2 = log_add(l2_u + 2.0 * l1_old, l1_u + l2_old);
  }
  return s;
}

std::vector<std::int64_t> simulate(const OffspringLaw& law, int n, std::int64_t reps,
                                   std::uint64_t seed, std::int64_t z0, std::int64_t pop_cap) {
  if (n < 0) throw UsageError("generation index must be >= 0");
  if (reps < 1) throw UsageError("need at least one replicate");
  if (z0 < 1) throw UsageError("initial population must be >= 1");
  if (pop_cap < 1) throw UsageError("population cap must be >= 1");

  // Cumulative thresholds on the full 64-bit range; the last is pinned so
  // every draw lands on an atom.
  std::vector<std::uint64_t> thresh(law.support.size());
  const long double two64 = 18446744073709551616.0L;
  long double cum = 0.0L;
  for (size_t i = 0; i < law.support.size(); ++i) {
    cum += static_cast<long double>(law.prob[i]);
    long double v = cum * two64;
    thresh[i] = v >= two64 ? UINT64_MAX : static_cast<std::uint64_t>(v);
  }
  thresh.back() = UINT64_MAX;

  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> out;
  out.reserve(static_cast<size_t>(reps));
  for (std::int64_t rep = 0; rep < reps; ++rep) {
    std::int64_t z = z0;
    for (int g = 0; g < n; ++g) {
      if (z > pop_cap)
        throw PopulationOverflow("replicate population " + std::to_string(z) +
                                 " exceeds the cap " + std::to_string(pop_cap));
      std::int64_t next = 0;
      for (std::int64_t i = 0; i < z; ++i) {
        const std::uint64_t u = rng();
        const size_t idx = static_cast<size_t>(
            std::upper_bound(thresh.begin(), thresh.end(), u) - thresh.begin());
        next += law.support[idx < thresh.size() ? idx : thresh.size() - 1];
      }
      z = next;
    }
    out.push_back(z);
  }
  return out;
}

}  // namespace gw
