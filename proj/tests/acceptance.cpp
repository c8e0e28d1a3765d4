// Acceptance sweep: twelve end-to-end checks of the exact engine, the limit
// objects and the deviation machinery, each timed and reported on one line.
// The process exits nonzero when any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gw/cramer.hpp"
#include "gw/deviations.hpp"
#include "gw/exactdist.hpp"
#include "gw/limits.hpp"
#include "gw/offspring.hpp"
#include "gw/pmf.hpp"

namespace {

using gw::ConvMode;
using gw::ConvPolicy;
using gw::LawProfile;
using gw::NormingMode;
using gw::NormingSequence;
using gw::OffspringLaw;
using gw::Pmf;

struct Outcome {
  bool pass = false;
  std::string detail;
};

OffspringLaw geometric2() { return gw::truncated_geometric(2.0); }

OffspringLaw law23() { return gw::validate({{2, 0.5}, {3, 0.5}}); }

std::string fmt(double v, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

// 1. Point probabilities of the geometric law against its closed form over
//    the full (n, k) grid.
Outcome criterion1() {
  const OffspringLaw law = geometric2();
  const double log_half = std::log(0.5);

  std::int64_t bad = 0, total = 0;
  double worst_good = 0.0;
  std::ostringstream frontier;
  for (int n = 1; n <= 12; ++n) {
    ConvPolicy pol;
    pol.mode = ConvMode::FftHybrid;
    pol.window_cap = 4096;
    pol.tail_tol = 1.0;
    const Pmf p = gw::iterate_pmf(law, n, 1, pol);
    const double log_mn = n * log_half;                 // log m^{-n}
    const double log_rest = std::log1p(-std::exp(log_mn));
    std::int64_t first_bad = 0;
    for (std::int64_t k = 1; k <= 4096; ++k) {
      ++total;
      const double oracle = log_mn + double(k - 1) * log_rest;
      const double engine = p.log_at(k);
      const double rel = std::abs(engine - oracle) / std::abs(oracle);
      if (!(rel <= 1e-10)) {
        ++bad;
        if (first_bad == 0) first_bad = k;
      } else {
        worst_good = std::max(worst_good, rel);
      }
    }
    if (first_bad != 0) frontier << " n=" << n << ":k>=" << first_bad;
  }

  Outcome o;
  o.pass = bad == 0;
  std::ostringstream d;
  d << bad << "/" << total << " cells beyond 1e-10; worst clean cell " << fmt(worst_good);
  if (bad != 0)
    d << "; the offspring law stores linear-domain weights, so atoms far in the"
      << " geometric tail are unrepresentable and the window is empty there;"
      << " first failing k:" << frontier.str();
  o.detail = d.str();
  return o;
}

// 2. Minimal-point identity in the Boettcher case, direct-log mode.
Outcome criterion2() {
  const OffspringLaw law = law23();
  double worst = 0.0;
  for (int n = 1; n <= 8; ++n) {
    const std::int64_t k = std::int64_t{1} << n;
    const double engine = gw::point_log_prob(law, n, k);
    const double closed = double(k - 1) * std::log(0.5);
    worst = std::max(worst, std::abs(engine - closed));
  }
  return {worst <= 1e-9, "max abs gap " + fmt(worst)};
}

// Shared schedule for criteria 3 and 4: k_n = 2^{ceil(n/2)}, n = 10..18.
std::vector<std::int64_t> half_power_schedule() {
  std::vector<std::int64_t> ks;
  for (int n = 10; n <= 18; ++n) ks.push_back(std::int64_t{1} << ((n + 1) / 2));
  return ks;
}

// 3. Point ratios trend to one on the half-power schedule, and the density
//    at one matches the exponential limit.
Outcome criterion3() {
  const OffspringLaw law = geometric2();
  const NormingSequence ns = gw::norming(law, 22, NormingMode::Power);
  const auto rep = gw::schroeder_ratio_table(law, ns, half_power_schedule(), 10, 18, false);

  bool monotone = true, clean = true;
  double prev = std::abs(rep.rows.front().ratio - 1.0);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const double dev = std::abs(rep.rows[i].ratio - 1.0);
    if (dev > prev + 1e-12) monotone = false;
    prev = dev;
  }
  for (const auto& r : rep.rows) clean = clean && !r.flagged;
  const double final_dev = std::abs(rep.rows.back().ratio - 1.0);
  const double w1 = gw::density_W(law, 1.0, ns).value;
  const double w_gap = std::abs(w1 - std::exp(-1.0));

  Outcome o;
  o.pass = monotone && clean && final_dev < 0.05 && w_gap <= 1e-4;
  o.detail = "final |ratio-1| " + fmt(final_dev) + ", w(1) gap " + fmt(w_gap) +
             (monotone ? "" : ", deviations not shrinking") + (clean ? "" : ", flagged rows");
  return o;
}

// 4. Same schedule through the tail-sum version.
Outcome criterion4() {
  const OffspringLaw law = geometric2();
  const NormingSequence ns = gw::norming(law, 22, NormingMode::Power);
  const auto rep = gw::schroeder_ratio_table(law, ns, half_power_schedule(), 10, 18, true);
  const double final_dev = std::abs(rep.rows.back().ratio - 1.0);
  return {final_dev < 0.05, "final |ratio-1| " + fmt(final_dev)};
}

// 5. Double-exponential band on the schedule k_n just above n 2^n.
Outcome criterion5() {
  const OffspringLaw law = law23();
  const NormingSequence ns = gw::norming(law, 20, NormingMode::Power);

  std::vector<double> point, cdf;
  for (int n = 5; n <= 10; ++n) {
    const std::int64_t k = std::int64_t{n} << n;  // lattice spacing is 1 here
    point.push_back(gw::boettcher_log_ratio(law, ns, n, k));
    cdf.push_back(gw::boettcher_log_ratio_cdf(law, ns, n, k));
  }

  auto band_ok = [](const std::vector<double>& v) {
    const double hi = *std::max_element(v.begin(), v.end());
    const double lo = *std::min_element(v.begin(), v.end());
    return hi < 0.0 && lo / hi < 20.0;
  };
  auto render = [](const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + fmt(x);
    return s;
  };

  Outcome o;
  o.pass = band_ok(point) && band_ok(cdf);
  o.detail = "point values [" + render(point) + "], cdf values [" + render(cdf) + "]";
  if (!o.pass)
    o.detail += "; this schedule sits at the mean of Z_n for these n, outside the"
                " small-k regime, and the functional changes sign there";
  return o;
}

// 6. Concentration scaling of tilted sums stays within a factor four of its
//    value at the smallest stable summand count.
Outcome criterion6() {
  struct Setup {
    OffspringLaw law;
    int ell0;
  };
  const Setup setups[] = {{geometric2(), 2}, {law23(), 1}};
  const std::vector<int> n_set{4, 5, 6, 7, 8};

  double worst = 0.0;
  bool pass = true;
  for (const auto& s : setups) {
    std::vector<int> ells;
    for (int ell = s.ell0; ell <= 64; ell *= 2) ells.push_back(ell);
    const NormingSequence ns = gw::norming(s.law, 12, NormingMode::Power);
    const auto rows = gw::concentration_scaling_report(s.law, 1.0, n_set, ells, ns);
    for (std::size_t i = 0; i < rows.size(); i += ells.size()) {
      const double base = rows[i].value;
      for (std::size_t j = i; j < i + ells.size(); ++j) {
        worst = std::max(worst, rows[j].value / base);
        pass = pass && rows[j].value <= 4.0 * base;
      }
    }
  }
  return {pass, "max growth over the base value " + fmt(worst)};
}

// 7. Local-CLT discrepancy of the tilted sum shrinks from 4 to 256 summands.
Outcome criterion7() {
  const OffspringLaw law = law23();
  const NormingSequence ns = gw::norming(law, 12, NormingMode::Power);
  const double x = (std::pow(2.0, 4) + std::pow(2.5, 4)) / (2.0 * ns.at(4));
  const double h = gw::solve_saddle(law, 4, x, ns);
  const double e4 = gw::lclt_error(law, h, 4, 4, ns);
  const double e256 = gw::lclt_error(law, h, 4, 256, ns);
  return {e256 < 0.05 && e256 < e4,
          "h " + fmt(h) + ", error " + fmt(e4) + " at 4 vs " + fmt(e256) + " at 256"};
}

std::complex<double> charfn_of_pmf(const Pmf& s, double t) {
  std::complex<double> acc = 0.0;
  const double base = s.max_log();
  for (std::int64_t i = 0; i < s.width(); ++i) {
    const double lw = s.log_weights()[i];
    if (lw == -std::numeric_limits<double>::infinity()) continue;
    const double k = double(s.lo() + i);  // storage is dense in k
    acc += std::exp(lw - base) * std::complex<double>(std::cos(t * k), std::sin(t * k));
  }
  return acc * std::exp(base);
}

// 8. Tilting is exactly normalized and the sum's characteristic function
//    matches the generating-function identity, over random configurations.
Outcome criterion8() {
  std::vector<OffspringLaw> pool{geometric2(),
                                 law23(),
                                 gw::validate({{2, 0.7}, {3, 0.3}}),
                                 gw::validate({{2, 0.3}, {4, 0.7}}),
                                 gw::validate({{1, 0.6}, {4, 0.4}}),
                                 gw::validate({{3, 0.4}, {5, 0.6}})};
  std::vector<NormingSequence> norms;
  for (const auto& law : pool) norms.push_back(gw::norming(law, 10, NormingMode::Power));

  std::mt19937 rng(20260817u);
  std::uniform_real_distribution<double> uh(0.1, 1.5);
  std::uniform_int_distribution<int> un(2, 5), ul(2, 3), up(0, int(pool.size()) - 1);

  double worst_mass = 0.0, worst_id = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int pi = up(rng);
    const double h = uh(rng);
    const int n = un(rng);
    const int ell = ul(rng);
    const auto& law = pool[pi];
    const auto& ns = norms[pi];

    const auto spec = gw::make_tilted_spec(law, h, n, ns);
    worst_mass = std::max(worst_mass, std::abs(spec.tilted.mass() - 1.0));

    ConvPolicy direct;
    direct.window_cap = std::int64_t{1} << 16;
    const Pmf s = gw::tilted_sum_pmf(spec, ell, direct);
    const double r = std::exp(-h / ns.at(n));
    const double den = gw::evaluate_fn(law, n, {r, 0.0}).real();
    for (double t : {0.1, 0.7}) {
      const double lhs = std::abs(charfn_of_pmf(s, t));
      const double rhs = std::pow(std::abs(gw::evaluate_fn(law, n, std::polar(r, t))) / den,
                                  double(ell));
      worst_id = std::max(worst_id, std::abs(lhs - rhs));
    }
  }
  return {worst_mass <= 1e-12 && worst_id <= 1e-8,
          "worst mass gap " + fmt(worst_mass) + ", worst identity gap " + fmt(worst_id)};
}

// 9. The saddle at the midpoint of the geometric limit converges to 1/x - 1.
Outcome criterion9() {
  const OffspringLaw law = geometric2();
  const NormingSequence ns = gw::norming(law, 24, NormingMode::Power);
  const double h = gw::solve_saddle(law, 20, 0.5, ns);
  return {std::abs(h - 1.0) < 0.02, "h_20(1/2) = " + fmt(h, 9)};
}

// 10. Tail exponents of the density: bounded profile in the Schroeder case,
//     a factor-ten band for the double-exponential exponent otherwise.
Outcome criterion10() {
  const OffspringLaw geo = geometric2();
  const NormingSequence ng = gw::norming(geo, 22, NormingMode::Power);
  gw::WTransform tg(geo, ng);
  const double alpha = tg.profile().alpha.value();
  double lo_a = 1e300, hi_a = 0.0;
  for (double x : gw::log_grid(0.01, 1.0, 25)) {
    const double v = std::pow(x, 1.0 - alpha) * tg.density(x).value;
    lo_a = std::min(lo_a, v);
    hi_a = std::max(hi_a, v);
  }
  const bool pass_a = lo_a > 0.0 && hi_a / lo_a < 10.0;

  const OffspringLaw l23 = law23();
  const NormingSequence nb = gw::norming(l23, 20, NormingMode::Power);
  gw::WTransform tb(l23, nb);
  const double beta = tb.profile().beta.value();
  const double expo = beta / (1.0 - beta);
  double lo_b = 1e300, hi_b = 0.0;
  for (double x : {0.05, 0.1, 0.2, 0.3, 0.4, 0.5}) {
    // The Fourier inversion resolves the density only where it is not yet
    // microscopic; further left the tilted left-tail exponent takes over.
    const double log_w = x >= 0.4 ? std::log(tb.density(x).value)
                                  : gw::log_density_left_tail(l23, x, nb).value;
    const double v = -log_w * std::pow(x, expo);
    lo_b = std::min(lo_b, v);
    hi_b = std::max(hi_b, v);
  }
  const bool pass_b = lo_b > 0.0 && hi_b / lo_b < 10.0;

  return {pass_a && pass_b, "profile ratio " + fmt(hi_a / lo_a) + ", exponent band [" +
                                fmt(lo_b) + ", " + fmt(hi_b) + "]"};
}

// 11. Monte Carlo frequencies sit within three binomial standard errors of
//     the exact point masses at the fifty most probable points.
Outcome criterion11() {
  const OffspringLaw law = geometric2();
  ConvPolicy pol;
  pol.mode = ConvMode::FftHybrid;
  pol.window_cap = 4096;
  pol.tail_tol = 1.0;
  const Pmf exact = gw::iterate_pmf(law, 6, 1, pol);

  const std::int64_t reps = 1000000;
  const auto draws = gw::simulate(law, 6, reps, 3u);
  std::map<std::int64_t, std::int64_t> hist;
  for (std::int64_t v : draws) ++hist[v];

  // The point masses decay in k, so the fifty most probable points are
  // k = 1..50.
  double worst_z = 0.0;
  for (std::int64_t k = 1; k <= 50; ++k) {
    const double p = std::exp(exact.log_at(k));
    const double emp = double(hist.count(k) ? hist[k] : 0) / double(reps);
    const double se = std::sqrt(p * (1.0 - p) / double(reps));
    worst_z = std::max(worst_z, std::abs(emp - p) / se);
  }
  return {worst_z <= 3.0, "worst |z| " + fmt(worst_z) + " over k = 1..50"};
}

// Independent brute-force oracle: per-individual subtree distributions by
// plain recursion in linear arithmetic, no convolution machinery shared
// with the engine.
class TreeOracle {
 public:
  explicit TreeOracle(const OffspringLaw& law) : law_(law) {}

  // P(one founder has k descendants in generation g).
  double one(int g, std::int64_t k) {
    if (g == 0) return k == 1 ? 1.0 : 0.0;
    auto key = std::make_pair(g, k);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    double total = 0.0;
    for (std::size_t a = 0; a < law_.support.size(); ++a)
      total += law_.prob[a] * children(law_.support[a], g - 1, k);
    memo_.emplace(key, total);
    return total;
  }

 private:
  // P(c independent subtrees of depth g hold k individuals in total).
  double children(std::int64_t c, int g, std::int64_t k) {
    if (c == 0) return k == 0 ? 1.0 : 0.0;
    if (k <= 0) return 0.0;
    double total = 0.0;
    for (std::int64_t v = 1; v <= k; ++v) {
      const double pv = one(g, v);
      if (pv > 0.0) total += pv * children(c - 1, g, k - v);
    }
    return total;
  }

  OffspringLaw law_;
  std::map<std::pair<int, std::int64_t>, double> memo_;
};

// 12. The engine agrees with exhaustive tree enumeration on small laws.
Outcome criterion12() {
  const std::vector<std::map<std::int64_t, double>> grid{
      {{1, 0.5}, {2, 0.5}},
      {{1, 0.3}, {3, 0.7}},
      {{2, 0.6}, {3, 0.4}},
      {{1, 0.2}, {2, 0.3}, {3, 0.5}},
      {{1, 0.7}, {2, 0.2}, {3, 0.1}}};

  double worst = 0.0;
  bool zeros_clean = true;
  for (const auto& spec : grid) {
    const OffspringLaw law = gw::validate(spec);
    TreeOracle oracle(law);
    for (int n = 1; n <= 3; ++n) {
      ConvPolicy pol;
      pol.window_cap = 128;
      pol.tail_tol = 1.0;
      const Pmf p = gw::iterate_pmf(law, n, 1, pol);
      std::int64_t hi = 1;
      for (int g = 0; g < n; ++g) hi *= law.max_support();
      for (std::int64_t k = 1; k <= hi; ++k) {
        const double o = oracle.one(n, k);
        const double e = std::exp(p.log_at(k));
        if (o > 0.0)
          worst = std::max(worst, std::abs(e / o - 1.0));
        else if (e != 0.0)
          zeros_clean = false;
      }
    }
  }
  return {worst <= 1e-12 && zeros_clean,
          "worst relative gap " + fmt(worst) + (zeros_clean ? "" : ", phantom mass at zeros")};
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {"geometric closed form over the full grid", criterion1},
      {"minimal-point identity, direct-log mode", criterion2},
      {"point ratios trend to one on the half-power schedule", criterion3},
      {"tail-sum ratios reach the same limit", criterion4},
      {"double-exponential band above n 2^n", criterion5},
      {"concentration scaling bounded in the summand count", criterion6},
      {"local-CLT discrepancy shrinks with more summands", criterion7},
      {"tilt normalization and characteristic-function identity", criterion8},
      {"saddle point converges to the exponential-limit value", criterion9},
      {"density tail exponents stay in band", criterion10},
      {"Monte Carlo frequencies match exact point masses", criterion11},
      {"exhaustive tree enumeration agrees with the engine", criterion12},
  };

  int failures = 0;
  int idx = 0;
  for (const auto& e : entries) {
    ++idx;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = e.fn();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.detail = std::string("exception: ") + ex.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s  %2d  %-55s  %6.2fs  %s\n", o.pass ? "PASS" : "FAIL", idx, e.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/12 criteria passed\n", 12 - failures);
  return failures == 0 ? 0 : 1;
}
