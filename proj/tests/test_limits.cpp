#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "gw/errors.hpp"
#include "gw/exactdist.hpp"
#include "gw/limits.hpp"
#include "gw/offspring.hpp"

using namespace gw;

namespace {

OffspringLaw geometric() { return truncated_geometric(2.0); }

OffspringLaw two_three() { return law_from_json(R"({"p": {"2": 0.5, "3": 0.5}})"); }

// Riemann/trapezoid self-convolution of a density sampled on 0, dx, 2dx, ...
std::vector<double> convolve_density(const std::vector<double>& a, const std::vector<double>& b,
                                     double dx) {
  const std::size_t n = a.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    double s = 0.5 * (a[0] * b[i] + a[i] * b[0]);
    for (std::size_t j = 1; j < i; ++j) s += a[j] * b[i - j];
    out[i] = s * dx;
  }
  return out;
}

}  // namespace

TEST_CASE("power norming is the plain mean power") {
  const NormingSequence seq = norming(geometric(), 12, NormingMode::Power);
  CHECK(seq.n_max() == 12);
  CHECK(seq.at(0) == 1.0);
  CHECK(seq.at(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(seq.at(4) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(seq.log_at(10) == doctest::Approx(10.0 * std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(seq.at(13), BeyondNorming);
  CHECK_THROWS_AS(seq.at(-1), BeyondNorming);
  CHECK_THROWS_AS(norming(geometric(), -1, NormingMode::Power), UsageError);
}

TEST_CASE("seneta norming matches the geometric closed form") {
  const NormingSequence seq = norming(geometric(), 40, NormingMode::Seneta);
  // f(e^{-h}) = 1/e solved in closed form: e^{-h} = 2/(e+1)
  const double c1 = 1.0 / std::log(0.5 * (std::exp(1.0) + 1.0));
  CHECK(seq.at(0) == 1.0);
  CHECK(seq.at(1) == doctest::Approx(c1).epsilon(1e-9));
  // c_n / m^n converges to 1/(e-1) for the standard exponential limit
  const double limit_ratio = 1.0 / (std::exp(1.0) - 1.0);
  CHECK(std::exp(seq.log_at(40) - 40.0 * std::log(2.0)) ==
        doctest::Approx(limit_ratio).epsilon(1e-9));
  double prev_gap = 1e300;
  for (int n = 1; n <= 40; ++n) {
    CHECK(seq.at(n) > seq.at(n - 1));
    CHECK(seq.at(n) <= 2.0 * seq.at(n - 1) * (1.0 + 1e-12));
    if (n >= 5) {
      const double gap = std::abs(std::exp(seq.log_at(n) - n * std::log(2.0)) -
                                  std::exp(seq.log_at(n - 1) - (n - 1) * std::log(2.0)));
      CHECK(gap <= prev_gap * (1.0 + 1e-9));
      prev_gap = gap;
    }
  }
}

TEST_CASE("seneta norming works for a law with min support 2") {
  const NormingSequence seq = norming(two_three(), 25, NormingMode::Seneta);
  for (int n = 1; n <= 25; ++n) {
    CHECK(seq.at(n) > seq.at(n - 1));
    CHECK(seq.at(n) <= 2.5 * seq.at(n - 1) * (1.0 + 1e-12));
  }
}

TEST_CASE("schroeder function reproduces s/(1-s) for the geometric law") {
  const OffspringLaw law = geometric();
  const auto mid = schroeder_function(law, {0.5, 0.0}, 60);
  CHECK(mid.value.real() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mid.value.imag() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(mid.residual < 1e-10);

  const auto zero = schroeder_function(law, {0.0, 0.0}, 10);
  CHECK(zero.value == std::complex<double>(0.0, 0.0));
  CHECK(zero.residual == 0.0);

  // S'(0) = 1 pins the normalization
  const auto tiny = schroeder_function(law, {1e-6, 0.0}, 60);
  CHECK(tiny.value.real() / 1e-6 == doctest::Approx(1.0).epsilon(1e-4));

  const std::complex<double> z(0.3, 0.4);
  const auto cplx = schroeder_function(law, z, 80);
  const std::complex<double> expect = z / (1.0 - z);
  CHECK(std::abs(cplx.value - expect) < 1e-9);

  CHECK_THROWS_AS(schroeder_function(two_three(), {0.5, 0.0}, 20), NotSchroeder);
  CHECK_THROWS_AS(schroeder_function(law, {1.0, 0.0}, 20), TargetOutOfRange);
  CHECK_THROWS_AS(schroeder_function(law, {0.8, 0.7}, 20), TargetOutOfRange);
  CHECK_THROWS_AS(schroeder_function(law, {0.5, 0.0}, 0), UsageError);
}

TEST_CASE("schroeder coefficients converge to the geometric limit") {
  const auto nu = schroeder_coeffs(geometric(), 3, 30);
  REQUIRE(nu.size() == 3);
  for (const auto& c : nu) {
    // gamma^{-n} P(Z_n = k) = (1 - 2^{-n})^{k-1} -> 1
    CHECK(c.value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(c.residual < 1e-6);
  }
}

TEST_CASE("schroeder coefficients honor the support lattice") {
  const OffspringLaw law = law_from_json(R"({"p": {"1": 0.5, "3": 0.5}})");
  const auto nu = schroeder_coeffs(law, 8, 12);
  REQUIRE(nu.size() == 8);
  for (int k = 1; k <= 8; ++k) {
    if (k % 2 == 0) {
      CHECK(nu[static_cast<std::size_t>(k - 1)].value == 0.0);
    } else {
      CHECK(nu[static_cast<std::size_t>(k - 1)].value > 0.0);
    }
  }
}

TEST_CASE("schroeder coefficients sum back to the schroeder function") {
  const OffspringLaw law = geometric();
  const auto nu = schroeder_coeffs(law, 60, 30);
  double sum = 0.0;
  double sk = 1.0;
  for (int k = 1; k <= 60; ++k) {
    sk *= 0.3;
    sum += nu[static_cast<std::size_t>(k - 1)].value * sk;
  }
  const auto s = schroeder_function(law, {0.3, 0.0}, 60);
  CHECK(sum == doctest::Approx(s.value.real()).epsilon(1e-8));
  CHECK_THROWS_AS(schroeder_coeffs(law, 0, 10), UsageError);
  CHECK_THROWS_AS(schroeder_coeffs(law, 5, 1), UsageError);
  CHECK_THROWS_AS(schroeder_coeffs(two_three(), 5, 10), NotSchroeder);
}

TEST_CASE("boettcher function satisfies its functional equation") {
  const OffspringLaw law = two_three();
  const auto b1 = boettcher_function(law, 1.0, 30);
  CHECK(b1.value == 1.0);
  CHECK(b1.residual == 0.0);

  // B(f(s)) = B(s)^mu with f(0.7) = 0.5(0.49 + 0.343)
  const auto bs = boettcher_function(law, 0.7, 40);
  const auto bf = boettcher_function(law, 0.4165, 40);
  CHECK(bf.value == doctest::Approx(bs.value * bs.value).epsilon(1e-9));
  CHECK(bs.residual < 1e-9);

  const auto lo = boettcher_function(law, 0.3, 40);
  const auto mid = boettcher_function(law, 0.5, 40);
  const auto hi = boettcher_function(law, 0.9, 40);
  CHECK(lo.value < mid.value);
  CHECK(mid.value < hi.value);
  CHECK(lo.value > 0.0);

  CHECK_THROWS_AS(boettcher_function(geometric(), 0.5, 20), NotBoettcher);
  CHECK_THROWS_AS(boettcher_function(law, 0.0, 20), TargetOutOfRange);
  CHECK_THROWS_AS(boettcher_function(law, 1.5, 20), TargetOutOfRange);
  CHECK_THROWS_AS(boettcher_function(law, 0.5, 0), UsageError);
}

TEST_CASE("laplace transform of W matches 1/(1+h) for the geometric law") {
  const OffspringLaw law = geometric();
  const NormingSequence seq = norming(law, 36, NormingMode::Power);
  const auto at0 = laplace_W(law, 0.0, seq, 35);
  CHECK(at0.value == 1.0);
  const auto at1 = laplace_W(law, 1.0, seq, 35);
  CHECK(at1.value == doctest::Approx(0.5).epsilon(1e-8));
  const auto at2 = laplace_W(law, 2.0, seq, 35);
  CHECK(at2.value == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  double prev = 1.1;
  for (double h : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    const auto v = laplace_W(law, h, seq, 35);
    CHECK(v.value < prev);
    CHECK(v.residual < 1e-8);
    prev = v.value;
  }
  CHECK_THROWS_AS(laplace_W(law, -0.5, seq, 35), UsageError);
  CHECK_THROWS_AS(laplace_W(law, 1.0, seq, 37), BeyondNorming);
}

TEST_CASE("characteristic function of W matches 1/(1-iu) for the geometric law") {
  const OffspringLaw law = geometric();
  const NormingSequence seq = norming(law, 36, NormingMode::Power);
  CHECK(charfn_W(law, 0.0, seq, 35) == std::complex<double>(1.0, 0.0));
  const auto at1 = charfn_W(law, 1.0, seq, 35);
  CHECK(std::abs(at1 - std::complex<double>(0.5, 0.5)) < 1e-6);
  for (double u : {0.3, 1.0, 4.0}) {
    CHECK(charfn_W(law, -u, seq, 35) == std::conj(charfn_W(law, u, seq, 35)));
  }
}

TEST_CASE("cached transform reproduces the geometric density and cdf") {
  const OffspringLaw law = geometric();
  const NormingSequence seq = norming(law, 40, NormingMode::Power);
  const WTransform wt(law, seq);

  CHECK(wt.profile().schroeder());
  CHECK(wt.mean() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(wt.second_moment() == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(wt.depth_check_residual() < 1e-10);

  // psi(2u) = f(psi(u)): the scaling relation the whole construction rides on
  for (double u : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const std::complex<double> lhs = wt.charfn(2.0 * u);
    const std::complex<double> rhs = evaluate_fn(law, 1, wt.charfn(u));
    CHECK(std::abs(lhs - rhs) < 1e-6);
  }
  CHECK(wt.charfn(-1.5) == std::conj(wt.charfn(1.5)));

  const auto w1 = wt.density(1.0);
  CHECK(w1.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-4));
  CHECK(std::abs(w1.value - std::exp(-1.0)) < 1e-6);

  for (double x : log_grid(0.01, 10.0, 25)) {
    const auto d = wt.density(x);
    CHECK(std::abs(d.value - std::exp(-x)) < 1e-4);
    CHECK(d.residual < 1e-4);
    const auto c = wt.cdf(x);
    CHECK(std::abs(c.value - (1.0 - std::exp(-x))) < 1e-4);
  }

  const auto f1 = wt.cdf(1.0);
  CHECK(f1.value == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-4));
  CHECK(wt.cdf(1e-3).value < 0.01);
  double prev = -1.0;
  for (double x : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double f = wt.cdf(x).value;
    CHECK(f > prev);
    CHECK(f > 0.0);
    CHECK(f < 1.0);
    prev = f;
  }

  CHECK_THROWS_AS(wt.density(0.0), TargetOutOfRange);
  CHECK_THROWS_AS(wt.density(-1.0), TargetOutOfRange);
  CHECK_THROWS_AS(wt.cdf(0.0), TargetOutOfRange);
}

TEST_CASE("transform construction validates its inputs") {
  const NormingSequence seq = norming(geometric(), 40, NormingMode::Power);
  QuadParams bad;
  bad.panels_per_block = 4;
  CHECK_THROWS_AS(WTransform(geometric(), seq, bad), UsageError);
  // norming from a different law
  CHECK_THROWS_AS(WTransform(two_three(), seq, QuadParams{}), UsageError);
}

TEST_CASE("one-shot wrappers agree with the cached transform") {
  const OffspringLaw law = geometric();
  const NormingSequence seq = norming(law, 40, NormingMode::Power);
  const WTransform wt(law, seq);
  const auto a = density_W(law, 0.7, seq);
  const auto b = wt.density(0.7);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-14));
  const auto ca = cdf_W(law, 0.7, seq);
  const auto cb = wt.cdf(0.7);
  CHECK(ca.value == doctest::Approx(cb.value).epsilon(1e-14));
}

TEST_CASE("seneta-normed density is the power density rescaled") {
  const OffspringLaw law = geometric();
  const NormingSequence seq = norming(law, 60, NormingMode::Seneta);
  const WTransform wt(law, seq);
  const double scale = std::exp(1.0) - 1.0;  // E W under this norming
  CHECK(wt.mean() == doctest::Approx(scale).epsilon(1e-9));
  // W is Exp(1) under power norming, so here w(x) = e^{-x/scale} / scale
  for (double x : {0.5, 1.0, 2.0}) {
    const auto d = wt.density(x);
    CHECK(d.value == doctest::Approx(std::exp(-x / scale) / scale).epsilon(1e-4));
  }
}

TEST_CASE("density table integrates to one") {
  const OffspringLaw geo = geometric();
  const NormingSequence gseq = norming(geo, 40, NormingMode::Power);
  const DensityTable gt = build_density_table(geo, gseq, log_grid(1e-3, 20.0, 400));
  CHECK(table_integral(gt, classify(geo)) == doctest::Approx(1.0).epsilon(5e-4));
  for (std::size_t i = 0; i < gt.w.size(); ++i) CHECK(gt.w[i] >= 0.0);

  const OffspringLaw bt = two_three();
  const NormingSequence bseq = norming(bt, 60, NormingMode::Power);
  const DensityTable btab = build_density_table(bt, bseq, log_grid(1e-3, 8.0, 300));
  CHECK(table_integral(btab, classify(bt)) == doctest::Approx(1.0).epsilon(5e-4));

  // bounded density: the grid maximum should not dwarf the rest of the
  // top decile, i.e. no spurious spike anywhere
  std::vector<double> sorted = btab.w;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  CHECK(sorted.front() < 10.0 * sorted[sorted.size() / 10 / 2]);
}

TEST_CASE("table building validates the grid") {
  const NormingSequence seq = norming(geometric(), 40, NormingMode::Power);
  CHECK_THROWS_AS(build_density_table(geometric(), seq, {1.0}, QuadParams{}), UsageError);
  CHECK_THROWS_AS(build_density_table(geometric(), seq, {1.0, 0.5}, QuadParams{}), UsageError);
  CHECK_THROWS_AS(build_density_table(geometric(), seq, {-1.0, 0.5}, QuadParams{}), UsageError);
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 5), UsageError);
  CHECK_THROWS_AS(log_grid(2.0, 1.0, 5), UsageError);
  CHECK_THROWS_AS(log_grid(0.5, 1.0, 1), UsageError);
  const auto g = log_grid(0.5, 4.0, 7);
  CHECK(g.front() == 0.5);
  CHECK(g.back() == 4.0);
  CHECK(g.size() == 7);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
}

TEST_CASE("density satisfies the one-step self-similarity identity") {
  // m^{-1} w(x/m) = sum_l P(Z_1 = l) w^{*l}(x), checked from tables alone
  const double dx = 0.005;
  const int count = 1600;

  SUBCASE("geometric") {
    const OffspringLaw law = geometric();
    const NormingSequence seq = norming(law, 40, NormingMode::Power);
    std::vector<double> grid(count);
    for (int i = 1; i <= count; ++i) grid[static_cast<std::size_t>(i - 1)] = dx * i;
    const DensityTable tab = build_density_table(law, seq, grid);
    std::vector<double> w(static_cast<std::size_t>(count) + 1);
    w[0] = tab.w[0] * tab.w[0] / std::max(tab.w[1], 1e-300);
    for (int i = 1; i <= count; ++i) w[static_cast<std::size_t>(i)] = tab.w[static_cast<std::size_t>(i - 1)];

    std::vector<double> rhs(w.size(), 0.0);
    std::vector<double> conv = w;
    double pl = 1.0;
    for (int l = 1; l <= 14; ++l) {
      pl *= 0.5;  // P(Z_1 = l) = 2^{-l}
      if (l > 1) conv = convolve_density(conv, w, dx);
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += pl * conv[i];
    }
    for (double x : {0.5, 1.0, 2.0, 3.0}) {
      const std::size_t i = static_cast<std::size_t>(std::lround(x / dx));
      const std::size_t ih = static_cast<std::size_t>(std::lround(x / 2.0 / dx));
      const double lhs = 0.5 * w[ih];
      CHECK(rhs[i] == doctest::Approx(lhs).epsilon(5e-3));
    }
  }

  SUBCASE("minimum two offspring") {
    const OffspringLaw law = two_three();
    const NormingSequence seq = norming(law, 60, NormingMode::Power);
    std::vector<double> grid(count);
    for (int i = 1; i <= count; ++i) grid[static_cast<std::size_t>(i - 1)] = dx * i;
    const DensityTable tab = build_density_table(law, seq, grid);
    std::vector<double> w(static_cast<std::size_t>(count) + 1);
    w[0] = 0.0;
    for (int i = 1; i <= count; ++i) w[static_cast<std::size_t>(i)] = tab.w[static_cast<std::size_t>(i - 1)];

    const std::vector<double> w2 = convolve_density(w, w, dx);
    const std::vector<double> w3 = convolve_density(w2, w, dx);
    // x chosen so both x and x/2.5 land on the grid exactly
    for (double x : {1.5, 2.0, 2.5}) {
      const std::size_t i = static_cast<std::size_t>(std::lround(x / dx));
      const std::size_t ih = static_cast<std::size_t>(std::lround(x / 2.5 / dx));
      const double lhs = w[ih] / 2.5;
      const double rhs = 0.5 * w2[i] + 0.5 * w3[i];
      CHECK(rhs == doctest::Approx(lhs).epsilon(5e-3));
    }

    // convolution powers against the mass bound: w^{*2}(x) <= sup(w) F(x)
    const WTransform wt(law, seq);
    const double sup_w = *std::max_element(w.begin(), w.end());
    for (double x : {0.2, 0.5, 1.5}) {
      const std::size_t i = static_cast<std::size_t>(std::lround(x / dx));
      CHECK(w2[i] <= sup_w * wt.cdf(x).value * 1.05 + 1e-12);
    }
  }
}

TEST_CASE("left tail of the density stays in its theoretical envelope") {
  SUBCASE("power-law envelope when p_1 > 0") {
    for (const char* text : {R"({"p": {"1": 0.6, "4": 0.4}})",
                             R"({"p": {"1": 0.5, "2": 0.25, "3": 0.25}})"}) {
      const OffspringLaw law = law_from_json(text);
      const LawProfile profile = classify(law);
      const NormingSequence seq = norming(law, 60, NormingMode::Power);
      QuadParams qp;
      qp.tol = 1e-2;  // non-dyadic mean: the extrapolation model is rougher
      const WTransform wt(law, seq, qp);
      double lo = 1e300;
      double hi = 0.0;
      for (double x : log_grid(0.01, 1.0, 13)) {
        const auto d = wt.density(x);
        const double v = std::pow(x, 1.0 - *profile.alpha) * d.value;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      CHECK(hi / lo < 10.0);
    }
  }

  SUBCASE("stretched-exponential envelope when min support is 2") {
    const OffspringLaw law = two_three();
    const LawProfile profile = classify(law);
    const NormingSequence seq = norming(law, 60, NormingMode::Power);
    const WTransform wt(law, seq);
    const double power = *profile.beta / (1.0 - *profile.beta);
    double lo = 1e300;
    double hi = 0.0;
    for (double x : {0.05, 0.1, 0.2, 0.3}) {
      const auto lt = log_density_left_tail(law, x, seq);
      const double v = -lt.value * std::pow(x, power);
      CHECK(v > 0.0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    for (double x : {0.4, 0.5}) {
      const auto d = wt.density(x);
      REQUIRE(d.value > 0.0);
      const double v = -std::log(d.value) * std::pow(x, power);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(hi / lo < 10.0);
  }
}

TEST_CASE("tilted saddle point agrees with the fourier density") {
  const OffspringLaw law = two_three();
  const NormingSequence seq = norming(law, 60, NormingMode::Power);
  const WTransform wt(law, seq);
  // where both methods resolve the value they should coincide
  const auto lt = log_density_left_tail(law, 0.4, seq);
  const auto d = wt.density(0.4);
  CHECK(std::exp(lt.value) == doctest::Approx(d.value).epsilon(0.02));

  // the geometric law exposes the one-step normal-approximation bias
  // exactly: log w_saddle(x) - log w(x) = 1 - log(2 pi)/2 for Exp(1)
  const OffspringLaw geo = geometric();
  const NormingSequence gseq = norming(geo, 40, NormingMode::Power);
  const double bias = 1.0 - 0.5 * std::log(2.0 * 3.14159265358979323846);
  for (double x : {0.3, 0.5, 1.0}) {
    const auto g = log_density_left_tail(geo, x, gseq);
    CHECK(g.value + x == doctest::Approx(bias).epsilon(1e-3));
  }
  CHECK_THROWS_AS(log_density_left_tail(law, 1.2, seq), TargetOutOfRange);
  CHECK_THROWS_AS(log_density_left_tail(law, 0.0, seq), TargetOutOfRange);
}
