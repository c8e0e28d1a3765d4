#include "gw/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gw/cramer.hpp"
#include "gw/errors.hpp"
#include "gw/exactdist.hpp"
#include "gw/offspring.hpp"
#include "gw/pmf.hpp"

namespace gw {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// One row-level or summary-level assertion.  `value` is the measured
// quantity, `limit` the threshold it was held against.
struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
};

json checks_json(const std::vector<Check>& checks) {
  json arr = json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"limit", c.limit}});
  return arr;
}

bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

json profile_json(const LawProfile& pr) {
  json j{{"m", pr.m},
         {"d", pr.d},
         {"mu", pr.mu},
         {"p_mu", pr.p_mu},
         {"case", pr.schroeder() ? "schroeder" : "boettcher"}};
  if (pr.alpha) j["alpha"] = *pr.alpha;
  if (pr.beta) j["beta"] = *pr.beta;
  if (pr.schroeder()) j["gamma"] = pr.gamma;
  return j;
}

// Runs `body` against the chosen CSV sink: the --out file when given,
// stdout otherwise.  Binary mode keeps line endings at plain LF.
template <typename Body>
void write_csv(const std::string& path, Body&& body) {
  if (path.empty()) {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open output file: " + path);
  body(out);
  if (!out) throw UsageError("write failed: " + path);
}

void maybe_plot(const std::string& path, const DeviationReport& report, const std::string& series) {
  if (path.empty()) return;
  write_csv(path, [&](std::ostream& out) { emit_plotdata(out, report, series); });
}

void finish(const json& summary) { std::cout << summary.dump(2) << '\n'; }

NormingMode parse_norming(const std::string& name) {
  if (name == "power") return NormingMode::Power;
  if (name == "seneta") return NormingMode::Seneta;
  throw UsageError("unknown norming flavor: " + name);
}

ConvMode parse_conv(const std::string& name) {
  if (name == "fft") return ConvMode::FftHybrid;
  if (name == "direct") return ConvMode::DirectLog;
  throw UsageError("unknown convolution mode: " + name);
}

std::int64_t ipow_checked(std::int64_t base, int e) {
  std::int64_t v = 1;
  for (int i = 0; i < e; ++i) {
    if (v > (std::int64_t{1} << 62) / base)
      throw TargetOutOfRange("mu^n exceeds the integer range");
    v *= base;
  }
  return v;
}

std::int64_t mod_pow(std::int64_t base, int e, std::int64_t mod) {
  std::int64_t r = 1 % mod, b = base % mod;
  for (int i = 0; i < e; ++i) r = (r * b) % mod;
  return r;
}

// Window size for Z_n from the first two moments: mean plus forty standard
// deviations, padded.  The cap counts integers, not lattice points.
std::int64_t auto_window(const OffspringLaw& law, const LawProfile& pr, int n, std::int64_t z0) {
  double ex2 = 0.0;
  for (std::size_t i = 0; i < law.support.size(); ++i)
    ex2 += law.prob[i] * double(law.support[i]) * double(law.support[i]);
  double m = pr.m;
  double varx = std::max(0.0, ex2 - m * m);
  double mn = std::pow(m, n);
  double mean = double(z0) * mn;
  double var = n == 0 ? 0.0 : double(z0) * varx * std::pow(m, n - 1) * (mn - 1.0) / (m - 1.0);
  double lo = double(z0) * std::pow(double(pr.mu), n);
  double span = mean + 40.0 * std::sqrt(var) + 64.0 - lo + 2.0;
  return std::llround(std::clamp(span, 2.0, double(std::int64_t{1} << 22)));
}

int run_pmf(const RunConfig& cfg) {
  OffspringLaw law = law_from_json_file(cfg.law_path);
  LawProfile pr = classify(law);

  ConvPolicy pol;
  pol.mode = parse_conv(cfg.mode);
  pol.tail_tol = cfg.tail_tol >= 0.0 ? cfg.tail_tol : 1.0;
  pol.window_cap = cfg.window_cap > 0 ? cfg.window_cap : auto_window(law, pr, cfg.n, cfg.z0);
  if (cfg.verbosity > 0)
    std::fprintf(stderr, "gw: window capped at %lld integers\n",
                 static_cast<long long>(pol.window_cap));

  Pmf p = iterate_pmf(law, cfg.n, cfg.z0, pol);

  write_csv(cfg.out_path, [&](std::ostream& out) {
    out << "k,prob,log_prob\n";
    for (std::int64_t k = p.lo(); k <= p.hi(); k += p.lattice().d) {
      double lw = p.log_at(k);
      out << k << ',' << fmt17(std::exp(lw)) << ',' << fmt17(lw) << '\n';
    }
  });

  double mass = p.mass();
  std::vector<Check> checks{{"total_mass_within_tol", std::abs(mass - 1.0) <= 1e-9,
                             std::abs(mass - 1.0), 1e-9}};
  finish(json{{"command", "pmf"},
              {"law", cfg.law_path},
              {"profile", profile_json(pr)},
              {"n", cfg.n},
              {"z0", cfg.z0},
              {"mode", cfg.mode},
              {"window_cap", pol.window_cap},
              {"lo", p.lo()},
              {"hi", p.hi()},
              {"mass", mass},
              {"tail_defect", p.tail_defect()},
              {"assertions", checks_json(checks)},
              {"pass", all_pass(checks)}});
  return all_pass(checks) ? 0 : 1;
}

int run_simulate(const RunConfig& cfg) {
  OffspringLaw law = law_from_json_file(cfg.law_path);
  LawProfile pr = classify(law);

  std::vector<std::int64_t> draws = simulate(law, cfg.n, cfg.reps, cfg.seed, cfg.z0, cfg.pop_cap);
  std::map<std::int64_t, std::int64_t> hist;
  double total = 0.0;
  for (std::int64_t v : draws) {
    ++hist[v];
    total += double(v);
  }

  write_csv(cfg.out_path, [&](std::ostream& out) {
    out << "k,count\n";
    for (const auto& [k, c] : hist) out << k << ',' << c << '\n';
  });

  finish(json{{"command", "simulate"},
              {"law", cfg.law_path},
              {"profile", profile_json(pr)},
              {"n", cfg.n},
              {"z0", cfg.z0},
              {"reps", cfg.reps},
              {"seed", cfg.seed},
              {"mean", total / double(cfg.reps)},
              {"min", hist.begin()->first},
              {"max", hist.rbegin()->first},
              {"distinct", hist.size()},
              {"assertions", json::array()},
              {"pass", true}});
  return 0;
}

int run_limits(const RunConfig& cfg) {
  OffspringLaw law = law_from_json_file(cfg.law_path);
  LawProfile pr = classify(law);
  if (!(cfg.grid_min > 0.0 && cfg.grid_max > cfg.grid_min))
    throw UsageError("need 0 < --x-min < --x-max");

  NormingSequence no = norming(law, cfg.norming_depth, parse_norming(cfg.norming_mode));
  DensityTable table = build_density_table(law, no, log_grid(cfg.grid_min, cfg.grid_max, cfg.grid_count), cfg.quad);
  WTransform transform(law, no, cfg.quad);
  double integral = table_integral(table, pr);

  write_csv(cfg.out_path, [&](std::ostream& out) {
    out << "x,w,err\n";
    for (std::size_t i = 0; i < table.x.size(); ++i)
      out << fmt17(table.x[i]) << ',' << fmt17(table.w[i]) << ',' << fmt17(table.err[i]) << '\n';
  });
  if (!cfg.plot_path.empty())
    write_csv(cfg.plot_path, [&](std::ostream& out) { emit_plotdata(out, table, "density"); });

  finish(json{{"command", "limits"},
              {"law", cfg.law_path},
              {"profile", profile_json(pr)},
              {"norming", cfg.norming_mode},
              {"depth", cfg.norming_depth},
              {"points", table.x.size()},
              {"mean_w", transform.mean()},
              {"second_moment_w", transform.second_moment()},
              {"depth_residual", transform.depth_check_residual()},
              {"table_integral", integral},
              {"assertions", json::array()},
              {"pass", true}});
  return 0;
}

int run_cramer(const RunConfig& cfg) {
  OffspringLaw law = law_from_json_file(cfg.law_path);
  LawProfile pr = classify(law);

  int depth = std::max(cfg.norming_depth, cfg.n + 2);
  NormingSequence no = norming(law, depth, parse_norming(cfg.norming_mode));
  TiltedSumSpec spec = make_tilted_spec(law, cfg.h, cfg.n, no);
  Pmf s = tilted_sum_pmf(spec, cfg.ell);

  write_csv(cfg.out_path, [&](std::ostream& out) {
    out << "k,prob,log_prob\n";
    for (std::int64_t k = s.lo(); k <= s.hi(); k += s.lattice().d) {
      double lw = s.log_at(k);
      out << k << ',' << fmt17(std::exp(lw)) << ',' << fmt17(lw) << '\n';
    }
  });

  double mass = s.mass();
  std::vector<Check> checks{{"sum_mass_within_tol", std::abs(mass - 1.0) <= 1e-9,
                             std::abs(mass - 1.0), 1e-9}};
  json summary{{"command", "cramer"},
               {"law", cfg.law_path},
               {"profile", profile_json(pr)},
               {"n", cfg.n},
               {"h", cfg.h},
               {"ell", cfg.ell},
               {"mean1", spec.mean1},
               {"sigma1", spec.sigma1},
               {"c_n", spec.c_n},
               {"normalizer_gap", spec.normalizer_gap},
               {"mass", mass},
               {"assertions", checks_json(checks)},
               {"pass", all_pass(checks)}};
  if (cfg.h > 0.0) summary["lclt_error"] = lclt_error(law, cfg.h, cfg.n, cfg.ell, no);
  finish(summary);
  return all_pass(checks) ? 0 : 1;
}

// ---- verify flavors ------------------------------------------------------

struct VerifyResult {
  std::vector<Check> checks;
  json extra = json::object();
};

VerifyResult verify_schroeder(const RunConfig& cfg, const OffspringLaw& law,
                              const NormingSequence& no) {
  std::vector<std::int64_t> ks = make_power_schedule(law, no, cfg.rho, cfg.n_from, cfg.n_to);
  DeviationReport rep = schroeder_ratio_table(law, no, ks, cfg.n_from, cfg.n_to, cfg.use_cdf, cfg.quad);

  write_csv(cfg.out_path, [&](std::ostream& out) {
    out << "n,k,exact_log,predicted_log,ratio,index,flagged\n";
    for (const auto& r : rep.rows)
      out << r.n << ',' << r.k << ',' << fmt17(r.exact_log) << ',' << fmt17(r.predicted_log)
          << ',' << fmt17(r.ratio) << ',' << r.index << ',' << (r.flagged ? 1 : 0) << '\n';
  });
  maybe_plot(cfg.plot_path, rep, cfg.use_cdf ? "schroeder_cdf" : "schroeder");

  double flagged = 0.0;
  for (const auto& r : rep.rows) flagged += r.flagged ? 1.0 : 0.0;
  double first_dev = std::abs(rep.rows.front().ratio - 1.0);
  double last_dev = std::abs(rep.rows.back().ratio - 1.0);
  VerifyResult res;
  res.checks = {{"no_flagged_rows", flagged == 0.0, flagged, 0.0},
                {"final_ratio_near_one", last_dev < 0.05, last_dev, 0.05},
                {"deviation_shrinks", last_dev <= first_dev + 1e-12, last_dev, first_dev}};
  res.extra = {{"schedule", rep.schedule}, {"rho", cfg.rho}, {"use_cdf", cfg.use_cdf}};
  return res;
}

VerifyResult verify_boettcher(const RunConfig& cfg, const OffspringLaw& law,
                              const NormingSequence& no) {
  LawProfile pr = classify(law);
  if (cfg.n_from < 1) throw UsageError("--n-from must be >= 1");

  DeviationReport rep;
  rep.profile = pr;
  rep.mode = no.mode;
  rep.schedule = "double-exponential band, k just above n mu^n";
  std::vector<double> points, cdfs;
  for (int n = cfg.n_from; n <= cfg.n_to; ++n) {
    std::int64_t mun = ipow_checked(pr.mu, n);
    if (mun > std::numeric_limits<std::int64_t>::max() / (n + 1))
      throw TargetOutOfRange("schedule point exceeds the integer range");
    std::int64_t target = std::int64_t{n} * mun;
    std::int64_t rr = mod_pow(pr.mu, n, pr.d);
    std::int64_t k = target + (((rr - target) % pr.d) + pr.d) % pr.d;
    int b = b_index(no, pr, n, k);
    double point = boettcher_log_ratio(law, no, n, k);
    double cdfv = boettcher_log_ratio_cdf(law, no, n, k);
    points.push_back(point);
    cdfs.push_back(cdfv);
    rep.rows.push_back({n, k, point, cdfv, point, b, false});
    if (cfg.verbosity > 0)
      std::fprintf(stderr, "gw: n=%d k=%lld b=%d point=%.6g cdf=%.6g\n", n,
                   static_cast<long long>(k), b, point, cdfv);
  }

  write_csv(cfg.out_path, [&](std::ostream& out) {
    out << "n,k,b,point_value,cdf_value\n";
    for (const auto& r : rep.rows)
      out << r.n << ',' << r.k << ',' << r.index << ',' << fmt17(r.exact_log) << ','
          << fmt17(r.predicted_log) << '\n';
  });
  maybe_plot(cfg.plot_path, rep, "boettcher");

  auto band = [](const std::vector<double>& v, const std::string& tag) {
    double worst = *std::max_element(v.begin(), v.end());
    bool negative = worst < 0.0;
    double factor = std::numeric_limits<double>::infinity();
    if (negative) {
      double lo = *std::min_element(v.begin(), v.end());
      factor = lo / worst;
    }
    return std::vector<Check>{{tag + "_values_negative", negative, worst, 0.0},
                              {tag + "_band_factor", negative && factor < 20.0, factor, 20.0}};
  };
  VerifyResult res;
  for (auto& c : band(points, "point")) res.checks.push_back(c);
  for (auto& c : band(cdfs, "cdf")) res.checks.push_back(c);
  res.extra = {{"schedule", rep.schedule}};
  return res;
}

VerifyResult verify_minimal(const RunConfig& cfg, const OffspringLaw& law) {
  LawProfile pr = classify(law);
  DeviationReport rep;
  rep.profile = pr;
  rep.schedule = "minimal point, k = mu^n";
  double worst = 0.0;
  for (int n = cfg.n_from; n <= cfg.n_to; ++n) {
    std::int64_t k = ipow_checked(pr.mu, n);
    double closed = minimal_point_logprob(pr, n);
    double engine = point_log_prob(law, n, k);
    double rel = std::abs(engine - closed) / std::max(1.0, std::abs(closed));
    worst = std::max(worst, rel);
    rep.rows.push_back({n, k, engine, closed, rel, 0, false});
  }

  write_csv(cfg.out_path, [&](std::ostream& out) {
    out << "n,k,engine_log,closed_log,rel_err\n";
    for (const auto& r : rep.rows)
      out << r.n << ',' << r.k << ',' << fmt17(r.exact_log) << ',' << fmt17(r.predicted_log)
          << ',' << fmt17(r.ratio) << '\n';
  });
  maybe_plot(cfg.plot_path, rep, "minimal");

  VerifyResult res;
  res.checks = {{"closed_form_match", worst <= 1e-9, worst, 1e-9}};
  res.extra = {{"schedule", rep.schedule}};
  return res;
}

VerifyResult verify_neighbor(const RunConfig& cfg, const OffspringLaw& law) {
  DeviationReport rep = neighbor_ratio_report(law, cfg.n_from, cfg.n_to, cfg.k_offset);

  write_csv(cfg.out_path, [&](std::ostream& out) {
    out << "n,k,exact_log,predicted_log,ratio\n";
    for (const auto& r : rep.rows)
      out << r.n << ',' << r.k << ',' << fmt17(r.exact_log) << ',' << fmt17(r.predicted_log)
          << ',' << fmt17(r.ratio) << '\n';
  });
  maybe_plot(cfg.plot_path, rep, "neighbor");

  double min_ratio = std::numeric_limits<double>::infinity();
  bool finite = true;
  for (const auto& r : rep.rows) {
    if (!std::isfinite(r.ratio)) finite = false;
    min_ratio = std::min(min_ratio, r.ratio);
  }
  // Successive ratio steps must shrink: the value is the worst growth of
  // |r_{i+1} - r_i| from one step to the next.
  double worst_growth = 0.0;
  for (std::size_t i = 2; i < rep.rows.size(); ++i) {
    double prev = std::abs(rep.rows[i - 1].ratio - rep.rows[i - 2].ratio);
    double cur = std::abs(rep.rows[i].ratio - rep.rows[i - 1].ratio);
    worst_growth = std::max(worst_growth, cur - prev);
  }
  VerifyResult res;
  res.checks = {{"ratios_positive_finite", finite && min_ratio > 0.0, min_ratio, 0.0},
                {"ratio_steps_shrink", worst_growth <= 1e-12, worst_growth, 1e-12}};
  res.extra = {{"schedule", rep.schedule}, {"k_offset", cfg.k_offset},
               {"final_ratio", rep.rows.back().ratio}};
  return res;
}

VerifyResult verify_logscale(const RunConfig& cfg, const OffspringLaw& law) {
  DeviationReport rep = log_scale_limit_check(law, cfg.n_from, cfg.n_to, cfg.k_offset);

  write_csv(cfg.out_path, [&](std::ostream& out) {
    out << "n,k,exact_log,limit_log,normalized\n";
    for (const auto& r : rep.rows)
      out << r.n << ',' << r.k << ',' << fmt17(r.exact_log) << ',' << fmt17(r.predicted_log)
          << ',' << fmt17(r.ratio) << '\n';
  });
  maybe_plot(cfg.plot_path, rep, "logscale");

  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& r : rep.rows) worst = std::max(worst, r.ratio);
  const auto& last = rep.rows.back();
  double rel = std::abs(last.ratio / last.predicted_log - 1.0);
  double tol = cfg.k_offset == 0 ? 0.01 : 0.05;
  VerifyResult res;
  res.checks = {{"values_negative", worst < 0.0, worst, 0.0},
                {"final_near_limit", rel < tol, rel, tol}};
  res.extra = {{"schedule", rep.schedule}, {"k_offset", cfg.k_offset},
               {"limit_log", last.predicted_log}};
  return res;
}

int run_verify(const RunConfig& cfg) {
  OffspringLaw law = law_from_json_file(cfg.law_path);
  LawProfile pr = classify(law);
  if (cfg.n_from > cfg.n_to) throw UsageError("--n-from must not exceed --n-to");
  if (cfg.n_from < 0) throw UsageError("--n-from must be >= 0");

  VerifyResult res;
  if (cfg.theorem == "minimal") {
    res = verify_minimal(cfg, law);
  } else {
    int depth = std::max(cfg.norming_depth, cfg.n_to + 4);
    NormingSequence no = norming(law, depth, parse_norming(cfg.norming_mode));
    if (cfg.theorem == "schroeder")
      res = verify_schroeder(cfg, law, no);
    else if (cfg.theorem == "boettcher")
      res = verify_boettcher(cfg, law, no);
    else if (cfg.theorem == "neighbor")
      res = verify_neighbor(cfg, law);
    else if (cfg.theorem == "logscale")
      res = verify_logscale(cfg, law);
    else
      throw UsageError("unknown theorem: " + cfg.theorem);
  }

  json summary{{"command", "verify"},
               {"theorem", cfg.theorem},
               {"law", cfg.law_path},
               {"profile", profile_json(pr)},
               {"norming", cfg.norming_mode},
               {"n_from", cfg.n_from},
               {"n_to", cfg.n_to},
               {"assertions", checks_json(res.checks)},
               {"pass", all_pass(res.checks)}};
  for (auto& [key, value] : res.extra.items()) summary[key] = value;
  finish(summary);
  return all_pass(res.checks) ? 0 : 1;
}

}  // namespace

void emit_plotdata(std::ostream& out, const DeviationReport& report, const std::string& series) {
  out << "x,y,series\n";
  for (const auto& row : report.rows)
    out << row.n << ',' << fmt17(row.ratio) << ',' << series << '\n';
}

void emit_plotdata(std::ostream& out, const DensityTable& table, const std::string& series) {
  out << "x,y,series\n";
  for (std::size_t i = 0; i < table.x.size(); ++i)
    out << fmt17(table.x[i]) << ',' << fmt17(table.w[i]) << ',' << series << '\n';
}

int run(int argc, const char* const* argv) {
  RunConfig cfg;
  CLI::App app{"exact generation-size distributions and limit diagnostics for supercritical branching processes"};
  app.name("gw");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");
  app.add_flag("-v,--verbose", cfg.verbosity, "extra diagnostics on stderr");

  auto add_law = [&](CLI::App* c) {
    c->add_option("--law", cfg.law_path, "offspring law JSON file")->required();
  };
  auto add_out = [&](CLI::App* c) {
    c->add_option("--out", cfg.out_path, "CSV destination (stdout when omitted)");
    c->add_option("--plot", cfg.plot_path, "companion (x, y, series) CSV");
  };
  auto add_norming = [&](CLI::App* c) {
    c->add_option("--norming", cfg.norming_mode, "norming constants flavor")
        ->check(CLI::IsMember({"power", "seneta"}))
        ->capture_default_str();
    c->add_option("--depth", cfg.norming_depth, "norming table depth")
        ->check(CLI::Range(1, 400))
        ->capture_default_str();
  };
  auto add_quad = [&](CLI::App* c) {
    c->add_option("--quad-tol", cfg.quad.tol, "inversion residual tolerance")->capture_default_str();
    c->add_option("--quad-blocks", cfg.quad.max_blocks, "integration block cap")
        ->check(CLI::Range(1, 4000))
        ->capture_default_str();
    c->add_option("--quad-depth", cfg.quad.depth, "fixed transform depth, 0 picks automatically")
        ->check(CLI::Range(0, 400))
        ->capture_default_str();
  };

  CLI::App* pmf = app.add_subcommand("pmf", "exact distribution of the generation size");
  add_law(pmf);
  pmf->add_option("--n", cfg.n, "generation")->check(CLI::Range(0, 64))->capture_default_str();
  pmf->add_option("--z0", cfg.z0, "founding individuals")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  pmf->add_option("--mode", cfg.mode, "convolution engine")
      ->check(CLI::IsMember({"fft", "direct"}))
      ->capture_default_str();
  pmf->add_option("--window-cap", cfg.window_cap, "lattice window entries, 0 sizes from moments")
      ->check(CLI::Range(std::int64_t{0}, std::int64_t{1} << 22))
      ->capture_default_str();
  pmf->add_option("--tail-tol", cfg.tail_tol, "tail mass the window may cut, negative keeps the default");
  add_out(pmf);

  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo draws of the generation size");
  add_law(sim);
  sim->add_option("--n", cfg.n, "generation")->check(CLI::Range(0, 64))->capture_default_str();
  sim->add_option("--z0", cfg.z0, "founding individuals")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim->add_option("--reps", cfg.reps, "replicates")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  sim->add_option("--pop-cap", cfg.pop_cap, "per-replicate population ceiling")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_out(sim);

  CLI::App* lim = app.add_subcommand("limits", "martingale limit density table");
  add_law(lim);
  add_norming(lim);
  add_quad(lim);
  lim->add_option("--x-min", cfg.grid_min, "left edge of the grid")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  lim->add_option("--x-max", cfg.grid_max, "right edge of the grid")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  lim->add_option("--points", cfg.grid_count, "grid size")
      ->check(CLI::Range(2, 100000))
      ->capture_default_str();
  add_out(lim);

  CLI::App* cram = app.add_subcommand("cramer", "tilted sums and local limit diagnostics");
  add_law(cram);
  add_norming(cram);
  cram->add_option("--n", cfg.n, "horizon of each summand")
      ->check(CLI::Range(0, 64))
      ->capture_default_str();
  cram->add_option("--tilt", cfg.h, "tilt parameter")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cram->add_option("--ell", cfg.ell, "number of summands")
      ->check(CLI::Range(1, 1 << 20))
      ->capture_default_str();
  add_out(cram);

  CLI::App* ver = app.add_subcommand("verify", "check a limit statement over a range of generations");
  add_law(ver);
  add_norming(ver);
  add_quad(ver);
  ver->add_option("--theorem", cfg.theorem, "which statement to check")
      ->required()
      ->check(CLI::IsMember({"schroeder", "boettcher", "minimal", "neighbor", "logscale"}));
  ver->add_option("--rho", cfg.rho, "schedule exponent: k_n tracks c_n^rho")->capture_default_str();
  ver->add_option("--n-from", cfg.n_from, "first generation")->capture_default_str();
  ver->add_option("--n-to", cfg.n_to, "last generation")->check(CLI::Range(0, 64))->capture_default_str();
  ver->add_option("--k-offset", cfg.k_offset, "lattice offset above the minimal point")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ver->add_flag("--use-cdf", cfg.use_cdf, "compare tail sums instead of point masses");
  add_out(ver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (pmf->parsed()) return run_pmf(cfg);
    if (sim->parsed()) return run_simulate(cfg);
    if (lim->parsed()) return run_limits(cfg);
    if (cram->parsed()) return run_cramer(cfg);
    if (ver->parsed()) return run_verify(cfg);
    throw UsageError("no subcommand given");
  } catch (const NumericFailure& e) {
    std::fprintf(stderr, "gw: numeric failure: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "gw: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gw: %s\n", e.what());
    return 2;
  }
}

}  // namespace gw
