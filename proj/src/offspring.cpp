#include "gw/offspring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gw/errors.hpp"

namespace gw {

double OffspringLaw::mean() const {
  double s = 0.0;
  for (size_t i = 0; i < support.size(); ++i) s += static_cast<double>(support[i]) * prob[i];
  return s;
}

double OffspringLaw::prob_at(std::int64_t j) const {
  auto it = std::lower_bound(support.begin(), support.end(), j);
  if (it == support.end() || *it != j) return 0.0;
  return prob[static_cast<size_t>(it - support.begin())];
}

OffspringLaw validate(const std::map<std::int64_t, double>& p) {
  OffspringLaw law;
  double sum = 0.0;
  for (const auto& [j, pj] : p) {
    if (!std::isfinite(pj) || pj < 0.0)
      throw NonStochastic("offspring probability for j=" + std::to_string(j) + " is not a finite nonnegative number");
    if (pj == 0.0) continue;
    if (j < 0) throw NonStochastic("negative offspring count j=" + std::to_string(j));
    if (j == 0) throw HasZeroOffspring("p_0 must be zero: this library only handles laws with no death");
    law.support.push_back(j);
    law.prob.push_back(pj);
    sum += pj;
  }
  if (law.support.empty()) throw NonStochastic("law has no positive atoms");
  if (std::fabs(sum - 1.0) > 1e-12)
    throw NonStochastic("probabilities sum to " + std::to_string(sum) + ", not 1");
  if (law.support.size() == 1) throw Degenerate("law is a point mass at j=" + std::to_string(law.support.front()));
  if (law.mean() <= 1.0) throw Subcritical("offspring mean is not > 1");
  return law;
}

LawProfile classify(const OffspringLaw& law) {
  LawProfile pr;
  pr.m = law.mean();
  pr.mu = law.min_support();
  pr.p_mu = law.prob.front();

  // Smallest fixed point of f in [0,1] by iterating f from 0.  With p_0 = 0
  // this lands on q = 0 immediately; the loop is kept as a self-check.
  double q = 0.0;
  for (int it = 0; it < 200; ++it) {
    double fq = 0.0;
    for (size_t i = 0; i < law.support.size(); ++i)
      fq += law.prob[i] * std::pow(q, static_cast<double>(law.support[i]));
    if (std::fabs(fq - q) < 1e-14) {
      q = fq;
      break;
    }
    q = fq;
  }
  pr.q = q;

  // f'(q) at q = 0 picks out the j = 1 atom.
  pr.gamma = law.prob_at(1);

  std::int64_t d = 0;
  for (size_t i = 1; i < law.support.size(); ++i)
    d = std::gcd(d, law.support[i] - law.support[i - 1]);
  pr.d = d;

  if (pr.gamma > 0.0) {
    pr.kind = CaseLabel::Schroeder;
    pr.alpha = -std::log(pr.gamma) / std::log(pr.m);
  } else {
    pr.kind = CaseLabel::Boettcher;
    pr.alpha.reset();
    pr.beta = std::log(static_cast<double>(pr.mu)) / std::log(pr.m);
  }
  return pr;
}

int min_stable_summands(const LawProfile& profile) {
  if (!profile.alpha) return 1;
  // The nudge keeps laws whose exponent is analytically an exact reciprocal
  // (alpha = 1 for the geometric family) from falling on the wrong side of
  // the floor through float noise in log ratios.
  return 1 + static_cast<int>(std::floor(1.0 / *profile.alpha + 1e-9));
}

namespace {

double parse_prob(const nlohmann::json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    char* end = nullptr;
    double x = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
      throw UsageError("probability for j=" + key + " is not a decimal string: \"" + s + "\"");
    return x;
  }
  throw UsageError("probability for j=" + key + " must be a number or decimal string");
}

}  // namespace

OffspringLaw law_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("law JSON does not parse: ") + e.what());
  }
  if (!j.is_object() || !j.contains("p") || !j["p"].is_object())
    throw UsageError("law JSON must be an object with a \"p\" object");
  std::map<std::int64_t, double> p;
  for (const auto& [key, val] : j["p"].items()) {
    char* end = nullptr;
    long long k = std::strtoll(key.c_str(), &end, 10);
    if (end == key.c_str() || *end != '\0' || k < 0)
      throw UsageError("offspring count \"" + key + "\" is not a nonnegative integer");
    if (p.count(k)) throw UsageError("duplicate offspring count " + key);
    p[k] = parse_prob(val, key);
  }
  return validate(p);
}

OffspringLaw law_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open law file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return law_from_json(ss.str());
}

std::string law_to_json(const OffspringLaw& law) {
  nlohmann::json p = nlohmann::json::object();
  char buf[40];
  for (size_t i = 0; i < law.support.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", law.prob[i]);
    p[std::to_string(law.support[i])] = std::string(buf);
  }
  nlohmann::json out;
  out["p"] = std::move(p);
  return out.dump(2);
}

OffspringLaw truncated_geometric(double m, double tail) {
  if (!(m > 1.0)) throw Subcritical("geometric family needs mean m > 1");
  if (!(tail > 0.0 && tail < 1.0)) throw UsageError("tail cutoff must be in (0,1)");
  const double a = 1.0 / m;        // success probability
  const double r = 1.0 - a;        // tail ratio: P(X > J) = r^J
  std::map<std::int64_t, double> p;
  double cum = 0.0;
  double pj = a;
  for (std::int64_t j = 1; j < 100000; ++j) {
    p[j] = pj;
    cum += pj;
    if (1.0 - cum < tail) break;
    pj *= r;
  }
  for (auto& [j, v] : p) v /= cum;
  return validate(p);
}

}  // namespace gw
