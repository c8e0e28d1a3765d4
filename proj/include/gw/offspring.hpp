#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gw {

// Offspring distribution of a single individual: finitely many atoms
// p_j > 0 on integers j >= 1.  validate() is the only constructor path, so
// an OffspringLaw in hand is always stochastic, supercritical and free of
// the j = 0 atom.
struct OffspringLaw {
  std::vector<std::int64_t> support;  // ascending, all >= 1
  std::vector<double> prob;           // same length, all > 0, sums to 1 (1e-12)

  std::int64_t min_support() const { return support.front(); }
  std::int64_t max_support() const { return support.back(); }
  double mean() const;
  double prob_at(std::int64_t j) const;  // 0 when j is not an atom
};

enum class CaseLabel { Schroeder, Boettcher };

// Derived classification data.  alpha is the Schroeder exponent
// -log(gamma)/log(m); it is unset in the Boettcher case (gamma = 0), which
// stands for an infinite exponent.  beta = log(mu)/log(m) is set only in
// the Boettcher case.
struct LawProfile {
  double m = 0.0;
  double q = 0.0;
  double gamma = 0.0;
  std::optional<double> alpha;
  std::int64_t d = 1;
  std::int64_t mu = 1;
  double p_mu = 0.0;  // weight of the minimal atom
  std::optional<double> beta;
  CaseLabel kind = CaseLabel::Schroeder;

  bool schroeder() const { return kind == CaseLabel::Schroeder; }
};

// Checks the raw map and produces a law.  Throws NonStochastic,
// HasZeroOffspring, Subcritical or Degenerate.
OffspringLaw validate(const std::map<std::int64_t, double>& p);

LawProfile classify(const OffspringLaw& law);

// First Schroeder sum index 1 + floor(1/alpha); 1 in the Boettcher case.
int min_stable_summands(const LawProfile& profile);

// JSON form {"p": {"<j>": <prob or "prob">, ...}}.
OffspringLaw law_from_json(const std::string& text);
OffspringLaw law_from_json_file(const std::string& path);
std::string law_to_json(const OffspringLaw& law);

// Geometric law on {1, 2, ...} with mean m, truncated where the remaining
// tail drops below `tail` and renormalized.
OffspringLaw truncated_geometric(double m, double tail = 1e-15);

}  // namespace gw
