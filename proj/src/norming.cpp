#include <cmath>
#include <string>

#include "gw/errors.hpp"
#include "gw/exactdist.hpp"
#include "gw/limits.hpp"

namespace gw {

double NormingSequence::at(int n) const {
  if (n < 0 || n >= static_cast<int>(c.size())) {
    throw BeyondNorming("norming index " + std::to_string(n) + " outside [0, " +
                        std::to_string(n_max()) + "]");
  }
  return c[static_cast<std::size_t>(n)];
}

double NormingSequence::log_at(int n) const {
  if (n < 0 || n >= static_cast<int>(log_c.size())) {
    throw BeyondNorming("norming index " + std::to_string(n) + " outside [0, " +
                        std::to_string(n_max()) + "]");
  }
  return log_c[static_cast<std::size_t>(n)];
}

namespace {

// f_n(e^{-h}) - 1/e in logs; decreasing in h, zero at the Seneta h_n.
double seneta_gap(const OffspringLaw& law, int n, double h) {
  return log_fn_derivs(law, n, -h).lf + 1.0;
}

double solve_seneta_h(const OffspringLaw& law, int n, double h_prev) {
  const double m = law.mean();
  double lo = h_prev / m * 0.999999;
  double hi = h_prev * 1.000001;
  double glo = seneta_gap(law, n, lo);
  double ghi = seneta_gap(law, n, hi);
  for (int tries = 0; (glo < 0.0 || ghi > 0.0) && tries < 8; ++tries) {
    if (glo < 0.0) {
      lo *= 0.5;
      glo = seneta_gap(law, n, lo);
    }
    if (ghi > 0.0) {
      hi *= 2.0;
      ghi = seneta_gap(law, n, hi);
    }
  }
  if (glo < 0.0 || ghi > 0.0) {
    throw RootBracketFailure("seneta norming: no sign change around generation " +
                             std::to_string(n));
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * lo; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (seneta_gap(law, n, mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

NormingSequence norming(const OffspringLaw& law, int N, NormingMode mode) {
  if (N < 0) throw UsageError("norming: N must be >= 0");
  NormingSequence seq;
  seq.mode = mode;
  seq.m = law.mean();
  seq.c.resize(static_cast<std::size_t>(N) + 1);
  seq.log_c.resize(static_cast<std::size_t>(N) + 1);
  seq.c[0] = 1.0;
  seq.log_c[0] = 0.0;
  if (mode == NormingMode::Power) {
    const double lm = std::log(seq.m);
    for (int n = 1; n <= N; ++n) {
      seq.c[static_cast<std::size_t>(n)] = seq.c[static_cast<std::size_t>(n) - 1] * seq.m;
      seq.log_c[static_cast<std::size_t>(n)] = seq.log_c[static_cast<std::size_t>(n) - 1] + lm;
    }
    return seq;
  }
  double h = 1.0;  // f_0 is the identity, so h_0 = 1 and c_0 = 1
  for (int n = 1; n <= N; ++n) {
    h = solve_seneta_h(law, n, h);
    seq.c[static_cast<std::size_t>(n)] = 1.0 / h;
    seq.log_c[static_cast<std::size_t>(n)] = -std::log(h);
  }
  return seq;
}

}  // namespace gw
