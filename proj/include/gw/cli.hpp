#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "gw/deviations.hpp"
#include "gw/limits.hpp"

namespace gw {

// Everything one invocation needs, filled by the argument parser and
// validated before any computation starts.  Exit codes: 0 success and all
// assertions passing, 1 assertion failure, 2 usage error, 3 numeric
// convergence failure.
struct RunConfig {
  std::string subcommand;
  std::string law_path;
  std::string out_path;   // CSV destination; empty writes to stdout
  std::string plot_path;  // optional (x, y, series) companion CSV

  int n = 6;
  std::int64_t z0 = 1;
  std::string mode = "fft";  // convolution engine: fft | direct
  std::int64_t window_cap = 0;  // 0 picks a window from the moments
  double tail_tol = -1.0;       // <0 keeps the subcommand default

  std::int64_t reps = 100000;
  std::uint64_t seed = 1;
  std::int64_t pop_cap = 100000000;

  std::string norming_mode = "power";  // power | seneta
  int norming_depth = 34;
  double grid_min = 0.05;
  double grid_max = 2.0;
  int grid_count = 40;
  QuadParams quad;

  double h = 1.0;
  int ell = 16;

  std::string theorem;  // verify: schroeder | boettcher | minimal | neighbor | logscale
  double rho = 0.5;
  int n_from = 4;
  int n_to = 8;
  std::int64_t k_offset = 1;
  bool use_cdf = false;

  int verbosity = 0;
};

int run(int argc, const char* const* argv);

// (x, y, series) rows for external plotting; the header is always written,
// so an empty report produces a header-only file.
void emit_plotdata(std::ostream& os, const DeviationReport& report, const std::string& series);
void emit_plotdata(std::ostream& os, const DensityTable& table, const std::string& series);

}  // namespace gw
