#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ricci_lab/flow.hpp"
#include "ricci_lab/rotsym.hpp"

namespace rlab {

/// Run configuration, read from an INI file:
///
///   [geometry]   chart = slab | ball, n, N0, Nt, L
///   [initial]    family = flat | warped | conformal | random | hemisphere | file
///                profile = linear | quadratic | sine   (warped slab only)
///                a, b, amplitude, file
///   [boundary]   eta = from_initial | constant | linear | induced_power, eta_a, eta_b
///                gamma = from_initial | scaled, gamma_rate
///   [background] kind = frozen
///   [run]        horizon, safety, cadence_every, cadence_levels, max_steps, stop_on_blowup,
///                rm_threshold, rng_seed
///   [tolerances] newton_tol, newton_max_iter
///   [output]     dir
///
/// Warped profiles: linear psi = 1 + a x, quadratic psi = 1 + a x + b x^2,
/// sine psi = 1 + a sin(pi x). conformal is e^{2 amplitude x0} delta; random is
/// delta + random_smooth_tensor(rng_seed, amplitude). Ball families: flat, hemisphere.
/// eta: constant eta_a, linear eta_a + eta_b t, induced_power eta_a (tr gT / n)^eta_b.
/// gamma scaled: lambda(t) = 1 + gamma_rate t times the initial induced metric.
/// Missing keys take the defaults below.
struct RunConfig {
  std::string chart = "slab";
  int n = 2;
  int N0 = 17;
  int Nt = 17;
  double L = 1.0;

  std::string family = "flat";
  std::string profile = "quadratic";
  double a = 0.0;
  double b = 0.0;
  double amplitude = 0.0;
  std::string file;

  std::string eta = "from_initial";
  double eta_a = 0.0;
  double eta_b = 0.0;
  std::string gamma = "from_initial";
  double gamma_rate = 0.0;

  std::string background = "frozen";

  double horizon = 0.1;
  double safety = 0.9;
  int cadence_every = 0;
  int cadence_levels = 0;
  long max_steps = 10'000'000;
  bool stop_on_blowup = true;
  double rm_threshold = 0.0;  ///< 0 disables (rotsym only)
  std::uint64_t rng_seed = 0;

  double newton_tol = 1e-10;
  int newton_max_iter = 50;

  std::string output_dir = "out";

  bool is_ball() const { return chart == "ball"; }
};

struct ConfigParse {
  RunConfig config;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Parses INI text; unknown sections or keys, malformed numbers and out-of-range values are
/// collected as violations instead of thrown.
ConfigParse parse_config(const std::string& text);
/// Reads and parses a file; throws DataError when it cannot be read.
ConfigParse load_config(const std::string& path);

/// Canonical text: every section and key in the fixed order above, shortest round-trip
/// numbers. serialize(parse(serialize(c))) == serialize(c).
std::string serialize_config(const RunConfig& c);

std::vector<std::string> validate(const RunConfig& c);

/// Shortest decimal that reads back to the same double.
std::string shortest(double v);

/// output_dir, prefixed by $RLAB_OUTPUT_ROOT when that is set and the dir is relative.
std::string resolve_output_dir(const RunConfig& c);

// ------------------------------------------------------------- builders

Chart build_chart(const RunConfig& c);
/// Initial metric on a slab chart (family must not be a ball family).
MetricField build_initial_metric(const RunConfig& c);
BoundaryDatum build_datum(const RunConfig& c, const MetricField& g0);
BackgroundFamily build_background(const RunConfig& c, const MetricField& g0);
RunOptions build_run_options(const RunConfig& c);

RotState build_rot_state(const RunConfig& c);
BoundaryDatum build_rot_datum(const RunConfig& c, const RotState& s0);
RotRunOptions build_rot_options(const RunConfig& c);

}  // namespace rlab
