#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ricci_lab/config.hpp"
#include "ricci_lab/gauge.hpp"
#include "ricci_lab/manifest.hpp"

namespace rlab {

/// Exit-code contract of the command line tool.
enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitVerdict = 2 };

/// Outcome of one orchestrated run. `summary` is what summary.json holds.
struct RunResult {
  std::string dir;
  RunManifest manifest;
  nlohmann::json summary;
  Termination cause = Termination::Horizon;
  bool verdict_ok = true;
  /// Verdict failures and causes other than horizon or blowup-flag map to kExitVerdict.
  int exit_code() const;
};

/// Full DeTurck flow on a slab config. Writes config.ini, diagnostics.csv,
/// snapshots/g_NNNNN.csv and gt_NNNNN.csv, summary.json and manifest.json into `dir`.
RunResult execute_run(const RunConfig& c, const std::string& dir);
/// Rotationally symmetric flow on a ball config. Writes config.ini, diagnostics.csv,
/// profiles/profile_NNNNN.csv, snapshots/g_NNNNN.csv, summary.json and manifest.json.
RunResult execute_rotsym(const RunConfig& c, const std::string& dir);

/// Reads a run directory back (config.ini plus the snapshot files).
RunConfig load_run_config(const std::string& dir);
FlowTrajectory load_trajectory(const std::string& dir);
RotTrajectory load_rot_trajectory(const std::string& dir);

/// Pullback of a slab run directory: writes <dir>/pullback/{pullback.csv, psi_final.csv,
/// summary.json, manifest.json}. Verdict: pulled < raw at every time and boundary fixing.
RunResult execute_pullback(const std::string& run_dir, int substeps = 1);

/// Corner probe of a run directory (slab: boundary nodes of the lower face; ball: the
/// face cells). Writes <dir>/corner/{corner.csv, summary.json, manifest.json}.
RunResult execute_corner_probe(const std::string& run_dir);

nlohmann::json to_json(const ComplementingReport& r);
nlohmann::json to_json(const CompatReport& r);

/// Compatibility report of a config's initial and boundary data.
CompatReport compat_for(const RunConfig& c);

// ------------------------------------------------------------- converge

struct OrderEntry {
  std::string field;
  double diff_coarse = 0.0;  ///< ||g_h - g_{h/2}||
  double diff_fine = 0.0;    ///< ||g_{h/2} - g_{h/4}||
  double order = 0.0;
  bool exact = false;        ///< both differences at roundoff; no order
};

struct ConvergeReport {
  double t = 0.0;
  std::vector<int> resolutions;  ///< N0 of the three runs
  std::vector<OrderEntry> components;
  OrderEntry sup;
  nlohmann::json to_json() const;
};

/// Differences at or below this are "exact".
inline constexpr double kExactDiff = 1e-12;

OrderEntry order_entry(std::string field, double coarse, double fine);

/// Runs the (h, h/2, h/4) triple of a config concurrently and compares the final states on
/// the coarse nodes. Slab: N0 -> 2 N0 - 1 -> 4 N0 - 3 and Nt doubling, coincident nodes.
/// Ball: N0 doubling, fine cells interpolated to the coarse centers with the 4-point
/// midpoint rule. Sub-runs go to <dir>/h{1,2,4}/; converge.json and a manifest to <dir>.
/// With refine_tangential = false Nt stays fixed (tangentially invariant data, where the
/// tangential grid does not enter the error). Throws Error when a sub-run does not reach
/// the horizon.
ConvergeReport execute_converge(const RunConfig& c, const std::string& dir,
                                bool refine_tangential = true);

}  // namespace rlab
