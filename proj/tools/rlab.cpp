// rlab: command line front end. Exit 0 on success, 2 on verdict failures, 1 on errors.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ricci_lab/errors.hpp"
#include "ricci_lab/harness.hpp"
#include "ricci_lab/wellposedness.hpp"

using namespace rlab;
using nlohmann::json;

namespace {

RunConfig require_config(const std::string& path) {
  const ConfigParse p = load_config(path);
  if (!p.ok()) {
    std::string msg = "invalid config " + path + ":";
    for (const std::string& v : p.violations) msg += "\n  " + v;
    throw DataError(msg);
  }
  return p.config;
}

void warn_if_incompatible(const RunConfig& c) {
  const CompatReport rep = compat_for(c);
  if (!rep.order0() || !rep.order1())
    std::cerr << "warning: initial and boundary data fail the compatibility check: "
              << to_json(rep).dump() << "\n";
}

int emit(const json& j, int code) {
  std::cout << j.dump(2) << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ricci-DeTurck flow laboratory"};
  app.require_subcommand(1);

  std::string config_path, run_dir, out_dir;
  int substeps = 1;

  auto* run_cmd = app.add_subcommand("run", "full-chart DeTurck flow from a slab config");
  run_cmd->add_option("config", config_path, "config file")->required();
  run_cmd->add_option("--out", out_dir, "output directory (default: output.dir)");

  auto* rot_cmd = app.add_subcommand("rotsym", "rotationally symmetric flow from a ball config");
  rot_cmd->add_option("config", config_path, "config file")->required();
  rot_cmd->add_option("--out", out_dir, "output directory (default: output.dir)");

  auto* pull_cmd = app.add_subcommand("pullback", "pull a slab run back to Ricci flow");
  pull_cmd->add_option("trajectory", run_dir, "run directory")->required();
  pull_cmd->add_option("--substeps", substeps, "RK4 steps per snapshot interval")
      ->check(CLI::PositiveNumber);

  int n = 2, samples = 100;
  double delta1 = 0.9;
  std::uint64_t seed = 42;
  auto* sym_cmd = app.add_subcommand("check-symbol", "sample the complementing condition");
  sym_cmd->add_option("--n", n, "tangential dimension")->check(CLI::Range(1, 6));
  sym_cmd->add_option("--samples", samples, "number of samples")->check(CLI::PositiveNumber);
  sym_cmd->add_option("--delta1", delta1, "parabola parameter in (0, 1)");
  sym_cmd->add_option("--seed", seed, "rng seed");

  auto* compat_cmd = app.add_subcommand("check-compat", "compatibility conditions of a config");
  compat_cmd->add_option("config", config_path, "config file")->required();

  auto* corner_cmd = app.add_subcommand("probe-corner", "corner regularity of a run");
  corner_cmd->add_option("trajectory", run_dir, "run directory")->required();

  double min_order = -1e300, max_order = 1e300;
  auto* conv_cmd = app.add_subcommand("converge", "(h, h/2, h/4) self-convergence triple");
  conv_cmd->add_option("config", config_path, "config file")->required();
  conv_cmd->add_option("--out", out_dir, "output directory (default: output.dir/converge)");
  conv_cmd->add_option("--min-order", min_order, "verdict: sup order must be >= this");
  conv_cmd->add_option("--max-order", max_order, "verdict: sup order must be <= this");
  bool normal_only = false;
  conv_cmd->add_flag("--normal-only", normal_only,
                     "keep Nt fixed (tangentially invariant data)");

  auto* verify_cmd = app.add_subcommand("verify-manifest", "check every file of a manifest");
  verify_cmd->add_option("dir", run_dir, "directory holding manifest.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*run_cmd || *rot_cmd) {
      const RunConfig c = require_config(config_path);
      const std::string dir = out_dir.empty() ? resolve_output_dir(c) : out_dir;
      warn_if_incompatible(c);
      const RunResult r = *run_cmd ? execute_run(c, dir) : execute_rotsym(c, dir);
      json j = r.summary;
      j["dir"] = r.dir;
      return emit(j, r.exit_code());
    }
    if (*pull_cmd) {
      const RunResult r = execute_pullback(run_dir, substeps);
      return emit(r.summary, r.exit_code());
    }
    if (*sym_cmd) {
      const ComplementingReport rep = complementing_check(n, samples, delta1, seed);
      return emit(to_json(rep), rep.pass() ? kExitOk : kExitVerdict);
    }
    if (*compat_cmd) {
      const CompatReport rep = compat_for(require_config(config_path));
      return emit(to_json(rep), rep.order0() && rep.order1() ? kExitOk : kExitVerdict);
    }
    if (*corner_cmd) {
      const RunResult r = execute_corner_probe(run_dir);
      return emit(r.summary, r.exit_code());
    }
    if (*conv_cmd) {
      const RunConfig c = require_config(config_path);
      const std::string dir = out_dir.empty() ? resolve_output_dir(c) + "/converge" : out_dir;
      const ConvergeReport rep = execute_converge(c, dir, !normal_only);
      const bool ok = rep.sup.exact || (rep.sup.order >= min_order && rep.sup.order <= max_order);
      return emit(rep.to_json(), ok ? kExitOk : kExitVerdict);
    }
    if (*verify_cmd) {
      const auto problems = verify_manifest(run_dir);
      return emit(json{{"dir", run_dir}, {"problems", problems}, {"pass", problems.empty()}},
                  problems.empty() ? kExitOk : kExitVerdict);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
