#include "ricci_lab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "ricci_lab/errors.hpp"
#include "ricci_lab/snapshot.hpp"
#include "ricci_lab/wellposedness.hpp"

namespace rlab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string numbered(const char* stem, std::size_t k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%05zu.csv", stem, k);
  return buf;
}

// JSON cannot carry inf/nan; they are written as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string chart_summary(const Chart& c) {
  std::ostringstream os;
  if (c.kind() == ChartKind::SlabTorus)
    os << "slab n=" << c.n() << " N0=" << c.N0() << " Nt=" << c.Nt() << " L=" << shortest(c.L());
  else
    os << "ball n=" << c.n() << " N0=" << c.N0();
  return os.str();
}

RunManifest begin_manifest(const std::string& command, const std::string& config_text,
                           const Chart& chart) {
  RunManifest m;
  m.command = command;
  m.config_hash = sha256_hex(config_text);
  m.code_version = RLAB_VERSION;
  m.chart = chart_summary(chart);
  return m;
}

void finish(RunResult& r, const std::vector<std::string>& files, Clock::time_point start) {
  write_text(fs::path(r.dir) / "summary.json", r.summary.dump(2) + "\n");
  for (const std::string& f : files) r.manifest.add_file(r.dir, f);
  r.manifest.add_file(r.dir, "summary.json");
  r.manifest.termination = to_string(r.cause);
  r.manifest.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  write_manifest(r.dir, r.manifest);
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& prefix) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind(prefix, 0) == 0 && e.path().extension() == ".csv")
      out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

int RunResult::exit_code() const {
  if (!verdict_ok) return kExitVerdict;
  return cause == Termination::Horizon || cause == Termination::BlowupFlag ? kExitOk
                                                                           : kExitVerdict;
}

RunResult execute_run(const RunConfig& c, const std::string& dir) {
  if (c.is_ball()) throw DataError("run: ball configs are integrated by the rotsym command");
  const auto start = Clock::now();
  fs::create_directories(fs::path(dir) / "snapshots");
  const std::string config_text = serialize_config(c);
  write_text(fs::path(dir) / "config.ini", config_text);

  const MetricField g0 = build_initial_metric(c);
  const BoundaryDatum datum = build_datum(c, g0);
  const BackgroundFamily background = build_background(c, g0);
  const FlowTrajectory traj = run(g0, datum, background, build_run_options(c));

  RunResult r;
  r.dir = dir;
  r.cause = traj.cause;
  r.manifest = begin_manifest("run", config_text, g0.chart());
  std::vector<std::string> files = {"config.ini", "diagnostics.csv"};
  {
    std::ofstream out(fs::path(dir) / "diagnostics.csv");
    write_diagnostics(out, traj.diagnostics);
  }
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const std::string g = "snapshots/" + numbered("g", k);
    const std::string gt = "snapshots/" + numbered("gt", k);
    write_snapshot((fs::path(dir) / g).string(), traj.snapshots[k].g.tensor(), traj.snapshots[k].t);
    write_snapshot((fs::path(dir) / gt).string(), traj.backgrounds[k].g.tensor(),
                   traj.backgrounds[k].t);
    files.push_back(g);
    files.push_back(gt);
  }

  double max_boundary = 0.0;
  for (const Diagnostics& d : traj.diagnostics)
    max_boundary = std::max(max_boundary, d.max_boundary_residual);
  const TimedMetric& last = traj.snapshots.back();
  const ExtensionMonitor monitor = extension_monitor(traj);
  r.summary = {{"command", "run"},
               {"termination", to_string(traj.cause)},
               {"message", traj.message},
               {"steps", traj.diagnostics.empty() ? 0 : traj.diagnostics.size() - 1},
               {"t_final", traj.last ? traj.last->t : last.t},
               {"final_deviation", number((last.g.tensor() - g0.tensor()).max_abs())},
               {"max_boundary_residual", number(max_boundary)},
               {"final_sup_rm", number(traj.diagnostics.back().sup_rm)},
               {"extension_flag", monitor.flagged()},
               {"t_flag", monitor.flagged() ? json(monitor.t_flag()) : json(nullptr)},
               {"snapshots", traj.snapshots.size()}};
  finish(r, files, start);
  return r;
}

RunResult execute_rotsym(const RunConfig& c, const std::string& dir) {
  if (!c.is_ball()) throw DataError("rotsym: needs a ball config (geometry.chart = ball)");
  const auto start = Clock::now();
  fs::create_directories(fs::path(dir) / "snapshots");
  fs::create_directories(fs::path(dir) / "profiles");
  const std::string config_text = serialize_config(c);
  write_text(fs::path(dir) / "config.ini", config_text);

  const RotState s0 = build_rot_state(c);
  const BoundaryDatum datum = build_rot_datum(c, s0);
  const RotTrajectory traj = rot_run(s0, datum, build_rot_options(c));

  RunResult r;
  r.dir = dir;
  r.cause = traj.cause;
  r.manifest = begin_manifest("rotsym", config_text, s0.chart());
  std::vector<std::string> files = {"config.ini", "diagnostics.csv"};
  {
    std::ofstream out(fs::path(dir) / "diagnostics.csv");
    write_rot_diagnostics(out, traj.diagnostics);
  }
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const RotState& s = traj.snapshots[k];
    const std::string prof = "profiles/" + numbered("profile", k);
    const std::string snap = "snapshots/" + numbered("g", k);
    std::ofstream out(fs::path(dir) / prof);
    write_profile(out, s);
    out.close();
    write_snapshot((fs::path(dir) / snap).string(), s.metric().tensor(), s.t);
    files.push_back(prof);
    files.push_back(snap);
  }

  const RotState& last = traj.snapshots.back();
  const int N0 = s0.N0();
  double deviation = 0.0;
  for (int j = 0; j < N0; ++j)
    deviation = std::max({deviation, std::abs(last.p.phi[j] - s0.p.phi[j]),
                          std::abs(last.p.psi[j] - s0.p.psi[j])});
  double max_boundary = 0.0;
  for (const RotDiagnostics& d : traj.diagnostics)
    max_boundary = std::max(max_boundary, std::abs(d.boundary_residual));
  r.summary = {{"command", "rotsym"},
               {"termination", to_string(traj.cause)},
               {"message", traj.message},
               {"steps", traj.diagnostics.empty() ? 0 : traj.diagnostics.size() - 1},
               {"t_final", traj.last ? traj.last->t : last.t},
               {"final_deviation", number(deviation)},
               {"max_boundary_residual", number(max_boundary)},
               {"final_sup_rm", number(traj.diagnostics.back().sup_rm)},
               {"extension_flag", traj.monitor.flagged()},
               {"t_flag", traj.monitor.flagged() ? json(traj.monitor.t_flag()) : json(nullptr)},
               {"snapshots", traj.snapshots.size()}};
  // Shrinking hemisphere: (phi, psi)(t) = sqrt(1 - 2 n t) (phi, psi)(0).
  if (c.family == "hemisphere" && c.eta == "constant" && c.eta_a == 0.0) {
    const double s = std::sqrt(1.0 - 2.0 * c.n * last.t);
    double err = 0.0;
    for (int j = 0; j < N0; ++j)
      err = std::max({err, std::abs(last.p.phi[j] / (s * s0.p.phi[j]) - 1.0),
                      std::abs(last.p.psi[j] / (s * s0.p.psi[j]) - 1.0)});
    r.summary["hemisphere_relative_error"] = number(err);
  }
  finish(r, files, start);
  return r;
}

RunConfig load_run_config(const std::string& dir) {
  const ConfigParse p = load_config((fs::path(dir) / "config.ini").string());
  if (!p.ok()) throw DataError("invalid config.ini in " + dir + ": " + p.violations.front());
  return p.config;
}

FlowTrajectory load_trajectory(const std::string& dir) {
  const RunConfig c = load_run_config(dir);
  if (c.is_ball()) throw DataError(dir + " holds a rotsym run; use the ball loader");
  const auto g = sorted_files(fs::path(dir) / "snapshots", "g_");
  const auto gt = sorted_files(fs::path(dir) / "snapshots", "gt_");
  if (g.empty()) throw DataError("no snapshots in " + dir);
  if (g.size() != gt.size()) throw DataError("snapshot and background counts differ in " + dir);
  FlowTrajectory traj;
  for (std::size_t k = 0; k < g.size(); ++k) {
    Snapshot a = read_snapshot(g[k].string(), c.L, Rank::Vector);
    Snapshot b = read_snapshot(gt[k].string(), c.L, Rank::Vector);
    traj.snapshots.push_back({a.t, MetricField(std::move(a.field))});
    traj.backgrounds.push_back({b.t, MetricField(std::move(b.field))});
  }
  return traj;
}

RotTrajectory load_rot_trajectory(const std::string& dir) {
  const RunConfig c = load_run_config(dir);
  if (!c.is_ball()) throw DataError(dir + " holds a slab run; use the slab loader");
  const auto g = sorted_files(fs::path(dir) / "snapshots", "g_");
  if (g.empty()) throw DataError("no snapshots in " + dir);
  RotTrajectory traj;
  for (const fs::path& p : g) {
    Snapshot s = read_snapshot(p.string());
    RotState st = rot_state_from(MetricField(std::move(s.field)));
    st.t = s.t;
    traj.snapshots.push_back(std::move(st));
  }
  return traj;
}

RunResult execute_pullback(const std::string& run_dir, int substeps) {
  const auto start = Clock::now();
  const FlowTrajectory traj = load_trajectory(run_dir);
  const std::string dir = (fs::path(run_dir) / "pullback").string();
  fs::create_directories(dir);

  const PulledTrajectory pb = pull_back(traj, substeps);
  const auto raw = ricci_flow_residual(traj.snapshots);
  const auto pulled = ricci_flow_residual(pb.metrics);

  RunResult r;
  r.dir = dir;
  r.manifest = begin_manifest("pullback", sha256_file((fs::path(run_dir) / "config.ini").string()),
                              traj.snapshots.front().g.chart());
  bool below = true;
  double max_raw = 0.0, max_pulled = 0.0;
  {
    std::ofstream out(fs::path(dir) / "pullback.csv");
    out << "t,raw,pulled\n";
    for (std::size_t k = 0; k < raw.size(); ++k) {
      out << format_double(raw[k].t) << "," << format_double(raw[k].value) << ","
          << format_double(pulled[k].value) << "\n";
      below = below && pulled[k].value < raw[k].value;
      max_raw = std::max(max_raw, raw[k].value);
      max_pulled = std::max(max_pulled, pulled[k].value);
    }
  }
  write_snapshot((fs::path(dir) / "psi_final.csv").string(), pb.diffeos.back().map,
                 pb.diffeos.back().t);
  const double T = traj.snapshots.back().t;
  const double bound = 1e-9 * (1.0 + T);
  r.verdict_ok = below && pb.max_boundary_displacement <= bound;
  r.summary = {{"command", "pullback"},
               {"samples", raw.size()},
               {"max_raw_residual", number(max_raw)},
               {"max_pulled_residual", number(max_pulled)},
               {"pulled_below_raw", below},
               {"max_boundary_displacement", number(pb.max_boundary_displacement)},
               {"boundary_bound", bound},
               {"pass", r.verdict_ok}};
  finish(r, {"pullback.csv", "psi_final.csv"}, start);
  return r;
}

RunResult execute_corner_probe(const std::string& run_dir) {
  const auto start = Clock::now();
  const RunConfig c = load_run_config(run_dir);
  std::vector<ProbeSample> series;
  Chart chart = build_chart(c);
  if (c.is_ball())
    series = face_series(load_rot_trajectory(run_dir));
  else
    series = boundary_series(load_trajectory(run_dir), Side::Lower);
  const CornerProbeReport rep = corner_probe(series);

  const std::string dir = (fs::path(run_dir) / "corner").string();
  fs::create_directories(dir);
  RunResult r;
  r.dir = dir;
  r.manifest = begin_manifest("probe-corner",
                              sha256_file((fs::path(run_dir) / "config.ini").string()), chart);
  {
    std::ofstream out(fs::path(dir) / "corner.csv");
    out << "t,q1,q0\n";
    for (std::size_t k = 0; k < rep.t.size(); ++k)
      out << format_double(rep.t[k]) << "," << format_double(rep.q1[k]) << ","
          << format_double(rep.q0[k]) << "\n";
  }
  r.verdict_ok = !rep.flag;
  r.summary = {{"command", "probe-corner"},
               {"q1_exponent", rep.trivial ? json(nullptr) : json(number(rep.q1_exponent))},
               {"q0_exponent", rep.trivial ? json(nullptr) : json(number(rep.q0_exponent))},
               {"trivial", rep.trivial},
               {"flag", rep.flag},
               {"flag_threshold", kCornerFlagExponent}};
  finish(r, {"corner.csv"}, start);
  return r;
}

json to_json(const ComplementingReport& r) {
  json failing = json::array();
  for (const SymbolSample& s : r.sample_list) {
    if (!s.failing) continue;
    failing.push_back({{"p_re", s.p.real()},
                       {"p_im", s.p.imag()},
                       {"zeta", s.zeta},
                       {"normalized_det", s.normalized_det}});
  }
  return {{"n", r.n},
          {"samples", r.samples},
          {"delta1", r.delta1},
          {"seed", r.seed},
          {"min_normalized_det", r.min_normalized_det},
          {"min_normalized_det_hex", hexfloat(r.min_normalized_det)},
          {"failing", r.failing},
          {"excluded", r.excluded},
          {"fail_tolerance", kSymbolFailTolerance},
          {"pass", r.pass()},
          {"failing_samples", failing}};
}

json to_json(const CompatReport& r) {
  auto item = [](const CompatItem& i) {
    return json{{"residual", number(i.residual)}, {"threshold", i.threshold}, {"pass", i.pass()}};
  };
  return {{"order0_mean", item(r.order0_mean)},
          {"order0_conf", item(r.order0_conf)},
          {"order1_conf", item(r.order1_conf)},
          {"order1_mean", item(r.order1_mean)},
          {"order1_mean_signed", number(r.order1_mean_signed)},
          {"gauge_alignment",
           {{"gt_initial", r.gt_initial}, {"gt_rate", r.gt_rate}, {"aligned", r.gt_aligned}}},
          {"order0", r.order0()},
          {"order1", r.order1()}};
}

CompatReport compat_for(const RunConfig& c) {
  if (c.is_ball()) {
    const RotState s0 = build_rot_state(c);
    const MetricField g0 = s0.metric();
    return compat_check(g0, build_rot_datum(c, s0), BackgroundFamily::frozen(g0));
  }
  const MetricField g0 = build_initial_metric(c);
  return compat_check(g0, build_datum(c, g0), build_background(c, g0));
}

// ------------------------------------------------------------- converge

OrderEntry order_entry(std::string field, double coarse, double fine) {
  OrderEntry e{std::move(field), coarse, fine, 0.0, false};
  if (coarse <= kExactDiff && fine <= kExactDiff) e.exact = true;
  else e.order = std::log2(coarse / fine);
  return e;
}

json ConvergeReport::to_json() const {
  auto entry = [](const OrderEntry& e) {
    return json{{"field", e.field},
                {"diff_h_h2", e.diff_coarse},
                {"diff_h2_h4", e.diff_fine},
                {"order", e.exact ? json(nullptr) : number(e.order)},
                {"exact", e.exact}};
  };
  json comps = json::array();
  for (const OrderEntry& e : components) comps.push_back(entry(e));
  return {{"t", t}, {"resolutions", resolutions}, {"components", comps}, {"sup", entry(sup)}};
}

namespace {

// Cell value with the parity image below the origin.
double cell(const std::vector<double>& v, int k, bool odd) {
  if (k >= 0) return v[k];
  return odd ? -v[-k - 1] : v[-k - 1];
}

// Cubic interpolation at the midpoint of cells k and k + 1.
double midpoint(const std::vector<double>& v, int k, bool odd) {
  return (-cell(v, k - 1, odd) + 9.0 * cell(v, k, odd) + 9.0 * cell(v, k + 1, odd) -
          cell(v, k + 2, odd)) /
         16.0;
}

}  // namespace

ConvergeReport execute_converge(const RunConfig& c, const std::string& dir,
                                bool refine_tangential) {
  const auto start = Clock::now();
  fs::create_directories(dir);
  std::array<RunConfig, 3> cfg{c, c, c};
  for (int k = 0; k < 3; ++k) {
    const int f = 1 << k;
    cfg[k].N0 = c.is_ball() ? f * c.N0 : f * (c.N0 - 1) + 1;
    cfg[k].Nt = refine_tangential ? f * c.Nt : c.Nt;
    cfg[k].cadence_every = 0;
    cfg[k].cadence_levels = 0;
    cfg[k].output_dir = (fs::path(dir) / ("h" + std::to_string(f))).string();
  }

  auto launch = [&](const RunConfig& k) {
    return std::async(std::launch::async, [k] {
      return k.is_ball() ? execute_rotsym(k, k.output_dir) : execute_run(k, k.output_dir);
    });
  };
  std::array<std::future<RunResult>, 3> futures{launch(cfg[0]), launch(cfg[1]), launch(cfg[2])};
  std::array<RunResult, 3> runs;
  for (int k = 0; k < 3; ++k) runs[k] = futures[k].get();
  for (int k = 0; k < 3; ++k)
    if (runs[k].cause != Termination::Horizon)
      throw Error("converge: sub-run N0=" + std::to_string(cfg[k].N0) + " ended with " +
                  to_string(runs[k].cause) + ": " + runs[k].summary.value("message", ""));

  ConvergeReport rep;
  rep.t = c.horizon;
  for (const RunConfig& k : cfg) rep.resolutions.push_back(k.N0);

  if (c.is_ball()) {
    std::array<RotState, 3> s;
    for (int k = 0; k < 3; ++k) s[k] = load_rot_trajectory(runs[k].dir).snapshots.back();
    double d1[2] = {0, 0}, d2[2] = {0, 0};
    for (int j = 0; j < c.N0; ++j) {
      for (int f = 0; f < 2; ++f) {
        const bool odd = f == 1;
        const auto& a = odd ? s[0].p.psi : s[0].p.phi;
        const auto& b = odd ? s[1].p.psi : s[1].p.phi;
        const auto& e = odd ? s[2].p.psi : s[2].p.phi;
        const double vb = midpoint(b, 2 * j, odd);
        const double ve = midpoint(e, 4 * j + 1, odd);
        d1[f] = std::max(d1[f], std::abs(a[j] - vb));
        d2[f] = std::max(d2[f], std::abs(vb - ve));
      }
    }
    rep.components.push_back(order_entry("phi", d1[0], d2[0]));
    rep.components.push_back(order_entry("psi", d1[1], d2[1]));
  } else {
    std::array<MetricField, 3> g{load_trajectory(runs[0].dir).snapshots.back().g,
                                 load_trajectory(runs[1].dir).snapshots.back().g,
                                 load_trajectory(runs[2].dir).snapshots.back().g};
    const Chart& coarse = g[0].chart();
    const int dim = coarse.dim();
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) {
        const int comp = sym_index(i, j, dim);
        double d1 = 0.0, d2 = 0.0;
        for (std::size_t node = 0; node < coarse.node_count(); ++node) {
          auto m = coarse.multi_index(node);
          auto m2 = m, m4 = m;
          for (int a = 0; a < coarse.axes(); ++a) {
            const int f = a == 0 || refine_tangential ? 1 : 0;
            m2[a] = (1 + f) * m[a];
            m4[a] = (1 + 3 * f) * m[a];
          }
          const double va = g[0].tensor().at(node, comp);
          const double vb = g[1].tensor().at(g[1].chart().index(m2), comp);
          const double ve = g[2].tensor().at(g[2].chart().index(m4), comp);
          d1 = std::max(d1, std::abs(va - vb));
          d2 = std::max(d2, std::abs(vb - ve));
        }
        rep.components.push_back(
            order_entry("g" + std::to_string(i) + std::to_string(j), d1, d2));
      }
  }
  double s1 = 0.0, s2 = 0.0;
  for (const OrderEntry& e : rep.components) {
    s1 = std::max(s1, e.diff_coarse);
    s2 = std::max(s2, e.diff_fine);
  }
  rep.sup = order_entry("sup", s1, s2);

  RunResult r;
  r.dir = dir;
  r.manifest = begin_manifest("converge", serialize_config(c), build_chart(c));
  r.summary = rep.to_json();
  r.summary["command"] = "converge";
  write_text(fs::path(dir) / "converge.json", rep.to_json().dump(2) + "\n");
  finish(r, {"converge.json", "h1/manifest.json", "h2/manifest.json", "h4/manifest.json"}, start);
  return rep;
}

}  // namespace rlab
