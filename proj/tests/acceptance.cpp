// Acceptance run: one PASS/FAIL line per criterion, exit 1 when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ricci_lab/boundary.hpp"
#include "ricci_lab/curvature.hpp"
#include "ricci_lab/families.hpp"
#include "ricci_lab/flow.hpp"
#include "ricci_lab/gauge.hpp"
#include "ricci_lab/harness.hpp"
#include "ricci_lab/rotsym.hpp"
#include "ricci_lab/wellposedness.hpp"

using namespace rlab;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("criterion %2d %s  %s: %s\n", id, ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double sup_diff(const MetricField& a, const MetricField& b) {
  return (a.tensor() - b.tensor()).max_abs();
}

double max_diff(const SymTensorField& a, const SymTensorField& b, int margin) {
  const Chart& c = a.chart();
  double e = 0.0;
  for (std::size_t node = 0; node < a.nodes(); ++node) {
    const int i0 = c.multi_index(node)[0];
    if (i0 < margin || i0 > c.N0() - 1 - margin) continue;
    for (int k = 0; k < a.components(); ++k) e = std::max(e, std::abs(a.at(node, k) - b.at(node, k)));
  }
  return e;
}

double max_diff(const BoundaryField& a, const BoundaryField& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) e = std::max(e, std::abs(a.values[i] - b.values[i]));
  return e;
}

double interior_sup(const SymTensorField& f) { return max_diff(f, 0.0 * f, 2); }

// worst stacked residual over both faces at every snapshot of a trajectory
double snapshot_boundary_residual(const FlowTrajectory& tr, const BoundaryDatum& datum) {
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k)
    for (Side s : tr.snapshots[k].g.chart().sides())
      worst = std::max(worst, stacked_residual(tr.snapshots[k].g, tr.backgrounds[k].g, datum,
                                               tr.snapshots[k].t, s).max_abs());
  return worst;
}

double diagnostic_boundary_residual(const FlowTrajectory& tr) {
  double worst = 0.0;
  for (const Diagnostics& d : tr.diagnostics) worst = std::max(worst, d.max_boundary_residual);
  return worst;
}

struct TrajectoryCheck {
  std::string name;
  double residual;
};
std::vector<TrajectoryCheck> trajectories;  // feeds criterion 9

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rlab_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// ------------------------------------------------------------------ criteria

void check_flat_stationarity() {
  RunConfig c;
  c.n = 2;
  c.N0 = 17;
  c.Nt = 17;
  c.family = "flat";
  c.eta = "constant";
  c.eta_a = 0.0;
  c.horizon = 0.1;
  c.cadence_levels = 4;
  const fs::path dir = scratch("flat");
  const auto t0 = Clock::now();
  const RunResult r = execute_run(c, dir.string());
  const double wall = seconds_since(t0);
  const FlowTrajectory tr = load_trajectory(dir.string());
  const MetricField g0 = build_initial_metric(c);
  double dev = 0.0;
  for (const TimedMetric& s : tr.snapshots) dev = std::max(dev, sup_diff(s.g, g0));
  const double t_final = r.summary.at("t_final").get<double>();
  trajectories.push_back({"flat slab", std::max(r.summary.at("max_boundary_residual").get<double>(),
                                                snapshot_boundary_residual(tr, build_datum(c, g0)))});
  report(1, "flat stationarity",
         r.cause == Termination::Horizon && t_final == 0.1 && dev <= 1e-8 && wall <= 60.0,
         fmt("t=%.3g sup deviation %.3e (<= 1e-8), runtime %.1f s (<= 60)", t_final, dev, wall));
}

BoundaryDatum hemisphere_datum(const RotState& s, EtaRule eta) {
  return rot_datum(s, std::move(eta), TimeFunction::linear(1.0, -2.0 * s.n()));
}

void check_hemisphere_scaling() {
  const double T = 0.05;
  double err[3], wall200 = 0.0;
  bool horizon = true;
  const int sizes[3] = {100, 200, 400};
  for (int k = 0; k < 3; ++k) {
    const RotState s0 = hemisphere_state(2, sizes[k]);
    RotRunOptions o;
    o.horizon = T;
    const auto t0 = Clock::now();
    const BoundaryDatum d = hemisphere_datum(s0, EtaRule::time(TimeFunction::constant(0.0)));
    const RotTrajectory tr = rot_run(s0, d, o);
    if (sizes[k] == 200) wall200 = seconds_since(t0);
    horizon = horizon && tr.cause == Termination::Horizon && tr.last->t == T;
    const double c = std::sqrt(1.0 - 4.0 * T);
    double e = 0.0;
    for (std::size_t j = 0; j < s0.p.phi.size(); ++j) {
      e = std::max(e, std::abs(tr.last->p.phi[j] / (c * s0.p.phi[j]) - 1.0));
      e = std::max(e, std::abs(tr.last->p.psi[j] / (c * s0.p.psi[j]) - 1.0));
    }
    err[k] = e;
  }
  const double o1 = std::log2(err[0] / err[1]), o2 = std::log2(err[1] / err[2]);
  const bool ok = horizon && err[1] <= 1e-3 && o1 >= 1.6 && o1 <= 2.2 && o2 >= 1.6 && o2 <= 2.2 &&
                  wall200 <= 30.0;
  report(2, "hemisphere scaling", ok,
         fmt("rel err N0=100/200/400: %.3e %.3e %.3e, orders %.3f %.3f (in [1.6, 2.2]), "
             "N0=200 runtime %.2f s (<= 30)",
             err[0], err[1], err[2], o1, o2, wall200));
}

void check_mean_curvature_routes_agree() {
  const int sizes[][2] = {{9, 8}, {17, 16}, {33, 32}};
  double min_order = 1e300, max_c = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::vector<double> h, e;
    for (const auto& sz : sizes) {
      const MetricField g = random_smooth_metric(Chart::slab_torus(2, sz[0], sz[1]), seed, 0.25);
      double d = 0.0;
      for (Side side : {Side::Lower, Side::Upper}) {
        const auto r = mean_curvature_routes(g, side);
        d = std::max(d, max_diff(r.formula, r.lie));
      }
      h.push_back(g.chart().h0());
      e.push_back(d);
      max_c = std::max(max_c, d / h.back());
    }
    min_order = std::min(min_order, loglog_slope(h, e));
  }
  double flat = 0.0;
  const Chart slab = Chart::slab_torus(2, 17, 16);
  for (double c2 : {1.0, 2.25}) {
    SymTensorField t = MetricField::identity(slab).tensor();
    t *= c2;
    const MetricField g(std::move(t));
    for (Side side : {Side::Lower, Side::Upper}) {
      const auto r = mean_curvature_routes(g, side);
      flat = std::max({flat, r.formula.max_abs(), r.lie.max_abs()});
    }
  }
  report(3, "mean curvature routes", min_order >= 0.8 && flat <= 1e-12,
         fmt("20 metrics: min fitted order %.3f (>= 0.8), max |i - ii|/h = %.3f; flat |H| %.1e (<= 1e-12)",
             min_order, max_c, flat));
}

void check_linearization() {
  const Chart slab = Chart::slab_torus(2, 17, 16);
  const double eps = 1e-4;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const MetricField g = random_smooth_metric(slab, seed, 0.25);
    const SymTensorField h = random_smooth_tensor(slab, 100 + seed, 1.0);
    const MetricField gp(g.tensor() + eps * h), gm(g.tensor() - eps * h);
    for (Side side : {Side::Lower, Side::Upper}) {
      const BoundaryField lin = mean_curvature_linearized(g, h, side);
      const BoundaryField hp = mean_curvature(gp, side), hm = mean_curvature(gm, side);
      double e = 0.0;
      for (std::size_t b = 0; b < lin.count; ++b)
        e = std::max(e, std::abs(lin.at(b, 0) - (hp.at(b, 0) - hm.at(b, 0)) / (2 * eps)));
      worst = std::max(worst, e / lin.max_abs());
    }
  }
  report(4, "mean curvature linearization", worst <= 1e-6,
         fmt("20 (g, h) pairs, eps=1e-4: max relative error %.3e (<= 1e-6)", worst));
}

void check_complementing() {
  struct Baseline {
    int n;
    double min_det;
  };
  const Baseline baselines[] = {
      {2, 0x1.1ffa6af0ebd7ap-1}, {3, 0x1.6c973a0530069p-1}, {4, 0x1.986fdc4d8ce7fp-1}};
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const Baseline& b : baselines) {
    const ComplementingReport r = complementing_check(b.n, 100, 0.9, 42);
    const bool same = r.min_normalized_det == b.min_det;
    ok = ok && r.failing == 0 && r.min_normalized_det > 0.0 && same;
    detail += fmt("n=%d failing %d min|det| %a%s; ", b.n, r.failing, r.min_normalized_det,
                  same ? "" : " (baseline mismatch)");
  }
  const ComplementingReport control = complementing_check(1, 100, 0.9, 42);
  const double wall = seconds_since(t0);
  ok = ok && control.failing >= 1 && wall <= 5.0;
  report(5, "complementing condition", ok,
         detail + fmt("n=1 control failing %d (>= 1); runtime %.2f s (<= 5)", control.failing, wall));
}

void check_compat_ladder() {
  bool ok = true;
  std::string detail;
  for (int n : {2, 3}) {
    RotState f = flat_ball_state(n, 200);
    const BoundaryDatum df = rot_datum(f, EtaRule::time(TimeFunction::constant(n)));
    rot_boundary_close(f, df, 0.0);
    const CompatReport rf = compat_check(f.metric(), df, BackgroundFamily::frozen(f.metric()));

    RotState h = hemisphere_state(n, 200);
    const BoundaryDatum dh = hemisphere_datum(h, EtaRule::time(TimeFunction::constant(0.0)));
    rot_boundary_close(h, dh, 0.0);
    const CompatReport rh = compat_check(h.metric(), dh, BackgroundFamily::frozen(h.metric()));

    RotState e = hemisphere_state(n, 200);
    const BoundaryDatum de = hemisphere_datum(e, EtaRule::time(TimeFunction::linear(0.0, 1.0)));
    rot_boundary_close(e, de, 0.0);
    const CompatReport re = compat_check(e.metric(), de, BackgroundFamily::frozen(e.metric()));

    const bool n_ok = rf.order0() && rf.order1() && rh.order0() && rh.order1() && re.order0() &&
                      !re.order1_mean.pass() && std::abs(re.order1_mean_signed - 1.0) <= 1e-6;
    ok = ok && n_ok;
    detail += fmt("n=%d flat %s/%s hemisphere %s/%s, eta=t order-1 mean %s residual %.9f; ", n,
                  rf.order0() ? "pass" : "FAIL", rf.order1() ? "pass" : "FAIL",
                  rh.order0() ? "pass" : "FAIL", rh.order1() ? "pass" : "FAIL",
                  re.order1_mean.pass() ? "passes" : "fails", re.order1_mean_signed);
  }
  report(6, "compatibility ladder", ok, detail + "(residual 1 +- 1e-6)");
}

void check_gauge_pullback() {
  const double T = 0.02;
  auto psi = [](double x) { return 1.0 + 0.3 * x - 0.2 * x * x; };
  std::vector<double> floors;
  bool below = true;
  double displacement = 0.0, w_fine = 0.0;
  for (int N0 : {11, 21, 41}) {
    const MetricField g0 = warped_slab(Chart::slab_torus(2, N0, 4), psi);
    const BoundaryDatum datum = BoundaryDatum::from_initial(g0);
    RunOptions o;
    o.horizon = T;
    o.cadence = Cadence::every_steps(1);
    const FlowTrajectory tr = run(g0, datum, BackgroundFamily::frozen(g0), o);
    if (tr.cause != Termination::Horizon) {
      report(7, "gauge pullback", false, fmt("N0=%d run stopped early: %s", N0, tr.message.c_str()));
      return;
    }
    trajectories.push_back({fmt("warped slab N0=%d", N0),
                            std::max(diagnostic_boundary_residual(tr),
                                     snapshot_boundary_residual(tr, datum))});
    const PulledTrajectory pb = pull_back(tr);
    displacement = std::max(displacement, pb.max_boundary_displacement);
    const auto raw = ricci_flow_residual(tr.snapshots);
    const auto pulled = ricci_flow_residual(pb.metrics);
    double f = 0.0;
    for (std::size_t k = 0; k < raw.size(); ++k) {
      below = below && pulled[k].value < raw[k].value;
      f = std::max(f, pulled[k].value);
    }
    floors.push_back(f);
    if (N0 == 41)
      for (const auto& v : gauge_velocities(tr)) w_fine = std::max(w_fine, interior_sup(v.w));
  }
  const double o1 = std::log2(floors[0] / floors[1]), o2 = std::log2(floors[1] / floors[2]);
  const bool ok = below && w_fine >= 10.0 * floors[2] && o1 >= 1.0 && o2 >= 1.0 &&
                  displacement <= 1e-9;
  report(7, "gauge pullback", ok,
         fmt("pulled < raw at every time: %s; pulled floors N0=11/21/41: %.3e %.3e %.3e, orders "
             "%.3f %.3f (>= 1); interior |W| %.3e (>= 10 x floor); boundary |psi - x| %.1e (<= 1e-9)",
             below ? "yes" : "no", floors[0], floors[1], floors[2], o1, o2, w_fine, displacement));
}

void check_extension_monitor() {
  const RotState h = hemisphere_state(2, 200);
  RotRunOptions o;
  o.horizon = 1.0;
  const RotTrajectory th =
      rot_run(h, hemisphere_datum(h, EtaRule::time(TimeFunction::constant(0.0))), o);
  const bool flagged = th.monitor.flagged();
  const double tf = th.monitor.t_flag();

  const RotState f = flat_ball_state(2, 100);
  RotRunOptions of;
  of.horizon = 0.5;
  const RotTrajectory tf_run =
      rot_run(f, rot_datum(f, EtaRule::time(TimeFunction::constant(2.0))), of);
  const bool flat_ok = tf_run.cause == Termination::Horizon && !tf_run.monitor.flagged();
  report(8, "extension monitor", flagged && tf > 0.15 && tf < 0.275 && flat_ok,
         fmt("hemisphere flag %s at t=%.4f (in (0.15, 0.275)); flat ball to T=0.5: %s",
             flagged ? "raised" : "not raised", tf, flat_ok ? "no flag" : "FLAGGED or stopped"));
}

void check_boundary_enforcement() {
  const Chart c = Chart::slab_torus(2, 11, 8);
  const MetricField g0 = random_smooth_metric(c, 5, 0.08);
  const BoundaryDatum datum = BoundaryDatum::from_initial(g0);
  RunOptions opt;
  opt.horizon = 0.01;
  opt.cadence = Cadence::every_steps(5);
  const FlowTrajectory tr = run(g0, datum, BackgroundFamily::frozen(g0), opt);
  trajectories.push_back({"random slab", tr.cause == Termination::Horizon
                                             ? std::max(diagnostic_boundary_residual(tr),
                                                        snapshot_boundary_residual(tr, datum))
                                             : INFINITY});
  double worst = 0.0;
  std::string detail;
  for (const TrajectoryCheck& t : trajectories) {
    worst = std::max(worst, t.residual);
    detail += fmt("%s %.2e; ", t.name.c_str(), t.residual);
  }
  bool dims = true;
  for (int n = 1; n <= 6; ++n) dims = dims && ResidualLayout(n).total() == (n + 1) * (n + 2) / 2;
  // the stacked residual carries exactly that many rows per boundary node
  for (int n = 1; n <= 3; ++n) {
    const MetricField g = random_smooth_metric(Chart::slab_torus(n, 5, 4), 3, 0.1);
    const BoundaryField r = stacked_residual(g, g, BoundaryDatum::from_initial(g), 0.0, Side::Lower);
    dims = dims && r.components == ResidualLayout(n).total();
  }
  report(9, "boundary enforcement", worst <= 1e-9 && dims,
         detail + fmt("max %.2e (<= 1e-9); dimension identity n=1..6 %s", worst, dims ? "holds" : "FAILS"));
}

void check_rhs_routes() {
  const int sizes[][2] = {{17, 16}, {33, 32}};
  double min_order = 1e300;
  std::string detail;
  for (std::uint64_t seed : {17, 19, 21}) {
    double err[2];
    for (int s = 0; s < 2; ++s) {
      const Chart c = Chart::slab_torus(2, sizes[s][0], sizes[s][1]);
      const RhsRoutes r = deturck_rhs_routes(random_smooth_metric(c, seed, 0.2),
                                             random_smooth_metric(c, seed + 1, 0.2));
      err[s] = max_diff(r.direct, r.background, 2);
    }
    const double order = std::log2(err[0] / err[1]);
    min_order = std::min(min_order, order);
    detail += fmt("seeds %d/%d: %.3e -> %.3e order %.3f; ", static_cast<int>(seed),
                  static_cast<int>(seed + 1), err[0], err[1], order);
  }
  report(10, "rhs routes", min_order >= 1.8, detail + "(>= 1.8)");
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria = {
      check_flat_stationarity, check_hemisphere_scaling, check_mean_curvature_routes_agree,
      check_linearization,     check_complementing,      check_compat_ladder,
      check_gauge_pullback,    check_extension_monitor,  check_boundary_enforcement,
      check_rhs_routes};
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    try {
      criteria[k]();
    } catch (const std::exception& e) {
      report(static_cast<int>(k + 1), "error", false, e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
