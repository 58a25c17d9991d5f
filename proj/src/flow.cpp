#include "ricci_lab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ricci_lab/errors.hpp"
#include "ricci_lab/kernels.hpp"
#include "ricci_lab/snapshot.hpp"
#include "ricci_lab/wellposedness.hpp"

namespace rlab {

BackgroundFamily BackgroundFamily::frozen(MetricField g0) {
  BackgroundFamily b;
  b.times_ = {0.0};
  b.metrics_.push_back(std::move(g0));
  return b;
}

BackgroundFamily BackgroundFamily::tabulated(std::vector<double> times,
                                             std::vector<MetricField> metrics) {
  if (times.empty() || times.size() != metrics.size())
    throw std::invalid_argument("background table needs matching non-empty times and metrics");
  if (times.front() != 0.0) throw std::invalid_argument("background table must start at t = 0");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw std::invalid_argument("background times must increase");
    if (metrics[k].chart() != metrics[0].chart())
      throw std::invalid_argument("background metrics live on different charts");
  }
  BackgroundFamily b;
  b.times_ = std::move(times);
  b.metrics_ = std::move(metrics);
  return b;
}

double BackgroundFamily::t_max() const {
  return is_frozen() ? std::numeric_limits<double>::infinity() : times_.back();
}

MetricField BackgroundFamily::at(double t) const {
  if (is_frozen()) return metrics_.front();
  if (t < -1e-12 || t > times_.back() + 1e-12)
    throw DataError("background family queried at t=" + std::to_string(t) + " outside [0, " +
                    std::to_string(times_.back()) + "]");
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return metrics_.front();
  if (it == times_.end()) return metrics_.back();
  const std::size_t k = static_cast<std::size_t>(it - times_.begin());
  const double s = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
  if (s == 0.0) return metrics_[k - 1];
  // convex combinations of SPD matrices stay SPD
  SymTensorField out = (1.0 - s) * metrics_[k - 1].tensor();
  out += s * metrics_[k].tensor();
  return MetricField(std::move(out));
}

double cfl_dt(const MetricField& g, double safety) {
  if (!(safety > 0.0 && safety <= 1.0)) throw std::invalid_argument("CFL safety must lie in (0, 1]");
  const Chart& c = g.chart();
  double lam = 0.0;
  for (std::size_t node = 0; node < c.node_count(); ++node) {
    Eigen::SelfAdjointEigenSolver<SmallMat> es(g.inverse_at(node), Eigen::EigenvaluesOnly);
    lam = std::max(lam, es.eigenvalues().maxCoeff());
  }
  const double h = c.min_spacing();
  return safety * h * h / (2.0 * (c.n() + 1) * lam);
}

Diagnostics diagnose(const MetricField& g, const MetricField& gt, const BoundaryDatum& datum,
                     double t) {
  Diagnostics d;
  d.t = t;
  d.sup_rm = riemann_norm(g).max_abs();
  d.min_eig = g.min_eigenvalue();
  d.conformal_factor_min = std::numeric_limits<double>::infinity();
  d.conformal_factor_max = -std::numeric_limits<double>::infinity();
  for (Side s : g.chart().sides()) {
    d.sup_a = std::max(d.sup_a, second_form_norm(g, s).max_abs());
    d.max_boundary_residual =
        std::max(d.max_boundary_residual, stacked_residual(g, gt, datum, t, s).max_abs());
    const BoundaryField c = conformal_factor(g, datum.side(s).gamma.frame(t), s);
    for (double v : c.values) {
      d.conformal_factor_min = std::min(d.conformal_factor_min, v);
      d.conformal_factor_max = std::max(d.conformal_factor_max, v);
    }
  }
  return d;
}

FlowState initial_state(const MetricField& g0, const BoundaryDatum& datum,
                        const BackgroundFamily& background) {
  if (background.initial().chart() != g0.chart())
    throw std::invalid_argument("background and initial metric live on different charts");
  FlowState s{0.0, g0, background.at(0.0), {}};
  s.diag = diagnose(s.g, s.gt_now, datum, 0.0);
  return s;
}

namespace {

// Interior nodes of the normal axis are 1..N0-2; in storage they form one contiguous block
// per component.
struct InteriorBlock {
  std::size_t begin;
  std::size_t count;
};

InteriorBlock interior(const Chart& c) {
  const auto s0 = static_cast<std::size_t>(c.stride(0));
  return {s0, static_cast<std::size_t>(c.N0() - 2) * s0};
}

SymTensorField checked_rhs(const MetricField& g, const MetricField& gt, double t) {
  SymTensorField k = deturck_rhs(g, gt);
  if (!k.all_finite())
    throw NonFinite("non-finite DeTurck right-hand side at t=" + std::to_string(t));
  return k;
}

MetricField make_metric(SymTensorField f, double t) {
  if (!f.all_finite()) throw NonFinite("non-finite metric component at t=" + std::to_string(t));
  try {
    return MetricField(std::move(f));
  } catch (const SingularMetric& e) {
    throw DegenerateMetric(e.node(), t, e.what());
  }
}

int close_boundary(MetricField& g, const MetricField& gt, const BoundaryDatum& datum, double t,
                   const NewtonOptions& newton) {
  int its = 0;
  for (Side s : g.chart().sides()) {
    try {
      its += solve_boundary(g, gt, datum, t, s, newton).iterations;
    } catch (const SingularMetric& e) {
      throw DegenerateMetric(e.node(), t, e.what());
    }
  }
  return its;
}

}  // namespace

FlowState step(const FlowState& state, const BoundaryDatum& datum,
               const BackgroundFamily& background, double dt, const NewtonOptions& newton) {
  const Chart& c = state.g.chart();
  if (c.kind() != ChartKind::SlabTorus)
    throw std::invalid_argument("full-chart flow runs on SlabTorus; use rotsym for the ball");
  if (!(dt >= 0.0)) throw std::invalid_argument("negative time step");
  const double t1 = state.t + dt;
  const auto& K = kernels::active();
  const InteriorBlock blk = interior(c);
  const MetricField gt1 = background.at(t1);

  // predictor
  const SymTensorField k0 = checked_rhs(state.g, state.gt_now, state.t);
  SymTensorField p = state.g.tensor();
  for (int comp = 0; comp < p.components(); ++comp) {
    const double* x = state.g.tensor().component(comp).data() + blk.begin;
    K.axpy(x, k0.component(comp).data() + blk.begin, p.component(comp).data() + blk.begin,
           blk.count, dt);
  }
  MetricField g1 = make_metric(std::move(p), t1);
  int its = close_boundary(g1, gt1, datum, t1, newton);

  // corrector; boundary guess taken from the predictor
  const SymTensorField k1 = checked_rhs(g1, gt1, t1);
  SymTensorField q = g1.tensor();
  for (int comp = 0; comp < q.components(); ++comp) {
    const std::size_t o = blk.begin;
    K.heun(state.g.tensor().component(comp).data() + o, k0.component(comp).data() + o,
           k1.component(comp).data() + o, q.component(comp).data() + o, blk.count, 0.5 * dt);
  }
  MetricField g2 = make_metric(std::move(q), t1);
  its += close_boundary(g2, gt1, datum, t1, newton);

  FlowState next{t1, std::move(g2), gt1, {}};
  next.diag = diagnose(next.g, next.gt_now, datum, t1);
  next.diag.dt = dt;
  next.diag.newton_iterations = its;
  if (!(next.diag.min_eig > 0.0)) throw DegenerateMetric(0, t1, "non-positive eigenvalue");
  return next;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Horizon: return "horizon";
    case Termination::BlowupFlag: return "blowup-flag";
    case Termination::BoundaryNonConvergence: return "boundary-nonconvergence";
    case Termination::DegenerateMetric: return "degenerate-metric";
    case Termination::NonFinite: return "non-finite";
    case Termination::StepBudget: return "step-budget";
  }
  return "unknown";
}

Cadence Cadence::dyadic(double T, int levels) {
  Cadence c;
  for (int k = levels; k >= 0; --k) c.times.push_back(std::ldexp(T, -k));
  return c;
}

Cadence Cadence::every_steps(int n) {
  Cadence c;
  c.every = n;
  return c;
}

FlowTrajectory run(const MetricField& g0, const BoundaryDatum& datum,
                   const BackgroundFamily& background, const RunOptions& opt) {
  if (!(opt.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  FlowTrajectory traj;
  FlowState state = initial_state(g0, datum, background);
  traj.diagnostics.push_back(state.diag);
  auto record = [&](const FlowState& s) {
    traj.snapshots.push_back({s.t, s.g});
    traj.backgrounds.push_back({s.t, s.gt_now});
  };
  record(state);

  std::vector<double> targets = opt.cadence.times;
  std::sort(targets.begin(), targets.end());
  std::size_t next_target = 0;
  while (next_target < targets.size() && targets[next_target] <= 0.0) ++next_target;

  ExtensionMonitor monitor;
  monitor.add(state.t, state.diag.sup_rm + state.diag.sup_a);

  const double eps = 1e-12 * opt.horizon;
  long steps = 0;
  try {
    while (state.t < opt.horizon - eps) {
      if (steps >= opt.max_steps) {
        traj.cause = Termination::StepBudget;
        traj.message = "step budget exhausted at t=" + format_double(state.t);
        break;
      }
      double dt = cfl_dt(state.g, opt.safety);
      double stop = opt.horizon;
      if (next_target < targets.size()) stop = std::min(stop, targets[next_target]);
      bool lands = false;
      if (state.t + dt >= stop - eps) {
        dt = stop - state.t;
        lands = true;
      }
      FlowState next = step(state, datum, background, dt, opt.newton);
      if (lands) next.t = next.diag.t = stop;
      state = std::move(next);
      ++steps;
      traj.diagnostics.push_back(state.diag);

      bool snap = opt.cadence.every > 0 && steps % opt.cadence.every == 0;
      while (next_target < targets.size() && targets[next_target] <= state.t + eps) {
        snap = true;
        ++next_target;
      }
      if (snap && traj.snapshots.back().t != state.t) record(state);

      if (monitor.add(state.t, state.diag.sup_rm + state.diag.sup_a) && opt.stop_on_blowup) {
        traj.cause = Termination::BlowupFlag;
        traj.message = "extension monitor flagged blowup at t=" + format_double(state.t);
        break;
      }
    }
  } catch (const NonConvergence& e) {
    traj.cause = Termination::BoundaryNonConvergence;
    traj.message = e.what();
  } catch (const SingularJacobian& e) {
    traj.cause = Termination::BoundaryNonConvergence;
    traj.message = e.what();
  } catch (const DegenerateMetric& e) {
    traj.cause = Termination::DegenerateMetric;
    traj.message = e.what();
  } catch (const NonFinite& e) {
    traj.cause = Termination::NonFinite;
    traj.message = e.what();
  }
  if (traj.cause == Termination::Horizon && traj.snapshots.back().t != state.t) record(state);
  traj.last = std::move(state);
  return traj;
}

void write_diagnostics(std::ostream& os, const std::vector<Diagnostics>& ds) {
  os << "t,dt,sup_rm,sup_a,max_boundary_residual,min_eig,conformal_factor_min,"
        "conformal_factor_max\n";
  for (const Diagnostics& d : ds) {
    os << format_double(d.t) << ',' << format_double(d.dt) << ',' << format_double(d.sup_rm) << ','
       << format_double(d.sup_a) << ',' << format_double(d.max_boundary_residual) << ','
       << format_double(d.min_eig) << ',' << format_double(d.conformal_factor_min) << ','
       << format_double(d.conformal_factor_max) << '\n';
  }
}

}  // namespace rlab
