#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ricci_lab/boundary.hpp"

namespace rlab {

/// DeTurck reference metrics gt(t) with gt(0) = g0.
class BackgroundFamily {
 public:
  static BackgroundFamily frozen(MetricField g0);
  /// Linear interpolation in t between tabulated metrics; times[0] must be 0.
  static BackgroundFamily tabulated(std::vector<double> times, std::vector<MetricField> metrics);

  MetricField at(double t) const;
  const MetricField& initial() const { return metrics_.front(); }
  bool is_frozen() const { return times_.size() == 1; }
  double t_max() const;

 private:
  std::vector<double> times_;
  std::vector<MetricField> metrics_;
};

struct Diagnostics {
  double t = 0.0;
  double dt = 0.0;
  double sup_rm = 0.0;
  double sup_a = 0.0;
  double max_boundary_residual = 0.0;
  double min_eig = 0.0;
  double conformal_factor_min = 0.0;
  double conformal_factor_max = 0.0;
  int newton_iterations = 0;
};

struct FlowState {
  double t = 0.0;
  MetricField g;
  MetricField gt_now;
  Diagnostics diag;
};

/// safety * min over nodes of h_min^2 / (2 (n+1) lambda_max(g^{-1})).
double cfl_dt(const MetricField& g, double safety);

/// Recompute every diagnostic of a state (dt is left as stored).
Diagnostics diagnose(const MetricField& g, const MetricField& gt, const BoundaryDatum& datum, double t);

FlowState initial_state(const MetricField& g0, const BoundaryDatum& datum,
                        const BackgroundFamily& background);

/// One Heun step: interior stages from deturck_rhs, each closed by solve_boundary at t + dt.
FlowState step(const FlowState& state, const BoundaryDatum& datum,
               const BackgroundFamily& background, double dt, const NewtonOptions& newton = {});

enum class Termination { Horizon, BlowupFlag, BoundaryNonConvergence, DegenerateMetric, NonFinite,
                         StepBudget };
std::string to_string(Termination t);

/// Snapshot times: every `every` accepted steps (0 disables) plus exact target times that the
/// stepper lands on.
struct Cadence {
  int every = 0;
  std::vector<double> times;
  /// t_k = 2^{-k} T for k = levels..0.
  static Cadence dyadic(double T, int levels);
  static Cadence every_steps(int n);
};

struct RunOptions {
  double horizon = 0.1;
  double safety = 0.9;
  Cadence cadence;
  bool stop_on_blowup = true;
  long max_steps = 10'000'000;
  NewtonOptions newton;
};

struct TimedMetric {
  double t;
  MetricField g;
};

struct FlowTrajectory {
  std::vector<Diagnostics> diagnostics;
  std::vector<TimedMetric> snapshots;
  std::vector<TimedMetric> backgrounds;  ///< gt at each snapshot time
  Termination cause = Termination::Horizon;
  std::string message;
  std::optional<FlowState> last;
};

FlowTrajectory run(const MetricField& g0, const BoundaryDatum& datum,
                   const BackgroundFamily& background, const RunOptions& options);

/// Diagnostics CSV with header
/// t,dt,sup_rm,sup_a,max_boundary_residual,min_eig,conformal_factor_min,conformal_factor_max
void write_diagnostics(std::ostream& os, const std::vector<Diagnostics>& d);

}  // namespace rlab
