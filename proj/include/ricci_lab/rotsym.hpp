#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ricci_lab/flow.hpp"
#include "ricci_lab/warped.hpp"
#include "ricci_lab/wellposedness.hpp"

namespace rlab {

/// Rotationally symmetric metric phi(r)^2 dr^2 + psi(r)^2 ds_n^2 on the cell-centered ball.
/// Profile arrays carry the exterior ghost at index N0.
struct RotState {
  double t = 0.0;
  WarpedProfile p;

  int n() const { return p.n; }
  int N0() const { return static_cast<int>(p.phi.size()) - 1; }
  Chart chart() const { return Chart::radial_ball(p.n, N0()); }
  MetricField metric() const { return warped_metric(chart(), p); }
};

/// Profiles sampled from closed forms at the cell centers and the ghost.
RotState rot_state(int n, int N0, const std::function<double(double)>& phi,
                   const std::function<double(double)>& psi);
/// phi = 1, psi = r.
RotState flat_ball_state(int n, int N0);
/// Unit hemisphere with the equator at r = 1: phi = pi/2, psi = sin(pi r / 2).
RotState hemisphere_state(int n, int N0);
RotState rot_state_from(const MetricField& g);

struct RotRhs {
  std::vector<double> dphi;
  std::vector<double> dpsi;
};

/// d_t phi = n (psi_ss / psi) phi, d_t psi = psi_ss - (n-1)(1 - psi_s^2)/psi at j = 0..N0-1.
RotRhs rot_rhs(const RotState& s);

/// Boundary datum on the single face: eta from the rule, gamma(t) = lambda(t) psi_f(0)^2 on
/// the round frame (only the conformal-factor diagnostic depends on it).
BoundaryDatum rot_datum(const RotState& s0, EtaRule eta,
                        TimeFunction lambda = TimeFunction::constant(1.0));

/// n psi_s / psi - eta at the face.
double rot_boundary_residual(const RotState& s, const BoundaryDatum& datum, double t);

/// Sets the ghost values: phi by quadratic extrapolation, psi from the mean-curvature
/// condition (scalar Newton). Returns the Newton iteration count.
int rot_boundary_close(RotState& s, const BoundaryDatum& datum, double t,
                       const NewtonOptions& opt = {});

/// safety * min(phi^2) h^2 / (2 (n + 1)). The (n - 1)/psi terms near the origin push the
/// spectrum to about 2.1 (n + 1) / h^2, past the Heun limit of the plain h^2 / 2 bound.
double rot_cfl_dt(const RotState& s, double safety);

struct RotDiagnostics {
  double t = 0.0;
  double dt = 0.0;
  double sup_rm = 0.0;
  double sup_a = 0.0;
  double boundary_residual = 0.0;
  double min_phi = 0.0;
  double min_psi = 0.0;
  double conformal_factor = 0.0;
};

RotDiagnostics rot_diagnose(const RotState& s, const BoundaryDatum& datum);

/// Heun step; each stage closed at t + dt.
RotState rot_step(const RotState& s, const BoundaryDatum& datum, double dt,
                  const NewtonOptions& opt = {});

struct RotRunOptions {
  double horizon = 0.1;
  double safety = 0.9;
  Cadence cadence;
  bool stop_on_blowup = true;
  /// Stop (cause blowup-flag) once sup|Rm| reaches this value.
  double rm_threshold = std::numeric_limits<double>::infinity();
  long max_steps = 50'000'000;
  NewtonOptions newton;
};

struct RotTrajectory {
  std::vector<RotDiagnostics> diagnostics;
  std::vector<RotState> snapshots;
  Termination cause = Termination::Horizon;
  std::string message;
  ExtensionMonitor monitor;
  std::optional<RotState> last;
};

/// The initial ghosts are closed at t = 0 before stepping.
RotTrajectory rot_run(const RotState& s0, const BoundaryDatum& datum, const RotRunOptions& opt);

/// Header line `# rotsym n=<n> N0=<N0> t=<t>`, then r,phi,psi,dspsi,H_local per cell center.
void write_profile(std::ostream& os, const RotState& s);
void write_rot_diagnostics(std::ostream& os, const std::vector<RotDiagnostics>& d);

/// Last node and ghost of (phi, psi) per snapshot, for the corner probe.
std::vector<ProbeSample> face_series(const RotTrajectory& traj);

}  // namespace rlab
