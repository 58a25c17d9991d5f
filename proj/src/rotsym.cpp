#include "ricci_lab/rotsym.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "ricci_lab/errors.hpp"
#include "ricci_lab/kernels.hpp"
#include "ricci_lab/snapshot.hpp"

namespace rlab {

RotState rot_state(int n, int N0, const std::function<double(double)>& phi,
                   const std::function<double(double)>& psi) {
  if (n < 1) throw std::invalid_argument("rotsym needs n >= 1");
  if (N0 < 4) throw std::invalid_argument("rotsym needs N0 >= 4");
  const Chart ball = Chart::radial_ball(n, N0);
  RotState s;
  s.p.n = n;
  s.p.h = ball.h0();
  for (int j = 0; j <= N0; ++j) {
    const double r = ball.coordinate_of_index(0, j);
    s.p.phi.push_back(phi(r));
    s.p.psi.push_back(psi(r));
  }
  return s;
}

RotState flat_ball_state(int n, int N0) {
  return rot_state(n, N0, [](double) { return 1.0; }, [](double r) { return r; });
}

RotState hemisphere_state(int n, int N0) {
  const double q = 0.5 * std::numbers::pi;
  return rot_state(n, N0, [q](double) { return q; }, [q](double r) { return std::sin(q * r); });
}

RotState rot_state_from(const MetricField& g) {
  RotState s;
  s.p = warped_profile(g);
  return s;
}

namespace {

void check_positive(const RotState& s, std::size_t upto) {
  for (std::size_t j = 0; j < upto; ++j) {
    if (!std::isfinite(s.p.phi[j]) || !std::isfinite(s.p.psi[j]))
      throw NonFinite("non-finite rotsym profile at node " + std::to_string(j) +
                      ", t=" + std::to_string(s.t));
    if (!(s.p.psi[j] > 0.0)) throw DegenerateMetric(j, s.t, "psi <= 0");
    if (!(s.p.phi[j] > 0.0)) throw DegenerateMetric(j, s.t, "phi <= 0");
  }
}

SmallMat fiber_metric(int n, double psi) { return SmallMat::Identity(n, n) * (psi * psi); }

}  // namespace

RotRhs rot_rhs(const RotState& s) {
  check_positive(s, s.p.phi.size());
  const WarpedDerivatives d = warped_derivatives(s.p);
  const std::size_t N0 = s.p.phi.size() - 1;
  const double n = s.n();
  RotRhs r;
  r.dphi.resize(N0);
  r.dpsi.resize(N0);
  for (std::size_t j = 0; j < N0; ++j) {
    const double psi = s.p.psi[j];
    r.dphi[j] = n * (d.psi_ss[j] / psi) * s.p.phi[j];
    r.dpsi[j] = d.psi_ss[j] - (n - 1.0) * (1.0 - d.psi_s[j] * d.psi_s[j]) / psi;
  }
  return r;
}

BoundaryDatum rot_datum(const RotState& s0, EtaRule eta, TimeFunction lambda) {
  const int n = s0.n();
  const double psi_f = warped_face(s0.p).psi;
  BoundaryField g0(Side::Upper, sym_size(n), 1);
  for (int a = 0; a < n; ++a) g0.at(0, sym_index(a, a, n)) = psi_f * psi_f;
  BoundaryDatum d;
  d.sides.emplace(Side::Upper, SideDatum{GammaRule::scaled(std::move(g0), std::move(lambda)),
                                         std::move(eta)});
  return d;
}

double rot_boundary_residual(const RotState& s, const BoundaryDatum& datum, double t) {
  const WarpedFace f = warped_face(s.p);
  const double eta = datum.side(Side::Upper).eta(0, t, fiber_metric(s.n(), f.psi));
  return s.n() * f.psi_s / f.psi - eta;
}

int rot_boundary_close(RotState& s, const BoundaryDatum& datum, double t, const NewtonOptions& opt) {
  const std::size_t N = s.p.phi.size() - 1;
  auto& phi = s.p.phi;
  auto& psi = s.p.psi;
  phi[N] = 3.0 * phi[N - 1] - 3.0 * phi[N - 2] + phi[N - 3];
  if (!(phi[N] > 0.0)) throw DegenerateMetric(N, t, "extrapolated phi ghost <= 0");
  const EtaRule& eta = datum.side(Side::Upper).eta;
  const int n = s.n();
  const double h = s.p.h;
  const double a = psi[N - 1];
  const double pf = 0.5 * (phi[N] + phi[N - 1]);

  auto F = [&](double x) {
    const double sf = 0.5 * (x + a);
    return n * (x - a) / (h * pf * sf) - eta(0, t, fiber_metric(n, sf));
  };
  // closed form for a metric-independent eta; exact in that case
  auto solve_linear = [&](double e) {
    const double q = e * h * pf;
    return a * (2.0 * n + q) / (2.0 * n - q);
  };
  const double sf0 = psi[N] > 0.0 ? 0.5 * (psi[N] + a) : a;
  double x = solve_linear(eta(0, t, fiber_metric(n, sf0)));
  double r = F(x);
  int its = 0;
  while (std::abs(r) > opt.tolerance && eta.uses_metric()) {
    if (its >= opt.max_iterations) throw NonConvergence(1, N, std::abs(r));
    const double dx = opt.fd_step * std::max(1.0, std::abs(x));
    const double J = (F(x + dx) - r) / dx;
    if (!(std::abs(J) > 0.0) || !std::isfinite(J)) throw SingularJacobian(1);
    double lam = 1.0;
    double xn = x - r / J, rn = F(xn);
    while (!(std::abs(rn) < std::abs(r)) && lam > opt.damping_floor) {
      lam *= 0.5;
      xn = x - lam * r / J;
      rn = F(xn);
    }
    x = xn;
    r = rn;
    ++its;
  }
  if (!(std::abs(r) <= std::max(opt.tolerance, 1e-12)) || !std::isfinite(x))
    throw NonConvergence(1, N, std::abs(r));
  psi[N] = x;
  if (!(x > 0.0)) throw DegenerateMetric(N, t, "psi ghost <= 0");
  return its;
}

double rot_cfl_dt(const RotState& s, double safety) {
  if (!(safety > 0.0 && safety <= 1.0)) throw std::invalid_argument("CFL safety must lie in (0, 1]");
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < s.p.phi.size(); ++j) m = std::min(m, s.p.phi[j] * s.p.phi[j]);
  return safety * m * s.p.h * s.p.h / (2.0 * (s.n() + 1));
}

RotDiagnostics rot_diagnose(const RotState& s, const BoundaryDatum& datum) {
  RotDiagnostics d;
  d.t = s.t;
  const WarpedDerivatives wd = warped_derivatives_fourth(s.p);
  const std::size_t N0 = s.p.phi.size() - 1;
  const double n = s.n();
  d.min_phi = d.min_psi = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < N0; ++j) {
    const double psi = s.p.psi[j];
    const double kr = -wd.psi_ss[j] / psi;
    const double kt = (1.0 - wd.psi_s[j] * wd.psi_s[j]) / (psi * psi);
    d.sup_rm = std::max(d.sup_rm, 2.0 * std::sqrt(n * kr * kr + 0.5 * n * (n - 1.0) * kt * kt));
    d.min_phi = std::min(d.min_phi, s.p.phi[j]);
    d.min_psi = std::min(d.min_psi, psi);
  }
  const WarpedFace f = warped_face(s.p);
  d.sup_a = std::sqrt(n) * std::abs(f.psi_s / f.psi);
  d.boundary_residual = std::abs(rot_boundary_residual(s, datum, s.t));
  d.conformal_factor = f.psi * f.psi / datum.side(Side::Upper).gamma.at(0, s.t)(0, 0);
  return d;
}

RotState rot_step(const RotState& s, const BoundaryDatum& datum, double dt, const NewtonOptions& opt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("negative time step");
  const auto& K = kernels::active();
  const std::size_t N0 = s.p.phi.size() - 1;
  const double t1 = s.t + dt;

  const RotRhs k0 = rot_rhs(s);
  RotState p = s;
  p.t = t1;
  K.axpy(s.p.phi.data(), k0.dphi.data(), p.p.phi.data(), N0, dt);
  K.axpy(s.p.psi.data(), k0.dpsi.data(), p.p.psi.data(), N0, dt);
  check_positive(p, N0);
  rot_boundary_close(p, datum, t1, opt);

  const RotRhs k1 = rot_rhs(p);
  RotState q = p;
  K.heun(s.p.phi.data(), k0.dphi.data(), k1.dphi.data(), q.p.phi.data(), N0, 0.5 * dt);
  K.heun(s.p.psi.data(), k0.dpsi.data(), k1.dpsi.data(), q.p.psi.data(), N0, 0.5 * dt);
  check_positive(q, N0);
  rot_boundary_close(q, datum, t1, opt);
  check_positive(q, N0 + 1);
  return q;
}

RotTrajectory rot_run(const RotState& s0, const BoundaryDatum& datum, const RotRunOptions& opt) {
  if (!(opt.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  RotTrajectory traj;
  RotState s = s0;
  rot_boundary_close(s, datum, s.t, opt.newton);
  RotDiagnostics d = rot_diagnose(s, datum);
  traj.diagnostics.push_back(d);
  traj.snapshots.push_back(s);
  traj.monitor.add(s.t, d.sup_rm + d.sup_a);

  std::vector<double> targets = opt.cadence.times;
  std::sort(targets.begin(), targets.end());
  std::size_t next_target = 0;
  while (next_target < targets.size() && targets[next_target] <= s.t) ++next_target;

  const double eps = 1e-12 * opt.horizon;
  long steps = 0;
  try {
    while (s.t < opt.horizon - eps) {
      if (steps >= opt.max_steps) {
        traj.cause = Termination::StepBudget;
        traj.message = "step budget exhausted at t=" + format_double(s.t);
        break;
      }
      double dt = rot_cfl_dt(s, opt.safety);
      double stop = opt.horizon;
      if (next_target < targets.size()) stop = std::min(stop, targets[next_target]);
      bool lands = false;
      if (s.t + dt >= stop - eps) {
        dt = stop - s.t;
        lands = true;
      }
      RotState next = rot_step(s, datum, dt, opt.newton);
      if (lands) next.t = stop;
      s = std::move(next);
      ++steps;
      d = rot_diagnose(s, datum);
      d.dt = dt;
      traj.diagnostics.push_back(d);

      bool snap = opt.cadence.every > 0 && steps % opt.cadence.every == 0;
      while (next_target < targets.size() && targets[next_target] <= s.t + eps) {
        snap = true;
        ++next_target;
      }
      if (snap) traj.snapshots.push_back(s);

      const bool flagged = traj.monitor.add(s.t, d.sup_rm + d.sup_a);
      if (flagged && opt.stop_on_blowup) {
        traj.cause = Termination::BlowupFlag;
        traj.message = "extension monitor flagged blowup at t=" + format_double(traj.monitor.t_flag());
        break;
      }
      if (d.sup_rm >= opt.rm_threshold) {
        traj.cause = Termination::BlowupFlag;
        traj.message = "sup|Rm| reached " + format_double(d.sup_rm) + " at t=" + format_double(s.t);
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
  if (traj.snapshots.back().t != s.t) traj.snapshots.push_back(s);
  traj.last = std::move(s);
  return traj;
}

void write_profile(std::ostream& os, const RotState& s) {
  const WarpedDerivatives d = warped_derivatives(s.p);
  const int N0 = s.N0();
  os << "# rotsym n=" << s.n() << " N0=" << N0 << " t=" << format_double(s.t) << '\n';
  os << "r,phi,psi,dspsi,H_local\n";
  for (int j = 0; j < N0; ++j) {
    const double r = (j + 0.5) * s.p.h;
    os << format_double(r) << ',' << format_double(s.p.phi[j]) << ',' << format_double(s.p.psi[j])
       << ',' << format_double(d.psi_s[j]) << ','
       << format_double(s.n() * d.psi_s[j] / s.p.psi[j]) << '\n';
  }
}

void write_rot_diagnostics(std::ostream& os, const std::vector<RotDiagnostics>& ds) {
  os << "t,dt,sup_rm,sup_a,max_boundary_residual,min_phi,min_psi,conformal_factor\n";
  for (const RotDiagnostics& d : ds)
    os << format_double(d.t) << ',' << format_double(d.dt) << ',' << format_double(d.sup_rm) << ','
       << format_double(d.sup_a) << ',' << format_double(d.boundary_residual) << ','
       << format_double(d.min_phi) << ',' << format_double(d.min_psi) << ','
       << format_double(d.conformal_factor) << '\n';
}

std::vector<ProbeSample> face_series(const RotTrajectory& traj) {
  std::vector<ProbeSample> out;
  for (const RotState& s : traj.snapshots) {
    const std::size_t N = s.p.phi.size() - 1;
    out.push_back({s.t, {s.p.phi[N - 1], s.p.psi[N - 1], s.p.phi[N], s.p.psi[N]}});
  }
  return out;
}

}  // namespace rlab
