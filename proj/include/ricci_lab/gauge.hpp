#pragma once

#include <cstddef>
#include <vector>

#include "ricci_lab/errors.hpp"
#include "ricci_lab/flow.hpp"

namespace rlab {

/// A node of the diffeomorphism left the normal range, or its Jacobian determinant is not
/// positive.
class DiffeoError : public Error {
 public:
  DiffeoError(std::size_t node, double t, const std::string& what)
      : Error("diffeomorphism failure at node " + std::to_string(node) + ", t=" +
              std::to_string(t) + ": " + what),
        node_(node),
        t_(t) {}
  std::size_t node() const { return node_; }
  double time() const { return t_; }

 private:
  std::size_t node_;
  double t_;
};

/// Image points psi_t(x) of every node, stored as a Vector field of chart coordinates.
/// Tangential coordinates are not wrapped, so psi - x is a periodic displacement.
struct DiffeoField {
  double t = 0.0;
  SymTensorField map;
};

/// DeTurck vector field W at one time.
struct VelocitySample {
  double t = 0.0;
  SymTensorField w;
};

/// W(g, gt) at every stored snapshot (SlabTorus only).
std::vector<VelocitySample> gauge_velocities(const FlowTrajectory& trajectory);

DiffeoField identity_diffeo(const Chart& chart, double t);

/// RK4 for d/dt psi = -W(psi, t), psi(t_start) = identity. W is interpolated multilinearly
/// in space and linearly in time between samples. Each sample interval (clipped to
/// [t_start, t_end]) is split into `substeps` equal RK4 steps; one DiffeoField is returned
/// per output time: t_start, every sample time strictly inside, and t_end.
/// Throws DataError when [t_start, t_end] is not covered, DiffeoError when a node leaves
/// the chart.
std::vector<DiffeoField> integrate_diffeo(const std::vector<VelocitySample>& samples,
                                          double t_start, double t_end, int substeps = 1);
std::vector<DiffeoField> integrate_diffeo(const FlowTrajectory& trajectory, double t_start,
                                          double t_end, int substeps = 1);

/// (psi^* g)_ij(x) = d_i psi^a d_j psi^b g_ab(psi(x)). The Jacobian is the identity plus the
/// finite-difference derivative of the displacement; g is interpolated.
MetricField pullback_metric(const DiffeoField& psi, const MetricField& g);

/// max over boundary nodes of |psi(x) - x|.
double boundary_displacement(const DiffeoField& psi);

/// Pulls every snapshot of a trajectory back along the diffeomorphisms.
struct PulledTrajectory {
  std::vector<DiffeoField> diffeos;
  std::vector<TimedMetric> metrics;
  double max_boundary_displacement = 0.0;
};
PulledTrajectory pull_back(const FlowTrajectory& trajectory, int substeps = 1);

struct ResidualSample {
  double t = 0.0;
  double value = 0.0;
};

/// sup over interior nodes (two layers away from the slab faces) of |d_t g + 2 Ric(g)|,
/// with the three-point centered time derivative on the (possibly uneven) sample times.
/// One value per inner sample; needs at least 3 samples.
std::vector<ResidualSample> ricci_flow_residual(const std::vector<TimedMetric>& metrics);

}  // namespace rlab
