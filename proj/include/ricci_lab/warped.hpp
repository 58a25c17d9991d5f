#pragma once

#include <vector>

#include "ricci_lab/metric.hpp"

namespace rlab {

/// Radial profiles of a warped metric phi(r)^2 dr^2 + psi(r)^2 ds_n^2 on the RadialBall
/// chart. Arrays have N0 + 1 entries: the cell-centered nodes plus the exterior ghost.
struct WarpedProfile {
  int n = 2;
  double h = 0.0;
  std::vector<double> phi;
  std::vector<double> psi;
};

/// Arc-length derivatives d_s = phi^{-1} d_r at the cell centers j = 0..N0-1, built from
/// face slopes sigma = d_s psi (fourth-order staggered stencils on parity images, a
/// one-sided five-point stencil on the outer face). The face at r = 0 carries sigma = 1 (no cone point); psi_s
/// interpolates sigma linearly in r^2 and psi_ss differences it. Near the origin
/// 1 - psi_s^2 and psi_ss are O(r^2) and O(r), so lower-order slopes leave O(1) relative
/// errors in the first cells.
struct WarpedDerivatives {
  std::vector<double> psi_s;
  std::vector<double> psi_ss;
};

WarpedDerivatives warped_derivatives(const WarpedProfile& p);

/// Same face slopes, fourth-order interpolation and differentiation to the centers (one-sided
/// at the last node). Used for curvature evaluation; the flow keeps the compact version,
/// whose linearization is the one checked for stability.
WarpedDerivatives warped_derivatives_fourth(const WarpedProfile& p);

/// Values at the boundary face r = 1 from the last node and the ghost.
struct WarpedFace {
  double phi;
  double psi;
  double psi_r;
  double psi_s;
};
WarpedFace warped_face(const WarpedProfile& p);

/// Extract (phi, psi) from a RadialBall metric; throws std::invalid_argument when the
/// tensor is not of warped form (off-diagonal or unequal fiber entries).
WarpedProfile warped_profile(const MetricField& g);
WarpedProfile warped_profile(const SymTensorField& g);

/// Build a RadialBall metric from radial profiles.
MetricField warped_metric(const Chart& ball, const WarpedProfile& p);

}  // namespace rlab
