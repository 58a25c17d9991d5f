#pragma once

#include <array>
#include <vector>

#include "ricci_lab/metric.hpp"

namespace rlab {

/// Christoffel symbols: gamma[k] holds Gamma^k_{ij} as a symmetric 2-tensor field.
struct ConnectionField {
  std::vector<SymTensorField> gamma;
};

/// Values and first chart derivatives of a symmetric tensor at one node.
/// d[a] is the derivative along coordinate a (SlabTorus only).
struct Jet {
  int dim = 0;
  SmallMat v;
  std::array<SmallMat, kMaxDim> d;
};

/// Jet of f at a node using the same stencils as partial_derivative.
Jet node_jet(const SymTensorField& f, std::size_t node);

namespace local {

/// Gamma^k_{ij} at a point: out[k](i, j).
std::array<SmallMat, kMaxDim> christoffel(const Jet& g, const SmallMat& ginv);

/// Outward unit normal nu^i = o * g^{0i} / sqrt(g^{00}) with o the side orientation.
SmallVec normal(const SmallMat& ginv, Side side);

/// Mean curvature from the local-coordinate formula (halved).
double mean_curvature(const Jet& g, const SmallMat& ginv, Side side);

/// Second fundamental form A = (L_nu g)^T / 2 as an n x n matrix.
SmallMat second_fundamental_form(const Jet& g, const SmallMat& ginv, Side side);

/// First variation of H along h (halved variation formula).
double mean_curvature_linearized(const Jet& g, const SmallMat& ginv, const Jet& h, Side side);

/// One-form W_l = g_{lr} g^{pq} (Gamma(g)^r_{pq} - Gamma(gt)^r_{pq}).
SmallVec deturck_oneform(const Jet& g, const SmallMat& ginv, const Jet& gt, const SmallMat& gtinv);

/// Tangential block g_{ab}, a, b >= 1.
SmallMat tangential(const SmallMat& m);

}  // namespace local

ConnectionField christoffel(const MetricField& g);

/// Ricci tensor. On RadialBall the warped-product formulas are used (the metric must be
/// of warped form); the ghost entry is linearly extrapolated.
SymTensorField ricci(const MetricField& g);

/// Pointwise |Rm|_g from the full 4-tensor.
SymTensorField riemann_norm(const MetricField& g);

/// Bianchi operator beta_g(u) as a one-form field.
SymTensorField bianchi(const MetricField& g, const SymTensorField& u);

struct DeTurckField {
  SymTensorField vector;
  SymTensorField oneform;
};
DeTurckField deturck_field(const MetricField& g, const MetricField& gt);

/// (L_X g)_{ij} = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k.
SymTensorField lie_derivative_metric(const MetricField& g, const SymTensorField& X);

/// -2 Ric(g) + L_{W(g, gt)} g (route A).
SymTensorField deturck_rhs(const MetricField& g, const MetricField& gt);

struct RhsRoutes {
  SymTensorField direct;      ///< route A: ricci + deturck_field + lie derivative
  SymTensorField background;  ///< route B: tr_g d^2 g + R(g, dg) - L_V g
};
RhsRoutes deturck_rhs_routes(const MetricField& g, const MetricField& gt);

/// Boundary quantities on one side, indexed by boundary node.
BoundaryField outward_normal(const MetricField& g, Side side);
BoundaryField induced_metric(const MetricField& g, Side side);
BoundaryField second_fundamental_form(const MetricField& g, Side side);
BoundaryField mean_curvature(const MetricField& g, Side side);
BoundaryField second_form_norm(const MetricField& g, Side side);
BoundaryField mean_curvature_linearized(const MetricField& g, const SymTensorField& h, Side side);

struct MeanCurvatureRoutes {
  BoundaryField formula;  ///< route (i): local-coordinate formula
  BoundaryField lie;    ///< route (ii): trace of L_nu g over the induced metric
};
MeanCurvatureRoutes mean_curvature_routes(const MetricField& g, Side side);

struct BoundaryGeometry {
  BoundaryField normal;
  BoundaryField A;
  BoundaryField H;
  BoundaryField gT;
};
BoundaryGeometry boundary_geometry(const MetricField& g, Side side);

}  // namespace rlab
