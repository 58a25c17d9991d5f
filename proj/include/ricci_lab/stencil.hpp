#pragma once

#include <array>
#include <vector>

#include "ricci_lab/field.hpp"

namespace rlab {

/// Second-order finite difference along one gridded axis, applied to every component.
///
/// Interior nodes use centered stencils. Non-periodic ends use one-sided stencils (3 points
/// for first derivatives, 4 points for second derivatives). Tangential SlabTorus axes wrap.
/// On RadialBall the node below r_0 is the parity reflection of r_0, and the exterior ghost
/// uses a backward one-sided stencil.
SymTensorField partial_derivative(const SymTensorField& f, int axis, int order);

/// First derivative of one component at a single node (same stencils as partial_derivative).
double node_derivative(const SymTensorField& f, int component, std::size_t node, int axis);

/// Continuous position in chart coordinates (x0, x1..xn) or (r) for RadialBall.
using Point = std::array<double, kMaxDim>;

/// Multilinear interpolation of all components at a point. Tangential coordinates are
/// reduced modulo L; the normal/radial coordinate must lie inside the chart.
std::vector<double> interpolate(const SymTensorField& f, const Point& point);

/// Nodal coordinates as a Point.
Point node_point(const Chart& chart, std::size_t node);

}  // namespace rlab
