#include "ricci_lab/stencil.hpp"

#include <cmath>
#include <stdexcept>

#include "ricci_lab/kernels.hpp"

namespace rlab {
namespace {

void check_axis(const Chart& chart, int axis) {
  if (axis < 0 || axis >= chart.axes())
    throw std::out_of_range("derivative axis " + std::to_string(axis) + " out of range");
}

// One-sided stencils written on differences so constants cancel exactly.
// f0 is the end node, f1.. step inward.
double one_sided_d1(double f0, double f1, double f2) { return 3.0 * (f0 - f1) + (f2 - f1); }
double one_sided_d2(double f0, double f1, double f2, double f3) {
  return 2.0 * (f0 - f1) - 3.0 * (f1 - f2) + (f2 - f3);
}

// Ends of a single non-periodic line of `len` samples with element stride `s`.
// Interior points go through the kernel table.
void nonperiodic_ends(const double* f, double* out, std::ptrdiff_t s, int len, int order,
                      double h) {
  const auto F = [&](int i) { return f[i * s]; };
  if (order == 1) {
    const double c = 1.0 / (2.0 * h);
    out[0] = -one_sided_d1(F(0), F(1), F(2)) * c;
    out[(len - 1) * s] = one_sided_d1(F(len - 1), F(len - 2), F(len - 3)) * c;
  } else {
    const double c = 1.0 / (h * h);
    out[0] = one_sided_d2(F(0), F(1), F(2), F(3)) * c;
    out[(len - 1) * s] = one_sided_d2(F(len - 1), F(len - 2), F(len - 3), F(len - 4)) * c;
  }
}

void slab_axis(const double* f, double* out, const Chart& chart, int axis, int order) {
  const auto& K = kernels::active();
  const std::ptrdiff_t s = chart.stride(axis);
  const int len = chart.axis_length(axis);
  const double h = chart.spacing(axis);
  const double scale = order == 1 ? 1.0 / (2.0 * h) : 1.0 / (h * h);
  const std::size_t block = static_cast<std::size_t>(len) * s;
  const std::size_t blocks = chart.node_count() / block;
  const std::size_t run = static_cast<std::size_t>(len - 2) * s;
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* fb = f + b * block;
    double* ob = out + b * block;
    if (order == 1)
      K.diff1(fb + 2 * s, fb, ob + s, run, scale);
    else
      K.diff2(fb + 2 * s, fb + s, fb, ob + s, run, scale);
    if (!chart.periodic(axis)) {
      for (std::ptrdiff_t k = 0; k < s; ++k) nonperiodic_ends(fb + k, ob + k, s, len, order, h);
      continue;
    }
    const double* last = fb + (len - 1) * s;
    if (order == 1) {
      K.diff1(fb + s, last, ob, s, scale);
      K.diff1(fb, fb + (len - 2) * s, ob + (len - 1) * s, s, scale);
    } else {
      K.diff2(fb + s, fb, last, ob, s, scale);
      K.diff2(fb, last, fb + (len - 2) * s, ob + (len - 1) * s, s, scale);
    }
  }
}

void radial_axis(const double* f, double* out, const Chart& chart, Parity parity, int order) {
  const auto& K = kernels::active();
  const int len = chart.axis_length(0);  // N0 + ghost
  const double h = chart.h0();
  const double p = parity == Parity::Even ? 1.0 : -1.0;
  if (order == 1) {
    const double c = 1.0 / (2.0 * h);
    K.diff1(f + 2, f, out + 1, static_cast<std::size_t>(len - 2), c);
    out[0] = (f[1] - p * f[0]) * c;
    out[len - 1] = one_sided_d1(f[len - 1], f[len - 2], f[len - 3]) * c;
  } else {
    const double c = 1.0 / (h * h);
    K.diff2(f + 2, f + 1, f, out + 1, static_cast<std::size_t>(len - 2), c);
    out[0] = ((f[1] + p * f[0]) - (f[0] + f[0])) * c;
    out[len - 1] = one_sided_d2(f[len - 1], f[len - 2], f[len - 3], f[len - 4]) * c;
  }
}

}  // namespace

SymTensorField partial_derivative(const SymTensorField& f, int axis, int order) {
  const Chart& chart = f.chart();
  check_axis(chart, axis);
  if (order != 1 && order != 2) throw std::invalid_argument("derivative order must be 1 or 2");
  SymTensorField out(chart, f.rank());
  for (int c = 0; c < f.components(); ++c) {
    if (chart.kind() == ChartKind::SlabTorus)
      slab_axis(f.component(c).data(), out.component(c).data(), chart, axis, order);
    else
      radial_axis(f.component(c).data(), out.component(c).data(), chart, f.parity(c), order);
  }
  return out;
}

double node_derivative(const SymTensorField& f, int component, std::size_t node, int axis) {
  const Chart& chart = f.chart();
  check_axis(chart, axis);
  const auto v = f.component(component);
  const double c = 1.0 / (2.0 * chart.spacing(axis));
  const std::ptrdiff_t s = chart.stride(axis);
  const int len = chart.axis_length(axis);
  const int i = chart.multi_index(node)[axis];
  const auto at = [&](int j) { return v[node + static_cast<std::ptrdiff_t>(j - i) * s]; };
  if (chart.periodic(axis)) {
    const int ip = (i + 1) % len;
    const int im = (i + len - 1) % len;
    return (at(ip) - at(im)) * c;
  }
  if (chart.kind() == ChartKind::RadialBall && i == 0) {
    const double p = f.parity(component) == Parity::Even ? 1.0 : -1.0;
    return (at(1) - p * at(0)) * c;
  }
  if (i == 0) return -one_sided_d1(at(0), at(1), at(2)) * c;
  if (i == len - 1) return one_sided_d1(at(len - 1), at(len - 2), at(len - 3)) * c;
  return (at(i + 1) - at(i - 1)) * c;
}

Point node_point(const Chart& chart, std::size_t node) {
  Point p{};
  const auto m = chart.multi_index(node);
  for (int a = 0; a < chart.axes(); ++a) p[a] = chart.coordinate_of_index(a, m[a]);
  return p;
}

namespace {

// Cell index and weight along one axis; snaps node-coincident coordinates so that the
// node value is returned exactly.
struct AxisWeight {
  int lo;
  int hi;
  double w;
};

AxisWeight locate(double t, int lo_limit, int hi_limit) {
  const double nearest = std::nearbyint(t);
  if (std::abs(t - nearest) <= 1e-12 * std::max(1.0, std::abs(t))) t = nearest;
  int i = static_cast<int>(std::floor(t));
  if (i < lo_limit) i = lo_limit;
  if (i > hi_limit - 1) i = hi_limit - 1;
  return {i, i + 1, t - i};
}

}  // namespace

std::vector<double> interpolate(const SymTensorField& f, const Point& point) {
  const Chart& chart = f.chart();
  const int axes = chart.axes();
  std::array<AxisWeight, kMaxDim> w{};
  if (chart.kind() == ChartKind::SlabTorus) {
    const double x0 = point[0];
    if (!(x0 >= -1e-12 && x0 <= 1.0 + 1e-12))
      throw std::out_of_range("interpolation point outside the normal range [0, 1]");
    w[0] = locate(x0 / chart.h0(), 0, chart.N0() - 1);
    for (int a = 1; a < axes; ++a) {
      double x = std::fmod(point[a], chart.L());
      if (x < 0.0) x += chart.L();
      w[a] = locate(x / chart.ht(), 0, chart.Nt());  // hi index Nt wraps to 0
    }
  } else {
    const double r = point[0];
    const double r_max = 1.0 + 0.5 * chart.h0();
    if (!(r >= -r_max && r <= r_max + 1e-12))
      throw std::out_of_range("interpolation radius outside the ball");
    // Index space shifted by one so that the parity image of node 0 sits at index 0.
    w[0] = locate(std::abs(r) / chart.h0() - 0.5 + 1.0, 0, chart.N0() + 1);
  }

  std::vector<double> out(f.components(), 0.0);
  const int corners = 1 << axes;
  for (int c = 0; c < f.components(); ++c) {
    double acc = 0.0;
    for (int corner = 0; corner < corners; ++corner) {
      double weight = 1.0;
      std::array<int, kMaxDim> m{};
      for (int a = 0; a < axes; ++a) {
        const bool up = (corner >> a) & 1;
        weight *= up ? w[a].w : 1.0 - w[a].w;
        m[a] = up ? w[a].hi : w[a].lo;
      }
      if (weight == 0.0) continue;
      double value;
      if (chart.kind() == ChartKind::SlabTorus) {
        for (int a = 1; a < axes; ++a) m[a] %= chart.Nt();
        value = f.at(chart.index(m), c);
      } else {
        const int j = m[0] - 1;  // undo the shift
        const double sign = (j < 0 && f.parity(c) == Parity::Odd) ? -1.0 : 1.0;
        value = sign * f.at(static_cast<std::size_t>(j < 0 ? 0 : j), c);
        if (point[0] < 0.0 && f.parity(c) == Parity::Odd) value = -value;
      }
      acc += weight * value;
    }
    out[c] = acc;
  }
  return out;
}

}  // namespace rlab
