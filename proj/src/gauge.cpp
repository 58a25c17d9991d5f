#include "ricci_lab/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ricci_lab/curvature.hpp"
#include "ricci_lab/metric.hpp"
#include "ricci_lab/stencil.hpp"

namespace rlab {
namespace {

constexpr double kTimeTol = 1e-12;
constexpr double kNormalTol = 1e-9;

void require_slab(const Chart& chart, const char* what) {
  if (chart.kind() != ChartKind::SlabTorus)
    throw std::invalid_argument(std::string(what) + ": SlabTorus charts only");
}

// Normal coordinate clamped into [0, 1]; nodes further out than kNormalTol are an error.
Point clamp_normal(Point p, std::size_t node, double t) {
  if (!(p[0] >= -kNormalTol && p[0] <= 1.0 + kNormalTol))
    throw DiffeoError(node, t, "image point left the normal range (x0 = " +
                                   std::to_string(p[0]) + ")");
  p[0] = std::clamp(p[0], 0.0, 1.0);
  return p;
}

Point image_point(const DiffeoField& psi, std::size_t node) {
  Point p{};
  for (int a = 0; a < psi.map.dim(); ++a) p[a] = psi.map.at(node, a);
  return p;
}

// Velocity -W at `p`, blended linearly between two samples with weight s on the second.
void minus_w(const VelocitySample& lo, const VelocitySample& hi, double s, const Point& p,
             int dim, double* out) {
  const std::vector<double> a = interpolate(lo.w, p);
  if (s == 0.0) {
    for (int c = 0; c < dim; ++c) out[c] = -a[c];
    return;
  }
  const std::vector<double> b = interpolate(hi.w, p);
  for (int c = 0; c < dim; ++c) out[c] = -((1.0 - s) * a[c] + s * b[c]);
}

}  // namespace

std::vector<VelocitySample> gauge_velocities(const FlowTrajectory& trajectory) {
  if (trajectory.backgrounds.size() != trajectory.snapshots.size())
    throw DataError("trajectory stores " + std::to_string(trajectory.snapshots.size()) +
                    " snapshots but " + std::to_string(trajectory.backgrounds.size()) +
                    " backgrounds");
  std::vector<VelocitySample> out;
  out.reserve(trajectory.snapshots.size());
  for (std::size_t k = 0; k < trajectory.snapshots.size(); ++k) {
    const TimedMetric& s = trajectory.snapshots[k];
    require_slab(s.g.chart(), "gauge_velocities");
    out.push_back({s.t, deturck_field(s.g, trajectory.backgrounds[k].g).vector});
  }
  return out;
}

DiffeoField identity_diffeo(const Chart& chart, double t) {
  require_slab(chart, "identity_diffeo");
  DiffeoField psi{t, SymTensorField(chart, Rank::Vector)};
  for (std::size_t i = 0; i < chart.node_count(); ++i) {
    const Point p = node_point(chart, i);
    for (int a = 0; a < chart.dim(); ++a) psi.map.at(i, a) = p[a];
  }
  return psi;
}

std::vector<DiffeoField> integrate_diffeo(const std::vector<VelocitySample>& samples,
                                          double t_start, double t_end, int substeps) {
  if (samples.empty()) throw DataError("integrate_diffeo: no velocity samples");
  if (substeps < 1) throw std::invalid_argument("integrate_diffeo: substeps must be >= 1");
  if (!(t_end >= t_start)) throw std::invalid_argument("integrate_diffeo: t_end < t_start");
  for (std::size_t k = 1; k < samples.size(); ++k)
    if (!(samples[k].t > samples[k - 1].t))
      throw DataError("integrate_diffeo: sample times not increasing at index " +
                      std::to_string(k));
  if (t_start < samples.front().t - kTimeTol || t_end > samples.back().t + kTimeTol)
    throw DataError("integrate_diffeo: trajectory gap, samples cover [" +
                    std::to_string(samples.front().t) + ", " + std::to_string(samples.back().t) +
                    "] but [" + std::to_string(t_start) + ", " + std::to_string(t_end) +
                    "] was requested");

  const Chart& chart = samples.front().w.chart();
  require_slab(chart, "integrate_diffeo");
  const int dim = chart.dim();
  const std::size_t nodes = chart.node_count();

  std::vector<DiffeoField> out;
  DiffeoField psi = identity_diffeo(chart, t_start);
  out.push_back(psi);
  if (t_end == t_start || samples.size() == 1) return out;

  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim);
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const VelocitySample& lo = samples[k];
    const VelocitySample& hi = samples[k + 1];
    const double a = std::max(lo.t, t_start);
    const double b = std::min(hi.t, t_end);
    if (!(b > a)) continue;
    const double span = hi.t - lo.t;
    const double dt = (b - a) / substeps;
    auto weight = [&](double t) { return std::clamp((t - lo.t) / span, 0.0, 1.0); };

    for (int step = 0; step < substeps; ++step) {
      const double t0 = a + step * dt;
      const double s0 = weight(t0), sh = weight(t0 + 0.5 * dt), s1 = weight(t0 + dt);
      for (std::size_t i = 0; i < nodes; ++i) {
        const Point x = clamp_normal(image_point(psi, i), i, t0);
        Point y = x;
        minus_w(lo, hi, s0, x, dim, k1.data());
        for (int c = 0; c < dim; ++c) y[c] = x[c] + 0.5 * dt * k1[c];
        minus_w(lo, hi, sh, clamp_normal(y, i, t0), dim, k2.data());
        for (int c = 0; c < dim; ++c) y[c] = x[c] + 0.5 * dt * k2[c];
        minus_w(lo, hi, sh, clamp_normal(y, i, t0), dim, k3.data());
        for (int c = 0; c < dim; ++c) y[c] = x[c] + dt * k3[c];
        minus_w(lo, hi, s1, clamp_normal(y, i, t0), dim, k4.data());
        for (int c = 0; c < dim; ++c)
          psi.map.at(i, c) += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
      }
    }
    psi.t = b;
    out.push_back(psi);
  }
  for (std::size_t i = 0; i < nodes; ++i) clamp_normal(image_point(psi, i), i, psi.t);
  return out;
}

std::vector<DiffeoField> integrate_diffeo(const FlowTrajectory& trajectory, double t_start,
                                          double t_end, int substeps) {
  return integrate_diffeo(gauge_velocities(trajectory), t_start, t_end, substeps);
}

MetricField pullback_metric(const DiffeoField& psi, const MetricField& g) {
  const Chart& chart = g.chart();
  require_slab(chart, "pullback_metric");
  const int dim = chart.dim();
  const std::size_t nodes = chart.node_count();

  SymTensorField disp(chart, Rank::Vector);
  for (std::size_t i = 0; i < nodes; ++i) {
    const Point x = node_point(chart, i);
    for (int a = 0; a < dim; ++a) disp.at(i, a) = psi.map.at(i, a) - x[a];
  }
  std::vector<SymTensorField> d;
  d.reserve(dim);
  for (int axis = 0; axis < dim; ++axis) d.push_back(partial_derivative(disp, axis, 1));

  SymTensorField out(chart, Rank::Sym2);
  SmallMat J(dim, dim), G(dim, dim);
  for (std::size_t i = 0; i < nodes; ++i) {
    for (int a = 0; a < dim; ++a)
      for (int k = 0; k < dim; ++k) J(a, k) = (a == k ? 1.0 : 0.0) + d[k].at(i, a);
    const double det = J.determinant();
    if (!(det > 0.0))
      throw DiffeoError(i, psi.t, "Jacobian determinant " + std::to_string(det));
    const std::vector<double> gv = interpolate(g.tensor(), clamp_normal(image_point(psi, i), i, psi.t));
    for (int a = 0; a < dim; ++a)
      for (int b = a; b < dim; ++b) G(a, b) = G(b, a) = gv[sym_index(a, b, dim)];
    pack(out, i, J.transpose() * G * J);
  }
  return MetricField(std::move(out));
}

double boundary_displacement(const DiffeoField& psi) {
  const Chart& chart = psi.map.chart();
  double worst = 0.0;
  for (Side side : {Side::Lower, Side::Upper}) {
    for (std::size_t b = 0; b < chart.boundary_count(); ++b) {
      const std::size_t node = chart.boundary_node(side, b);
      const Point x = node_point(chart, node);
      for (int a = 0; a < chart.dim(); ++a)
        worst = std::max(worst, std::abs(psi.map.at(node, a) - x[a]));
    }
  }
  return worst;
}

PulledTrajectory pull_back(const FlowTrajectory& trajectory, int substeps) {
  if (trajectory.snapshots.empty()) throw DataError("pull_back: trajectory has no snapshots");
  PulledTrajectory out;
  out.diffeos = integrate_diffeo(trajectory, trajectory.snapshots.front().t,
                                 trajectory.snapshots.back().t, substeps);
  if (out.diffeos.size() != trajectory.snapshots.size())
    throw DataError("pull_back: diffeomorphism samples do not match the snapshots");
  for (std::size_t k = 0; k < out.diffeos.size(); ++k) {
    out.metrics.push_back({trajectory.snapshots[k].t,
                           pullback_metric(out.diffeos[k], trajectory.snapshots[k].g)});
    out.max_boundary_displacement =
        std::max(out.max_boundary_displacement, boundary_displacement(out.diffeos[k]));
  }
  return out;
}

std::vector<ResidualSample> ricci_flow_residual(const std::vector<TimedMetric>& metrics) {
  if (metrics.size() < 3)
    throw DataError("ricci_flow_residual: needs at least 3 samples, got " +
                    std::to_string(metrics.size()));
  const Chart& chart = metrics.front().g.chart();
  require_slab(chart, "ricci_flow_residual");
  const int ncomp = sym_size(chart.dim());
  const int margin = chart.N0() >= 5 ? 2 : 0;

  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < chart.node_count(); ++i) {
    const int i0 = chart.multi_index(i)[0];
    if (i0 >= margin && i0 <= chart.N0() - 1 - margin) interior.push_back(i);
  }

  std::vector<ResidualSample> out;
  for (std::size_t k = 1; k + 1 < metrics.size(); ++k) {
    const double a = metrics[k].t - metrics[k - 1].t;
    const double b = metrics[k + 1].t - metrics[k].t;
    if (!(a > 0.0 && b > 0.0)) throw DataError("ricci_flow_residual: sample times not increasing");
    const double cm = -b / (a * (a + b)), c0 = (b - a) / (a * b), cp = a / (b * (a + b));
    const SymTensorField ric = ricci(metrics[k].g);
    const SymTensorField& gm = metrics[k - 1].g.tensor();
    const SymTensorField& g0 = metrics[k].g.tensor();
    const SymTensorField& gp = metrics[k + 1].g.tensor();
    double worst = 0.0;
    for (int c = 0; c < ncomp; ++c)
      for (std::size_t i : interior) {
        const double dtg = cm * gm.at(i, c) + c0 * g0.at(i, c) + cp * gp.at(i, c);
        worst = std::max(worst, std::abs(dtg + 2.0 * ric.at(i, c)));
      }
    out.push_back({metrics[k].t, worst});
  }
  return out;
}

}  // namespace rlab
