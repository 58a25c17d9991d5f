#include "ricci_lab/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "ricci_lab/errors.hpp"

namespace rlab {

SmallMat unpack_boundary(const BoundaryField& f, std::size_t b, int n) {
  SmallMat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m(i, j) = m(j, i) = f.at(b, sym_index(i, j, n));
  return m;
}

// ---------------------------------------------------------------- time rules

Table::Table(std::vector<double> t, std::vector<double> v) : t_(std::move(t)), v_(std::move(v)) {
  if (t_.empty() || t_.size() != v_.size()) throw DataError("table: times and values differ in size");
  for (std::size_t i = 1; i < t_.size(); ++i)
    if (!(t_[i] > t_[i - 1])) throw DataError("table: times must be strictly increasing");
}

namespace {

// Bracketing interval and weight of t in a sorted time list; DataError outside.
std::pair<std::size_t, double> locate(const std::vector<double>& times, double t) {
  const double slack = 1e-12 * (1.0 + std::abs(times.back()));
  if (t < times.front() - slack || t > times.back() + slack)
    throw DataError("tabulated rule undefined at t=" + std::to_string(t) + " (range [" +
                    std::to_string(times.front()) + ", " + std::to_string(times.back()) + "])");
  if (times.size() == 1) return {0, 0.0};
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t i = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
  i = std::min(i, times.size() - 2);
  const double w = std::clamp((t - times[i]) / (times[i + 1] - times[i]), 0.0, 1.0);
  return {i, w};
}

constexpr double kForever = std::numeric_limits<double>::infinity();

}  // namespace

double Table::operator()(double t) const {
  const auto [i, w] = locate(t_, t);
  if (t_.size() == 1) return v_[0];
  return (1.0 - w) * v_[i] + w * v_[i + 1];
}

TimeFunction TimeFunction::constant(double a) {
  TimeFunction f;
  f.kind_ = Kind::Constant;
  f.a_ = a;
  return f;
}

TimeFunction TimeFunction::linear(double a, double b) {
  TimeFunction f;
  f.kind_ = Kind::Linear;
  f.a_ = a;
  f.b_ = b;
  return f;
}

TimeFunction TimeFunction::tabulated(Table table) {
  TimeFunction f;
  f.kind_ = Kind::Tabulated;
  f.table_ = std::move(table);
  return f;
}

double TimeFunction::operator()(double t) const {
  switch (kind_) {
    case Kind::Constant: return a_;
    case Kind::Linear: return a_ + b_ * t;
    case Kind::Tabulated: return table_(t);
  }
  return 0.0;
}

double TimeFunction::t_max() const { return kind_ == Kind::Tabulated ? table_.t_max() : kForever; }

namespace {

int fiber_dim(const BoundaryField& f) {
  int n = 1;
  while (sym_size(n) < f.components) ++n;
  if (sym_size(n) != f.components) throw DataError("gamma frame is not a packed symmetric tensor");
  return n;
}

void check_positive(const BoundaryField& f, int n) {
  for (std::size_t b = 0; b < f.count; ++b) {
    Eigen::LLT<SmallMat> llt(unpack_boundary(f, b, n));
    if (llt.info() != Eigen::Success) throw DataError("gamma is not positive-definite at boundary node " + std::to_string(b));
  }
}

}  // namespace

GammaRule GammaRule::constant(BoundaryField gamma0) {
  GammaRule r;
  r.kind_ = Kind::Constant;
  r.n_ = fiber_dim(gamma0);
  check_positive(gamma0, r.n_);
  r.frames_.push_back(std::move(gamma0));
  return r;
}

GammaRule GammaRule::scaled(BoundaryField gamma0, TimeFunction lambda) {
  GammaRule r = constant(std::move(gamma0));
  r.kind_ = Kind::Scaled;
  r.lambda_ = std::move(lambda);
  return r;
}

GammaRule GammaRule::tabulated(std::vector<double> times, std::vector<BoundaryField> frames) {
  if (times.empty() || times.size() != frames.size())
    throw DataError("gamma table: times and frames differ in size");
  Table check(times, std::vector<double>(times.size(), 0.0));  // validates ordering
  GammaRule r;
  r.kind_ = Kind::Tabulated;
  r.n_ = fiber_dim(frames.front());
  for (const auto& f : frames) {
    if (f.count != frames.front().count || f.components != frames.front().components)
      throw DataError("gamma table: frames differ in shape");
    check_positive(f, r.n_);
  }
  r.times_ = std::move(times);
  r.frames_ = std::move(frames);
  return r;
}

SmallMat GammaRule::at(std::size_t b, double t) const {
  switch (kind_) {
    case Kind::Constant: return unpack_boundary(frames_[0], b, n_);
    case Kind::Scaled: {
      const double l = lambda_(t);
      if (!(l > 0.0)) throw DataError("gamma scaling lambda(t) is not positive at t=" + std::to_string(t));
      return l * unpack_boundary(frames_[0], b, n_);
    }
    case Kind::Tabulated: {
      const auto [i, w] = locate(times_, t);
      if (frames_.size() == 1) return unpack_boundary(frames_[0], b, n_);
      return (1.0 - w) * unpack_boundary(frames_[i], b, n_) + w * unpack_boundary(frames_[i + 1], b, n_);
    }
  }
  return {};
}

BoundaryField GammaRule::frame(double t) const {
  BoundaryField out(frames_[0].side, frames_[0].components, frames_[0].count);
  for (std::size_t b = 0; b < out.count; ++b) {
    const SmallMat m = at(b, t);
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) out.at(b, sym_index(i, j, n_)) = m(i, j);
  }
  return out;
}

double GammaRule::t_max() const {
  switch (kind_) {
    case Kind::Constant: return kForever;
    case Kind::Scaled: return lambda_.t_max();
    case Kind::Tabulated: return times_.back();
  }
  return kForever;
}

EtaRule EtaRule::time(TimeFunction f) {
  EtaRule r;
  r.kind_ = Kind::Time;
  r.f_ = std::move(f);
  r.description_ = "time";
  return r;
}

EtaRule EtaRule::field(std::vector<double> base, TimeFunction shift) {
  EtaRule r;
  r.kind_ = Kind::Field;
  r.base_ = std::move(base);
  r.f_ = std::move(shift);
  r.description_ = "field";
  return r;
}

EtaRule EtaRule::tabulated(std::vector<double> times, std::vector<std::vector<double>> frames) {
  if (times.empty() || times.size() != frames.size())
    throw DataError("eta table: times and frames differ in size");
  Table check(times, std::vector<double>(times.size(), 0.0));
  EtaRule r;
  r.kind_ = Kind::Tabulated;
  r.times_ = std::move(times);
  r.frames_ = std::move(frames);
  r.description_ = "tabulated";
  return r;
}

EtaRule EtaRule::induced(InducedFn fn, std::string description) {
  EtaRule r;
  r.kind_ = Kind::Induced;
  r.fn_ = std::move(fn);
  r.description_ = std::move(description);
  return r;
}

EtaRule EtaRule::induced_power(double value, double power) {
  return induced(
      [value, power](double, const SmallMat& gT, const SmallMat&) {
        return value * std::pow(gT.trace() / static_cast<double>(gT.rows()), power);
      },
      "induced_power");
}

double EtaRule::operator()(std::size_t b, double t, const SmallMat& gT) const {
  switch (kind_) {
    case Kind::Time: return f_(t);
    case Kind::Field:
      if (b >= base_.size()) throw DataError("eta field has no value for boundary node " + std::to_string(b));
      return base_[b] + f_(t);
    case Kind::Tabulated: {
      const auto [i, w] = locate(times_, t);
      if (frames_.size() == 1) return frames_[0].at(b);
      return (1.0 - w) * frames_[i].at(b) + w * frames_[i + 1].at(b);
    }
    case Kind::Induced: return fn_(t, gT, gT.inverse());
  }
  return 0.0;
}

double EtaRule::t_max() const {
  switch (kind_) {
    case Kind::Time:
    case Kind::Field: return f_.t_max();
    case Kind::Tabulated: return times_.back();
    case Kind::Induced: return kForever;
  }
  return kForever;
}

const SideDatum& BoundaryDatum::side(Side s) const {
  auto it = sides.find(s);
  if (it == sides.end()) throw DataError("boundary datum has no entry for this side");
  return it->second;
}

double BoundaryDatum::t_max() const {
  double t = kForever;
  for (const auto& [s, d] : sides) t = std::min({t, d.gamma.t_max(), d.eta.t_max()});
  return t;
}

BoundaryDatum BoundaryDatum::from_initial(const MetricField& g0) {
  BoundaryDatum d;
  for (Side s : g0.chart().sides()) {
    const BoundaryField H = mean_curvature(g0, s);
    d.sides.emplace(s, SideDatum{GammaRule::constant(induced_metric(g0, s)), EtaRule::field(H.values)});
  }
  return d;
}

ResidualLayout::ResidualLayout(int n_) : n(n_) {
  if (n < 1) throw std::invalid_argument("residual layout: n must be at least 1");
  if (total() != sym_size(n + 1))
    throw std::logic_error("residual dimension does not match the unknown count");
}

// ---------------------------------------------------------------- residuals

BoundaryField conformal_residual(const MetricField& g, const BoundaryField& gamma, Side side) {
  const int n = g.chart().n();
  const BoundaryField gT = induced_metric(g, side);
  if (gamma.count != gT.count || gamma.components != gT.components)
    throw std::invalid_argument("conformal_residual: gamma frame does not match the boundary");
  BoundaryField out(side, gT.components, gT.count);
  for (std::size_t b = 0; b < gT.count; ++b) {
    const SmallMat gm = unpack_boundary(gamma, b, n);
    const SmallMat t = unpack_boundary(gT, b, n);
    Eigen::LLT<SmallMat> llt(gm);
    if (llt.info() != Eigen::Success) throw DataError("singular gamma at boundary node " + std::to_string(b));
    const double c = llt.solve(t).trace() / n;
    const SmallMat r = t - c * gm;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) out.at(b, sym_index(i, j, n)) = r(i, j);
  }
  return out;
}

BoundaryField conformal_factor(const MetricField& g, const BoundaryField& gamma, Side side) {
  const int n = g.chart().n();
  const BoundaryField gT = induced_metric(g, side);
  BoundaryField out(side, 1, gT.count);
  for (std::size_t b = 0; b < gT.count; ++b)
    out.at(b, 0) = unpack_boundary(gamma, b, n).llt().solve(unpack_boundary(gT, b, n)).trace() / n;
  return out;
}

BoundaryField mean_residual(const MetricField& g, const BoundaryDatum& datum, double t, Side side) {
  const int n = g.chart().n();
  const EtaRule& eta = datum.side(side).eta;
  BoundaryField H = mean_curvature(g, side);
  const BoundaryField gT = induced_metric(g, side);
  for (std::size_t b = 0; b < H.count; ++b) H.at(b, 0) -= eta(b, t, unpack_boundary(gT, b, n));
  return H;
}

BoundaryField gauge_residual(const MetricField& g, const MetricField& gt, Side side) {
  const Chart& chart = g.chart();
  if (chart.kind() != ChartKind::SlabTorus)
    throw std::invalid_argument("gauge_residual: SlabTorus only (the ball gauge is fixed by symmetry)");
  const int d = chart.dim();
  BoundaryField out(side, d, chart.boundary_count());
  for (std::size_t b = 0; b < out.count; ++b) {
    const std::size_t node = chart.boundary_node(side, b);
    const SmallVec W = local::deturck_oneform(node_jet(g.tensor(), node), g.inverse_at(node),
                                              node_jet(gt.tensor(), node), gt.inverse_at(node));
    for (int l = 0; l < d; ++l) out.at(b, l) = W(l);
  }
  return out;
}

BoundaryField stacked_residual(const MetricField& g, const MetricField& gt,
                               const BoundaryDatum& datum, double t, Side side) {
  const ResidualLayout L(g.chart().n());
  const BoundaryField W = gauge_residual(g, gt, side);
  const BoundaryField M = mean_residual(g, datum, t, side);
  const BoundaryField C = conformal_residual(g, datum.side(side).gamma.frame(t), side);
  BoundaryField out(side, L.total(), W.count);
  for (std::size_t b = 0; b < out.count; ++b) {
    int k = 0;
    for (int l = 0; l < L.gauge(); ++l) out.at(b, k++) = W.at(b, l);
    out.at(b, k++) = M.at(b, 0);
    for (int c = 0; c < L.conformal(); ++c) out.at(b, k++) = C.at(b, c);
  }
  return out;
}

// ---------------------------------------------------------------- Newton closure

namespace {

// Local evaluation of the stacked residual at boundary nodes, reading the working tensor.
class BoundarySystem {
 public:
  BoundarySystem(const SymTensorField& work, const MetricField& gt, const SideDatum& datum,
                 double t, Side side)
      : work_(work), chart_(work.chart()), layout_(chart_.n()), datum_(datum), t_(t), side_(side) {
    const std::size_t count = chart_.boundary_count();
    base_ = chart_.boundary_node(side, 0);
    for (std::size_t b = 0; b < count; ++b) {
      const std::size_t node = chart_.boundary_node(side, b);
      gt_jet_.push_back(node_jet(gt.tensor(), node));
      gt_inv_.push_back(gt.inverse_at(node));
      gamma_.push_back(datum.gamma.at(b, t));
    }
  }

  int block() const { return layout_.total(); }
  std::size_t count() const { return gt_jet_.size(); }
  std::size_t node(std::size_t b) const { return base_ + b; }

  // Residual at boundary node b written into out[0..block).
  void eval(std::size_t b, double* out) const {
    const std::size_t nd = node(b);
    const Jet J = node_jet(work_, nd);
    const SmallMat ginv = spd_inverse(J.v, nd);
    const int n = chart_.n();
    const SmallVec W = local::deturck_oneform(J, ginv, gt_jet_[b], gt_inv_[b]);
    int k = 0;
    for (int l = 0; l <= n; ++l) out[k++] = W(l);
    const SmallMat gT = local::tangential(J.v);
    out[k++] = local::mean_curvature(J, ginv, side_) - datum_.eta(b, t_, gT);
    const SmallMat& gm = gamma_[b];
    const double c = gm.llt().solve(gT).trace() / n;
    const SmallMat r = gT - c * gm;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const int p = sym_index(i, j, n);
        if (p < layout_.conformal()) out[k + p] = r(i, j);
      }
  }

  Eigen::VectorXd eval_all() const {
    Eigen::VectorXd F(static_cast<Eigen::Index>(count()) * block());
    for (std::size_t b = 0; b < count(); ++b) eval(b, F.data() + b * block());
    return F;
  }

  // Boundary nodes whose residual reads the value at boundary node b.
  std::vector<std::size_t> coupled(std::size_t b) const {
    std::vector<std::size_t> out{b};
    auto m = chart_.multi_index(node(b));
    for (int a = 1; a < chart_.axes(); ++a)
      for (int step : {-1, 1}) {
        auto q = m;
        const int len = chart_.axis_length(a);
        q[a] = (m[a] + step + len) % len;
        const std::size_t nb = chart_.index(q) - base_;
        if (std::find(out.begin(), out.end(), nb) == out.end()) out.push_back(nb);
      }
    return out;
  }

 private:
  const SymTensorField& work_;
  const Chart& chart_;
  ResidualLayout layout_;
  const SideDatum& datum_;
  double t_;
  Side side_;
  std::size_t base_ = 0;
  std::vector<Jet> gt_jet_;
  std::vector<SmallMat> gt_inv_;
  std::vector<SmallMat> gamma_;
};

std::pair<std::size_t, double> worst(const Eigen::VectorXd& F, int block) {
  Eigen::Index i = 0;
  const double r = F.size() ? F.cwiseAbs().maxCoeff(&i) : 0.0;
  return {static_cast<std::size_t>(i / block), r};
}

}  // namespace

SolveReport solve_boundary(MetricField& g, const MetricField& gt, const BoundaryDatum& datum,
                           double t, Side side, const NewtonOptions& opt) {
  const Chart& chart = g.chart();
  if (chart.kind() != ChartKind::SlabTorus)
    throw std::invalid_argument("solve_boundary: SlabTorus only; the ball closure lives in rotsym");
  SymTensorField work = g.tensor();
  const BoundarySystem sys(work, gt, datum.side(side), t, side);
  const int K = sys.block();
  const std::size_t M = sys.count();
  const Eigen::Index size = static_cast<Eigen::Index>(M) * K;
  const int side_id = static_cast<int>(side);

  SolveReport rep;
  Eigen::VectorXd F = sys.eval_all();
  std::vector<double> saved(static_cast<std::size_t>(size));
  std::vector<double> col(static_cast<std::size_t>(K)), base_col(static_cast<std::size_t>(K));

  for (rep.iterations = 0;; ++rep.iterations) {
    const auto [wnode, wres] = worst(F, K);
    rep.residual = wres;
    if (!std::isfinite(wres)) throw NonFinite("boundary residual is not finite");
    if (wres <= opt.tolerance) break;
    if (rep.iterations >= opt.max_iterations) throw NonConvergence(side_id, sys.node(wnode), wres);

    // forward-difference Jacobian, one column per boundary unknown
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(size) * K * 5);
    for (std::size_t b = 0; b < M; ++b) {
      const auto nbrs = sys.coupled(b);
      for (int c = 0; c < K; ++c) {
        double& v = work.at(sys.node(b), c);
        const double v0 = v;
        const double step = opt.fd_step * (1.0 + std::abs(v0));
        v = v0 + step;
        for (std::size_t r : nbrs) {
          sys.eval(r, col.data());
          for (int k = 0; k < K; ++k) {
            const double dv = (col[k] - F(static_cast<Eigen::Index>(r) * K + k)) / step;
            if (dv != 0.0)
              trip.emplace_back(static_cast<int>(r) * K + k, static_cast<int>(b) * K + c, dv);
          }
        }
        v = v0;
      }
    }
    Eigen::SparseMatrix<double> J(size, size);
    J.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw SingularJacobian(side_id);
    const Eigen::VectorXd delta = lu.solve(-F);
    if (lu.info() != Eigen::Success || !delta.allFinite()) throw SingularJacobian(side_id);

    for (std::size_t b = 0; b < M; ++b)
      for (int c = 0; c < K; ++c) saved[b * K + c] = work.at(sys.node(b), c);
    const double norm0 = F.norm();
    double lambda = 1.0;
    bool accepted = false;
    while (lambda >= opt.damping_floor) {
      for (std::size_t b = 0; b < M; ++b)
        for (int c = 0; c < K; ++c)
          work.at(sys.node(b), c) = saved[b * K + c] + lambda * delta(static_cast<Eigen::Index>(b) * K + c);
      try {
        Eigen::VectorXd Fn = sys.eval_all();
        if (Fn.allFinite() && Fn.norm() < norm0) {
          F = std::move(Fn);
          accepted = true;
          break;
        }
      } catch (const SingularMetric&) {
        // trial left the SPD cone; damp further
      }
      lambda *= 0.5;
      ++rep.halvings;
    }
    if (!accepted) {
      for (std::size_t b = 0; b < M; ++b)
        for (int c = 0; c < K; ++c) work.at(sys.node(b), c) = saved[b * K + c];
      throw NonConvergence(side_id, sys.node(wnode), wres);
    }
  }

  for (std::size_t b = 0; b < M; ++b) g.assign(sys.node(b), unpack(work, sys.node(b)));
  return rep;
}

}  // namespace rlab
