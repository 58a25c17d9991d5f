#include "ricci_lab/chart.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace rlab {

std::string to_string(ChartKind kind) {
  return kind == ChartKind::SlabTorus ? "SlabTorus" : "RadialBall";
}

ChartKind chart_kind_from_string(const std::string& text) {
  if (text == "SlabTorus" || text == "slab") return ChartKind::SlabTorus;
  if (text == "RadialBall" || text == "ball") return ChartKind::RadialBall;
  throw std::invalid_argument("unknown chart kind '" + text + "'");
}

Chart Chart::slab_torus(int n, int N0, int Nt, double L) {
  if (n < 1 || n + 1 > kMaxDim) throw std::invalid_argument("slab: n must be in [1, 6]");
  if (N0 < 4) throw std::invalid_argument("slab: N0 must be >= 4");
  if (Nt < 3) throw std::invalid_argument("slab: Nt must be >= 3");
  if (!(L > 0.0)) throw std::invalid_argument("slab: period L must be positive");
  Chart c;
  c.kind_ = ChartKind::SlabTorus;
  c.n_ = n;
  c.N0_ = N0;
  c.Nt_ = Nt;
  c.L_ = L;
  c.h0_ = 1.0 / (N0 - 1);
  c.ht_ = L / Nt;
  c.finalize();
  return c;
}

Chart Chart::radial_ball(int n, int N0) {
  if (n < 1 || n + 1 > kMaxDim) throw std::invalid_argument("ball: n must be in [1, 6]");
  if (N0 < 4) throw std::invalid_argument("ball: N0 must be >= 4");
  Chart c;
  c.kind_ = ChartKind::RadialBall;
  c.n_ = n;
  c.N0_ = N0;
  c.Nt_ = 1;
  c.h0_ = 1.0 / N0;
  c.ht_ = 0.0;
  c.L_ = 0.0;
  c.finalize();
  return c;
}

void Chart::finalize() {
  strides_.fill(0);
  if (kind_ == ChartKind::RadialBall) {
    strides_[0] = 1;
    node_count_ = static_cast<std::size_t>(N0_) + 1;
    return;
  }
  std::ptrdiff_t s = 1;
  for (int a = n_; a >= 1; --a) {
    strides_[a] = s;
    s *= Nt_;
  }
  strides_[0] = s;
  node_count_ = static_cast<std::size_t>(s) * static_cast<std::size_t>(N0_);
}

int Chart::axis_length(int axis) const {
  if (axis < 0 || axis >= axes()) throw std::out_of_range("axis out of range");
  if (axis == 0) return kind_ == ChartKind::RadialBall ? N0_ + 1 : N0_;
  return Nt_;
}

double Chart::min_spacing() const {
  return kind_ == ChartKind::SlabTorus ? std::min(h0_, ht_) : h0_;
}

std::size_t Chart::index(const std::array<int, kMaxDim>& multi) const {
  std::size_t idx = 0;
  for (int a = 0; a < axes(); ++a) idx += static_cast<std::size_t>(multi[a]) * strides_[a];
  return idx;
}

std::array<int, kMaxDim> Chart::multi_index(std::size_t node) const {
  std::array<int, kMaxDim> m{};
  for (int a = 0; a < axes(); ++a) {
    m[a] = static_cast<int>(node / strides_[a]);
    node %= strides_[a];
  }
  return m;
}

double Chart::coordinate_of_index(int axis, int i) const {
  if (kind_ == ChartKind::RadialBall) return (i + 0.5) * h0_;
  return axis == 0 ? i * h0_ : i * ht_;
}

double Chart::coordinate(std::size_t node, int axis) const {
  const auto m = multi_index(node);
  return coordinate_of_index(axis, m[axis]);
}

std::size_t Chart::boundary_count() const {
  return kind_ == ChartKind::SlabTorus ? static_cast<std::size_t>(strides_[0]) : 1;
}

std::size_t Chart::boundary_node(Side side, std::size_t b) const {
  if (kind_ == ChartKind::RadialBall) {
    if (side != Side::Upper) throw std::invalid_argument("RadialBall has only the r = 1 face");
    return static_cast<std::size_t>(N0_ - 1);
  }
  const std::size_t row = side == Side::Lower ? 0 : static_cast<std::size_t>(N0_ - 1);
  return row * static_cast<std::size_t>(strides_[0]) + b;
}

std::vector<Side> Chart::sides() const {
  if (kind_ == ChartKind::RadialBall) return {Side::Upper};
  return {Side::Lower, Side::Upper};
}

bool Chart::operator==(const Chart& o) const {
  return kind_ == o.kind_ && n_ == o.n_ && N0_ == o.N0_ && Nt_ == o.Nt_ && L_ == o.L_;
}

std::string Chart::summary() const {
  std::ostringstream os;
  os << "chart=" << to_string(kind_) << " n=" << n_ << " N0=" << N0_ << " Nt=" << Nt_;
  return os.str();
}

}  // namespace rlab
