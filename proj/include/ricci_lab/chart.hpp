#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace rlab {

enum class ChartKind { SlabTorus, RadialBall };

std::string to_string(ChartKind kind);
ChartKind chart_kind_from_string(const std::string& text);

/// Boundary component. SlabTorus has Lower (x0 = 0) and Upper (x0 = 1);
/// RadialBall only has Upper (the face r = 1).
enum class Side { Lower = 0, Upper = 1 };

inline constexpr int kMaxDim = 7;

/// Discrete geometry.
///
/// SlabTorus: vertex-centered normal axis x0 in [0, 1] with N0 nodes, and n periodic
/// tangential axes with Nt nodes each and period L. Storage order is row-major with
/// the normal axis slowest and the last tangential axis fastest.
///
/// RadialBall: cell-centered radial nodes r_j = (j + 1/2) h0, j = 0..N0-1, plus one
/// exterior ghost node at r = 1 + h0/2 (storage index N0). The boundary face r = 1
/// sits halfway between node N0-1 and the ghost. Only the radial axis is gridded;
/// tensors are stored in the frame (dr, round orthonormal frame of the fiber sphere).
class Chart {
 public:
  static Chart slab_torus(int n, int N0, int Nt, double L = 1.0);
  static Chart radial_ball(int n, int N0);

  ChartKind kind() const { return kind_; }
  int n() const { return n_; }
  int dim() const { return n_ + 1; }
  int N0() const { return N0_; }
  int Nt() const { return Nt_; }
  double h0() const { return h0_; }
  double ht() const { return ht_; }
  double L() const { return L_; }

  /// Number of gridded axes (n + 1 for SlabTorus, 1 for RadialBall).
  int axes() const { return kind_ == ChartKind::SlabTorus ? n_ + 1 : 1; }
  int axis_length(int axis) const;
  std::ptrdiff_t stride(int axis) const { return strides_[axis]; }
  double spacing(int axis) const { return axis == 0 ? h0_ : ht_; }
  double min_spacing() const;
  bool periodic(int axis) const { return kind_ == ChartKind::SlabTorus && axis > 0; }

  /// Total storage nodes (includes the RadialBall ghost).
  std::size_t node_count() const { return node_count_; }
  std::size_t index(const std::array<int, kMaxDim>& multi) const;
  std::array<int, kMaxDim> multi_index(std::size_t node) const;
  /// Chart coordinate of the node along a gridded axis.
  double coordinate(std::size_t node, int axis) const;
  double coordinate_of_index(int axis, int i) const;
  bool is_ghost(std::size_t node) const {
    return kind_ == ChartKind::RadialBall && node == static_cast<std::size_t>(N0_);
  }

  /// Boundary nodes of one side: for SlabTorus the whole face x0 = 0 or 1 in
  /// tangential storage order; RadialBall has a single face value.
  std::size_t boundary_count() const;
  std::size_t boundary_node(Side side, std::size_t b) const;
  std::vector<Side> sides() const;
  /// Outward orientation sign of the normal coordinate: -1 at x0 = 0, +1 at x0 = 1 or r = 1.
  static double orientation(Side side) { return side == Side::Lower ? -1.0 : 1.0; }

  bool operator==(const Chart& other) const;
  bool operator!=(const Chart& other) const { return !(*this == other); }
  std::string summary() const;

 private:
  Chart() = default;
  void finalize();

  ChartKind kind_ = ChartKind::SlabTorus;
  int n_ = 1;
  int N0_ = 0;
  int Nt_ = 1;
  double h0_ = 0.0;
  double ht_ = 0.0;
  double L_ = 1.0;
  std::size_t node_count_ = 0;
  std::array<std::ptrdiff_t, kMaxDim> strides_{};
};

/// Packed index of (i, j) in the upper-triangular order (0,0),(0,1),...,(dim-1,dim-1).
constexpr int sym_index(int i, int j, int dim) {
  if (i > j) {
    const int t = i;
    i = j;
    j = t;
  }
  return i * dim - i * (i - 1) / 2 + (j - i);
}
constexpr int sym_size(int dim) { return dim * (dim + 1) / 2; }

}  // namespace rlab
