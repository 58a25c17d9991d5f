#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ricci_lab/chart.hpp"

namespace rlab {

enum class Rank { Scalar, Vector, OneForm, Sym2 };

int component_count(Rank rank, int dim);

/// Reflection parity of a component under r -> -r on the RadialBall chart.
/// Components carrying an odd number of radial indices are odd.
enum class Parity { Even, Odd };

/// Tensor-valued grid function, stored component-major (all nodes of component 0,
/// then component 1, ...). Symmetric 2-tensors use the packed upper-triangular order.
class SymTensorField {
 public:
  SymTensorField(const Chart& chart, Rank rank, double fill = 0.0);

  const Chart& chart() const { return chart_; }
  Rank rank() const { return rank_; }
  int dim() const { return chart_.dim(); }
  int components() const { return ncomp_; }
  std::size_t nodes() const { return chart_.node_count(); }

  std::span<double> component(int c) {
    return {values_.data() + static_cast<std::size_t>(c) * nodes(), nodes()};
  }
  std::span<const double> component(int c) const {
    return {values_.data() + static_cast<std::size_t>(c) * nodes(), nodes()};
  }
  double& at(std::size_t node, int c) { return values_[static_cast<std::size_t>(c) * nodes() + node]; }
  double at(std::size_t node, int c) const {
    return values_[static_cast<std::size_t>(c) * nodes() + node];
  }

  /// Symmetric access: get(node, i, j) == get(node, j, i).
  double get(std::size_t node, int i, int j) const { return at(node, sym_index(i, j, dim())); }
  void set(std::size_t node, int i, int j, double v) { at(node, sym_index(i, j, dim())) = v; }

  /// Parity of component c under radial reflection.
  Parity parity(int c) const;
  /// Override for scalar fields that are odd in r (for example the warping function).
  void set_scalar_parity(Parity p) { scalar_parity_ = p; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool all_finite() const;
  double max_abs() const;

  SymTensorField& operator+=(const SymTensorField& other);
  SymTensorField& operator-=(const SymTensorField& other);
  SymTensorField& operator*=(double s);

 private:
  Chart chart_;
  Rank rank_;
  int ncomp_;
  Parity scalar_parity_ = Parity::Even;
  std::vector<double> values_;
};

SymTensorField operator+(SymTensorField a, const SymTensorField& b);
SymTensorField operator-(SymTensorField a, const SymTensorField& b);
SymTensorField operator*(double s, SymTensorField a);

/// Values attached to the boundary nodes of one side, component-major.
struct BoundaryField {
  Side side = Side::Lower;
  int components = 1;
  std::size_t count = 0;
  std::vector<double> values;

  BoundaryField() = default;
  BoundaryField(Side s, int ncomp, std::size_t n, double fill = 0.0)
      : side(s), components(ncomp), count(n), values(static_cast<std::size_t>(ncomp) * n, fill) {}
  double& at(std::size_t b, int c) { return values[static_cast<std::size_t>(c) * count + b]; }
  double at(std::size_t b, int c) const { return values[static_cast<std::size_t>(c) * count + b]; }
  double max_abs() const;
};

}  // namespace rlab
