#pragma once

#include <Eigen/Dense>

#include "ricci_lab/field.hpp"

namespace rlab {

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

/// Unpack the symmetric tensor at one node into a dense matrix.
SmallMat unpack(const SymTensorField& f, std::size_t node);
void pack(SymTensorField& f, std::size_t node, const SmallMat& m);

/// Inverse of a small SPD matrix; throws SingularMetric(node) when Cholesky fails.
SmallMat spd_inverse(const SmallMat& m, std::size_t node);

/// Pointwise positive-definite metric with a cached inverse.
class MetricField {
 public:
  explicit MetricField(SymTensorField tensor);

  /// The Euclidean metric delta on the chart.
  static MetricField identity(const Chart& chart);

  const Chart& chart() const { return g_.chart(); }
  int dim() const { return g_.dim(); }
  const SymTensorField& tensor() const { return g_; }
  const SymTensorField& inverse() const { return ginv_; }

  SmallMat at(std::size_t node) const { return unpack(g_, node); }
  SmallMat inverse_at(std::size_t node) const { return unpack(ginv_, node); }

  double min_eigenvalue() const;

  /// Overwrite one node and refresh its cached inverse (throws SingularMetric).
  void assign(std::size_t node, const SmallMat& m);

 private:
  SymTensorField g_;
  SymTensorField ginv_;
};

}  // namespace rlab
