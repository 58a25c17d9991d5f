#include "ricci_lab/metric.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ricci_lab/errors.hpp"

namespace rlab {

SmallMat unpack(const SymTensorField& f, std::size_t node) {
  const int d = f.dim();
  SmallMat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) m(i, j) = m(j, i) = f.get(node, i, j);
  return m;
}

void pack(SymTensorField& f, std::size_t node, const SmallMat& m) {
  const int d = f.dim();
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) f.set(node, i, j, 0.5 * (m(i, j) + m(j, i)));
}

SmallMat spd_inverse(const SmallMat& m, std::size_t node) {
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (!std::isfinite(m.data()[i])) throw SingularMetric(node, "non-finite component");
  Eigen::LLT<SmallMat> llt(m);
  if (llt.info() != Eigen::Success) throw SingularMetric(node, "Cholesky factorization failed");
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (!(llt.matrixLLT()(i, i) > 0.0)) throw SingularMetric(node, "non-positive pivot");
  SmallMat inv = llt.solve(SmallMat::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

MetricField::MetricField(SymTensorField tensor)
    : g_(std::move(tensor)), ginv_(g_.chart(), Rank::Sym2) {
  if (g_.rank() != Rank::Sym2) throw std::invalid_argument("metric must be a symmetric 2-tensor");
  for (std::size_t node = 0; node < g_.nodes(); ++node) pack(ginv_, node, spd_inverse(at(node), node));
}

MetricField MetricField::identity(const Chart& chart) {
  SymTensorField g(chart, Rank::Sym2);
  for (std::size_t node = 0; node < g.nodes(); ++node)
    for (int i = 0; i < chart.dim(); ++i) g.set(node, i, i, 1.0);
  return MetricField(std::move(g));
}

void MetricField::assign(std::size_t node, const SmallMat& m) {
  const SmallMat inv = spd_inverse(m, node);
  pack(g_, node, m);
  pack(ginv_, node, inv);
}

double MetricField::min_eigenvalue() const {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < g_.nodes(); ++node) {
    Eigen::SelfAdjointEigenSolver<SmallMat> es(at(node), Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
  }
  return lo;
}

}  // namespace rlab
