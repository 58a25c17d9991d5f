#include "ricci_lab/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rlab {

int component_count(Rank rank, int dim) {
  switch (rank) {
    case Rank::Scalar:
      return 1;
    case Rank::Vector:
    case Rank::OneForm:
      return dim;
    case Rank::Sym2:
      return sym_size(dim);
  }
  return 0;
}

SymTensorField::SymTensorField(const Chart& chart, Rank rank, double fill)
    : chart_(chart),
      rank_(rank),
      ncomp_(component_count(rank, chart.dim())),
      values_(static_cast<std::size_t>(ncomp_) * chart.node_count(), fill) {}

Parity SymTensorField::parity(int c) const {
  switch (rank_) {
    case Rank::Scalar:
      return scalar_parity_;
    case Rank::Vector:
    case Rank::OneForm:
      return c == 0 ? Parity::Odd : Parity::Even;
    case Rank::Sym2: {
      const int d = dim();
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
          if (sym_index(i, j, d) == c) return ((i == 0) + (j == 0)) % 2 ? Parity::Odd : Parity::Even;
      break;
    }
  }
  throw std::out_of_range("component index out of range");
}

bool SymTensorField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double SymTensorField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

static void check_compatible(const SymTensorField& a, const SymTensorField& b) {
  if (a.chart() != b.chart() || a.rank() != b.rank())
    throw std::invalid_argument("field shape mismatch");
}

SymTensorField& SymTensorField::operator+=(const SymTensorField& other) {
  check_compatible(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

SymTensorField& SymTensorField::operator-=(const SymTensorField& other) {
  check_compatible(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

SymTensorField& SymTensorField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

SymTensorField operator+(SymTensorField a, const SymTensorField& b) { return a += b; }
SymTensorField operator-(SymTensorField a, const SymTensorField& b) { return a -= b; }
SymTensorField operator*(double s, SymTensorField a) { return a *= s; }

double BoundaryField::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace rlab
