#include "ricci_lab/kernels.hpp"

namespace rlab::kernels {
namespace {

void diff1(const double* plus, const double* minus, double* out, std::size_t n, double scale) {
  for (std::size_t k = 0; k < n; ++k) out[k] = (plus[k] - minus[k]) * scale;
}

void diff2(const double* plus, const double* center, const double* minus, double* out,
           std::size_t n, double scale) {
  for (std::size_t k = 0; k < n; ++k) out[k] = ((plus[k] + minus[k]) - (center[k] + center[k])) * scale;
}

void axpy(const double* x, const double* y, double* out, std::size_t n, double a) {
  for (std::size_t k = 0; k < n; ++k) out[k] = x[k] + a * y[k];
}

void heun(const double* x, const double* k0, const double* k1, double* out, std::size_t n,
          double half_dt) {
  for (std::size_t k = 0; k < n; ++k) out[k] = x[k] + half_dt * (k0[k] + k1[k]);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::Scalar, diff1, diff2, axpy, heun};
  return table;
}

}  // namespace rlab::kernels
