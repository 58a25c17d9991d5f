#include "ricci_lab/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__)
#include <immintrin.h>

namespace rlab::kernels {
namespace {

void diff1(const double* plus, const double* minus, double* out, std::size_t n, double scale) {
  const __m256d s = _mm256_set1_pd(scale);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(plus + k), _mm256_loadu_pd(minus + k));
    _mm256_storeu_pd(out + k, _mm256_mul_pd(d, s));
  }
  for (; k < n; ++k) out[k] = (plus[k] - minus[k]) * scale;
}

void diff2(const double* plus, const double* center, const double* minus, double* out,
           std::size_t n, double scale) {
  const __m256d s = _mm256_set1_pd(scale);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d c = _mm256_loadu_pd(center + k);
    const __m256d pm = _mm256_add_pd(_mm256_loadu_pd(plus + k), _mm256_loadu_pd(minus + k));
    _mm256_storeu_pd(out + k, _mm256_mul_pd(_mm256_sub_pd(pm, _mm256_add_pd(c, c)), s));
  }
  for (; k < n; ++k) out[k] = ((plus[k] + minus[k]) - (center[k] + center[k])) * scale;
}

void axpy(const double* x, const double* y, double* out, std::size_t n, double a) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4)
    _mm256_storeu_pd(out + k, _mm256_add_pd(_mm256_loadu_pd(x + k),
                                            _mm256_mul_pd(av, _mm256_loadu_pd(y + k))));
  for (; k < n; ++k) out[k] = x[k] + a * y[k];
}

void heun(const double* x, const double* k0, const double* k1, double* out, std::size_t n,
          double half_dt) {
  const __m256d hv = _mm256_set1_pd(half_dt);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d sum = _mm256_add_pd(_mm256_loadu_pd(k0 + k), _mm256_loadu_pd(k1 + k));
    _mm256_storeu_pd(out + k, _mm256_add_pd(_mm256_loadu_pd(x + k), _mm256_mul_pd(hv, sum)));
  }
  for (; k < n; ++k) out[k] = x[k] + half_dt * (k0[k] + k1[k]);
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{Isa::Avx2, diff1, diff2, axpy, heun};
  return __builtin_cpu_supports("avx2") ? &table : nullptr;
}

}  // namespace rlab::kernels

#else

namespace rlab::kernels {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace rlab::kernels

#endif
