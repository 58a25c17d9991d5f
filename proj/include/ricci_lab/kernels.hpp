#pragma once

#include <cstddef>
#include <string>

// Data-parallel inner loops for stencils and explicit updates. Every kernel exists as a
// scalar reference and, on x86-64, an AVX2 variant chosen at runtime. Variants perform the
// same operations in the same order (no FMA contraction), so results are bit-identical.

namespace rlab::kernels {

enum class Isa { Scalar, Avx2 };

std::string to_string(Isa isa);

struct KernelTable {
  Isa isa;
  /// out[k] = (plus[k] - minus[k]) * scale
  void (*diff1)(const double* plus, const double* minus, double* out, std::size_t n, double scale);
  /// out[k] = ((plus[k] + minus[k]) - (center[k] + center[k])) * scale
  void (*diff2)(const double* plus, const double* center, const double* minus, double* out,
                std::size_t n, double scale);
  /// out[k] = x[k] + a * y[k]
  void (*axpy)(const double* x, const double* y, double* out, std::size_t n, double a);
  /// out[k] = x[k] + half_dt * (k0[k] + k1[k])
  void (*heun)(const double* x, const double* k0, const double* k1, double* out, std::size_t n,
               double half_dt);
};

const KernelTable& scalar_table();
/// nullptr when the AVX2 variant is not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_table();

/// Kernels used by the library. Defaults to the widest supported ISA; the environment
/// variable RLAB_SIMD=scalar forces the reference path.
const KernelTable& active();
void select(Isa isa);

}  // namespace rlab::kernels
