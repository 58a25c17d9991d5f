#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "ricci_lab/kernels.hpp"

namespace rlab::kernels {
namespace {

const KernelTable* pick_default() {
  const char* env = std::getenv("RLAB_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return &scalar_table();
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{pick_default()};
  return table;
}

}  // namespace

std::string to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void select(Isa isa) {
  if (isa == Isa::Scalar) {
    current().store(&scalar_table(), std::memory_order_release);
    return;
  }
  const KernelTable* t = avx2_table();
  if (t == nullptr) throw std::runtime_error("AVX2 kernels unavailable on this machine");
  current().store(t, std::memory_order_release);
}

}  // namespace rlab::kernels
