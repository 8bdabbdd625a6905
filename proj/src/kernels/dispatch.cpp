#include <cstdlib>
#include <string_view>

#include "sinn/kernels.hpp"

namespace sinn::simd {

#if defined(SINN_HAVE_AVX2)
const KernelTable& avx2_kernel_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(SINN_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& kernels() {
  static const KernelTable& active = []() -> const KernelTable& {
    const char* force = std::getenv("SINN_FORCE_SCALAR");
    if (force != nullptr && std::string_view(force) != "0") return scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return *t;
    return scalar_kernels();
  }();
  return active;
}

}  // namespace sinn::simd
