#include "mvhvi/simd/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace mvhvi::simd {

#ifdef MVHVI_HAVE_AVX2_TU
const KernelTable& avx2_kernels();
#endif

namespace {

const KernelTable* select() {
  const char* force = std::getenv("MVHVI_FORCE_SCALAR");
  if (force != nullptr && std::strcmp(force, "0") != 0) {
    return &scalar_kernels();
  }
#ifdef MVHVI_HAVE_AVX2_TU
  if (__builtin_cpu_supports("avx2")) {
    return &avx2_kernels();
  }
#endif
  return &scalar_kernels();
}

} // namespace

const KernelTable& active_kernels() {
  static const KernelTable* table = select();
  return *table;
}

bool avx2_selected() { return std::strcmp(active_kernels().name, "avx2") == 0; }

} // namespace mvhvi::simd
