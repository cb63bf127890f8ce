#include "pelp/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace pelp::kernels {
namespace {

const KernelTable* resolve(Backend b) {
#if defined(PELP_HAVE_AVX2_KERNELS)
  switch (b) {
    case Backend::kScalar:
      return &scalar_table;
    case Backend::kAvx2:
      return &avx2_table;
    case Backend::kAuto:
      break;
  }
  if (const char* env = std::getenv("PELP_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_table;
    if (std::strcmp(env, "avx2") == 0) return &avx2_table;
  }
  if (avx2_available()) return &avx2_table;
#else
  (void)b;
#endif
  return &scalar_table;
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

bool avx2_available() {
#if defined(PELP_HAVE_AVX2_KERNELS) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    t = resolve(Backend::kAuto);
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

void set_kernel_backend(Backend b) {
  g_active.store(resolve(b), std::memory_order_release);
}

}  // namespace pelp::kernels
