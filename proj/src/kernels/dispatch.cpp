#include <atomic>
#include <cstdlib>
#include <string>

#include "speechalign/common/error.hpp"
#include "speechalign/kernels/kernels.hpp"

namespace speechalign::kernels {

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* detect() {
  if (const char* env = std::getenv("SPEECHALIGN_KERNELS"); env != nullptr && *env != '\0') {
    const Backend b = parse_backend(env);
    if (!backend_supported(b)) {
      throw ValidationError(std::string("SPEECHALIGN_KERNELS=") + env +
                            " is not supported on this CPU");
    }
    return &table_for(b);
  }
  if (backend_supported(Backend::kAvx2)) return avx2_table();
  if (backend_supported(Backend::kNeon)) return neon_table();
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> s{detect()};
  return s;
}

}  // namespace

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
      return avx2_table() != nullptr && cpu_has_avx2_fma();
    case Backend::kNeon:
      // Advanced SIMD is mandatory on AArch64.
      return neon_table() != nullptr;
  }
  return false;
}

const KernelTable& table_for(Backend b) {
  if (!backend_supported(b)) throw ValidationError("kernel backend not supported");
  switch (b) {
    case Backend::kAvx2:
      return *avx2_table();
    case Backend::kNeon:
      return *neon_table();
    case Backend::kScalar:
      break;
  }
  return scalar_table();
}

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void select_backend(Backend b) { slot().store(&table_for(b), std::memory_order_release); }

Backend parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::kScalar;
  if (name == "avx2") return Backend::kAvx2;
  if (name == "neon") return Backend::kNeon;
  throw ValidationError("unknown kernel backend: " + std::string(name));
}

}  // namespace speechalign::kernels
