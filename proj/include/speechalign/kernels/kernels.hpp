#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Inner-loop arithmetic for the transformer forward and backward passes.
//
// Every kernel has a scalar reference implementation plus SIMD variants
// (AVX2+FMA on x86-64, NEON on AArch64). The active variant is chosen once at
// first use from the CPU's capabilities; SPEECHALIGN_KERNELS=scalar|avx2|neon
// overrides the choice. SIMD results differ from scalar only by summation
// order and fused rounding, which the equivalence tests bound.
namespace speechalign::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

struct KernelTable {
  Backend backend;
  const char* name;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the variant was not compiled in.
const KernelTable* avx2_table();
const KernelTable* neon_table();

bool backend_supported(Backend b);
const KernelTable& table_for(Backend b);

// Table used by the model code. Thread-safe.
const KernelTable& active();
// Throws ValidationError if the backend is not supported on this CPU.
void select_backend(Backend b);
Backend parse_backend(std::string_view name);

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}

}  // namespace speechalign::kernels
