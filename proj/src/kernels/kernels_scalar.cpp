#include "speechalign/kernels/kernels.hpp"

namespace speechalign::kernels {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

constexpr KernelTable kScalar{Backend::kScalar, "scalar", &dot_scalar, &axpy_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace speechalign::kernels
