#include <cmath>

#include "fdlab/kernels.hpp"

namespace fdlab {

namespace {

void axpby(double a, const double* x, double b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

// ternary with the accumulator (resp. current value) on the left mirrors the
// unordered-operand behaviour of the SIMD max instruction
void clamp_floor(double* x, double floor, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > floor ? x[i] : floor;
}

double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::fabs(x[i]);
    m = m > a ? m : a;
  }
  return m;
}

double max_abs_diff(const double* x, const double* y, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::fabs(x[i] - y[i]);
    m = m > a ? m : a;
  }
  return m;
}

void tridiag_apply(const double* lo, const double* di, const double* up,
                   const double* x, double* out, std::size_t n) {
  out[0] = di[0] * x[0] + up[0] * x[1];
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = (lo[i] * x[i - 1] + di[i] * x[i]) + up[i] * x[i + 1];
  out[n - 1] = lo[n - 1] * x[n - 2] + di[n - 1] * x[n - 1];
}

}  // namespace

const KernelOps& scalar_kernels() {
  static const KernelOps ops{"scalar",  axpby,        clamp_floor,
                             max_abs,   max_abs_diff, tridiag_apply};
  return ops;
}

}  // namespace fdlab
