#pragma once

// Hot-loop vector kernels for the evolution solver: a scalar reference
// implementation and, on x86-64 hardware with AVX2, a SIMD variant selected
// at run time. The two paths are bitwise-identical by construction: the
// elementwise ops share one per-element expression (FMA contraction is
// disabled build-wide) and the max reductions are exact under any
// association. Sequentially dependent work (powers, tridiagonal solves)
// deliberately stays scalar.

#include <cstddef>

namespace fdlab {

struct KernelOps {
  const char* name;
  // y[i] = a*x[i] + b*y[i]
  void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);
  // x[i] = max(x[i], floor), NaN replaced by floor
  void (*clamp_floor)(double* x, double floor, std::size_t n);
  // max |x[i]|; 0 for an empty span
  double (*max_abs)(const double* x, std::size_t n);
  // max |x[i] - y[i]|; 0 for empty spans
  double (*max_abs_diff)(const double* x, const double* y, std::size_t n);
  // out[i] = lo[i]*x[i-1] + di[i]*x[i] + up[i]*x[i+1] with the one-sided
  // forms at the ends; lo[0] and up[n-1] are never read; n >= 2
  void (*tridiag_apply)(const double* lo, const double* di, const double* up,
                        const double* x, double* out, std::size_t n);
};

const KernelOps& scalar_kernels();

// "scalar" or "avx2"; nullptr when the named variant cannot run here.
const KernelOps* kernels_by_name(const char* name);

// Cached runtime choice: FDLAB_KERNELS=scalar|avx2 overrides, otherwise the
// widest variant this machine supports. A request that cannot be honoured
// falls back to scalar; inspect .name for the active choice.
const KernelOps& active_kernels();

}  // namespace fdlab
