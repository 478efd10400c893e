// AVX2 variants of the hot-loop kernels. Every arithmetic step mirrors the
// scalar reference expression one-to-one (mul/mul/add, no FMA), so results
// match the scalar path bitwise; the max reductions are exact selections and
// order-independent. Tails run the scalar expression.

#include <cmath>
#include <cstddef>
#include <immintrin.h>

#include "fdlab/kernels.hpp"

namespace fdlab {

namespace {

inline __m256d abs_pd(__m256d v) {
  const __m256d mask =
      _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  return _mm256_and_pd(mask, v);
}

inline double hmax_pd(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m2 = _mm_max_pd(lo, hi);
  const __m128d m1 = _mm_max_sd(m2, _mm_unpackhi_pd(m2, m2));
  return _mm_cvtsd_f64(m1);
}

void axpby(double a, const double* x, double b, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(
        y + i, _mm256_add_pd(_mm256_mul_pd(va, vx), _mm256_mul_pd(vb, vy)));
  }
  for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void clamp_floor(double* x, double floor, std::size_t n) {
  const __m256d vf = _mm256_set1_pd(floor);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_max_pd(_mm256_loadu_pd(x + i), vf));
  for (; i < n; ++i) x[i] = x[i] > floor ? x[i] : floor;
}

double max_abs(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_max_pd(acc, abs_pd(_mm256_loadu_pd(x + i)));
  double m = hmax_pd(acc);
  for (; i < n; ++i) {
    const double a = std::fabs(x[i]);
    m = m > a ? m : a;
  }
  return m;
}

double max_abs_diff(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_max_pd(acc, abs_pd(d));
  }
  double m = hmax_pd(acc);
  for (; i < n; ++i) {
    const double a = std::fabs(x[i] - y[i]);
    m = m > a ? m : a;
  }
  return m;
}

void tridiag_apply(const double* lo, const double* di, const double* up,
                   const double* x, double* out, std::size_t n) {
  out[0] = di[0] * x[0] + up[0] * x[1];
  std::size_t i = 1;
  for (; i + 5 <= n; i += 4) {
    const __m256d vm = _mm256_loadu_pd(x + i - 1);
    const __m256d v0 = _mm256_loadu_pd(x + i);
    const __m256d vp = _mm256_loadu_pd(x + i + 1);
    const __m256d a = _mm256_mul_pd(_mm256_loadu_pd(lo + i), vm);
    const __m256d b = _mm256_mul_pd(_mm256_loadu_pd(di + i), v0);
    const __m256d c = _mm256_mul_pd(_mm256_loadu_pd(up + i), vp);
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_add_pd(a, b), c));
  }
  for (; i + 1 < n; ++i)
    out[i] = (lo[i] * x[i - 1] + di[i] * x[i]) + up[i] * x[i + 1];
  out[n - 1] = lo[n - 1] * x[n - 2] + di[n - 1] * x[n - 1];
}

}  // namespace

namespace detail {

const KernelOps* avx2_kernels() {
  static const KernelOps ops{"avx2",   axpby,        clamp_floor,
                             max_abs,  max_abs_diff, tridiag_apply};
  return &ops;
}

}  // namespace detail

}  // namespace fdlab
