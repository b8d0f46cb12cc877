#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "ekms/simd/kernels.hpp"

namespace ekms::simd {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void matvec_avx2(const double* A, const double* x, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(A + r * cols, x, cols);
}

double weighted_dot3_avx2(const double* w, const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d wa = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
    acc = _mm256_fmadd_pd(wa, _mm256_loadu_pd(b + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * a[i] * b[i];
  return s;
}

double damped_update_avx2(double* x, const double* target, double lambda, std::size_t n) {
  const __m256d lam = _mm256_set1_pd(lambda);
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d res = _mm256_setzero_pd();
  __m256d nan_seen = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(target + i), xv);
    __m256d ad = _mm256_andnot_pd(sign, d);
    nan_seen = _mm256_or_pd(nan_seen, _mm256_cmp_pd(d, d, _CMP_UNORD_Q));
    res = _mm256_max_pd(res, ad);
    _mm256_storeu_pd(x + i, _mm256_fmadd_pd(lam, d, xv));
  }
  alignas(32) double r[4];
  _mm256_store_pd(r, res);
  double out = std::max(std::max(r[0], r[1]), std::max(r[2], r[3]));
  if (_mm256_movemask_pd(nan_seen)) out = std::nan("");
  for (; i < n; ++i) {
    double d = target[i] - x[i];
    if (std::isnan(d)) out = d;
    else if (!std::isnan(out)) out = std::max(out, std::abs(d));
    x[i] += lambda * d;
  }
  return out;
}

}  // namespace

const Kernels& avx2_kernels() {
  static const Kernels k{dot_avx2, matvec_avx2, weighted_dot3_avx2, damped_update_avx2};
  return k;
}

}  // namespace ekms::simd
