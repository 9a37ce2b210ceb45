// AVX2 variants. Built with -mavx2 only (no FMA), so the elementwise kernels
// execute the same IEEE mul/add per element as the scalar reference; only the
// reductions reassociate. Callers must have checked CPU support.

#include "ynkit/kernels.hpp"

#if defined(YNK_HAVE_AVX2)

#include <immintrin.h>

namespace ynk::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

}  // namespace

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                             _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4),
                                             _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                             _mm256_loadu_pd(b + i)));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void matvec_avx2(const double* a, const double* x, const double* bias,
                 double* y, std::size_t rows, std::size_t cols) {
  std::size_t r = 0;
  // Four rows at a time so each load of x feeds four accumulators.
  for (; r + 4 <= rows; r += 4) {
    const double* r0 = a + (r + 0) * cols;
    const double* r1 = a + (r + 1) * cols;
    const double* r2 = a + (r + 2) * cols;
    const double* r3 = a + (r + 3) * cols;
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd();
    __m256d a3 = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d xv = _mm256_loadu_pd(x + c);
      a0 = _mm256_add_pd(a0, _mm256_mul_pd(_mm256_loadu_pd(r0 + c), xv));
      a1 = _mm256_add_pd(a1, _mm256_mul_pd(_mm256_loadu_pd(r1 + c), xv));
      a2 = _mm256_add_pd(a2, _mm256_mul_pd(_mm256_loadu_pd(r2 + c), xv));
      a3 = _mm256_add_pd(a3, _mm256_mul_pd(_mm256_loadu_pd(r3 + c), xv));
    }
    double s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
    for (; c < cols; ++c) {
      s0 += r0[c] * x[c];
      s1 += r1[c] * x[c];
      s2 += r2[c] * x[c];
      s3 += r3[c] * x[c];
    }
    y[r + 0] = s0 + (bias ? bias[r + 0] : 0.0);
    y[r + 1] = s1 + (bias ? bias[r + 1] : 0.0);
    y[r + 2] = s2 + (bias ? bias[r + 2] : 0.0);
    y[r + 3] = s3 + (bias ? bias[r + 3] : 0.0);
  }
  for (; r < rows; ++r) {
    const double s = dot_avx2(a + r * cols, x, cols);
    y[r] = s + (bias ? bias[r] : 0.0);
  }
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yv = _mm256_loadu_pd(y + i);
    const __m256d xv = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(yv, _mm256_mul_pd(av, xv)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(double* x, double alpha, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), av));
  for (; i < n; ++i) x[i] *= alpha;
}

void add_outer_avx2(double* a, const double* u, const double* v, double alpha,
                    std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double s = alpha * u[r];
    axpy_avx2(s, v, a + r * cols, cols);
  }
}

}  // namespace ynk::kernels::detail

#endif  // YNK_HAVE_AVX2
