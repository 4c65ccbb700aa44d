#include "ccg/simd.hpp"

#if defined(__x86_64__) || defined(__i386__)
#define CCG_HAVE_AVX2_TU 1
#include <immintrin.h>
#else
#define CCG_HAVE_AVX2_TU 0
#endif

namespace ccg::simd::detail {

#if CCG_HAVE_AVX2_TU
namespace {

#define CCG_AVX2 __attribute__((target("avx2")))

CCG_AVX2 inline double fold(__m256d acc) {
  alignas(32) double l[4];
  _mm256_store_pd(l, acc);
  return (l[0] + l[1]) + (l[2] + l[3]);
}

CCG_AVX2 double sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = fold(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

CCG_AVX2 double sum_sq_dev(const double* x, std::size_t n, double c) {
  const __m256d vc = _mm256_set1_pd(c);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vc);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double s = fold(acc);
  for (; i < n; ++i) {
    const double d = x[i] - c;
    s += d * d;
  }
  return s;
}

CCG_AVX2 double sum_cross_dev(const double* x, const double* y, std::size_t n, double a, double b) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), va);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i), vb);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(dx, dy));
  }
  double s = fold(acc);
  for (; i < n; ++i) s += (x[i] - a) * (y[i] - b);
  return s;
}

CCG_AVX2 double sum_sq_diff(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double s = fold(acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

CCG_AVX2 double sum_diff(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  double s = fold(acc);
  for (; i < n; ++i) s += x[i] - y[i];
  return s;
}

CCG_AVX2 double sum_sq_dev_diff(const double* x, const double* y, std::size_t n, double c) {
  const __m256d vc = _mm256_set1_pd(c);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)), vc);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double s = fold(acc);
  for (; i < n; ++i) {
    const double d = (x[i] - y[i]) - c;
    s += d * d;
  }
  return s;
}

#undef CCG_AVX2

const KernelTable avx2_table = {sum, sum_sq_dev, sum_cross_dev, sum_sq_diff, sum_diff, sum_sq_dev_diff};

}  // namespace

const KernelTable* avx2_kernels() { return &avx2_table; }

#else

const KernelTable* avx2_kernels() { return nullptr; }

#endif

}  // namespace ccg::simd::detail
