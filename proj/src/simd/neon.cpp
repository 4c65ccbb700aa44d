#include "ccg/simd.hpp"

#if defined(__aarch64__)
#define CCG_HAVE_NEON_TU 1
#include <arm_neon.h>
#else
#define CCG_HAVE_NEON_TU 0
#endif

namespace ccg::simd::detail {

#if CCG_HAVE_NEON_TU
namespace {

// Two float64x2 registers hold lanes {0,1} and {2,3}.
inline double fold(float64x2_t lo, float64x2_t hi) {
  return (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) + (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
}

double sum(const double* x, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vld1q_f64(x + i));
    hi = vaddq_f64(hi, vld1q_f64(x + i + 2));
  }
  double s = fold(lo, hi);
  for (; i < n; ++i) s += x[i];
  return s;
}

double sum_sq_dev(const double* x, std::size_t n, double c) {
  const float64x2_t vc = vdupq_n_f64(c);
  float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d0 = vsubq_f64(vld1q_f64(x + i), vc);
    const float64x2_t d1 = vsubq_f64(vld1q_f64(x + i + 2), vc);
    lo = vaddq_f64(lo, vmulq_f64(d0, d0));
    hi = vaddq_f64(hi, vmulq_f64(d1, d1));
  }
  double s = fold(lo, hi);
  for (; i < n; ++i) {
    const double d = x[i] - c;
    s += d * d;
  }
  return s;
}

double sum_cross_dev(const double* x, const double* y, std::size_t n, double a, double b) {
  const float64x2_t va = vdupq_n_f64(a), vb = vdupq_n_f64(b);
  float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vmulq_f64(vsubq_f64(vld1q_f64(x + i), va), vsubq_f64(vld1q_f64(y + i), vb)));
    hi = vaddq_f64(hi, vmulq_f64(vsubq_f64(vld1q_f64(x + i + 2), va), vsubq_f64(vld1q_f64(y + i + 2), vb)));
  }
  double s = fold(lo, hi);
  for (; i < n; ++i) s += (x[i] - a) * (y[i] - b);
  return s;
}

double sum_sq_diff(const double* x, const double* y, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d0 = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    const float64x2_t d1 = vsubq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    lo = vaddq_f64(lo, vmulq_f64(d0, d0));
    hi = vaddq_f64(hi, vmulq_f64(d1, d1));
  }
  double s = fold(lo, hi);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

double sum_diff(const double* x, const double* y, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    hi = vaddq_f64(hi, vsubq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
  }
  double s = fold(lo, hi);
  for (; i < n; ++i) s += x[i] - y[i];
  return s;
}

double sum_sq_dev_diff(const double* x, const double* y, std::size_t n, double c) {
  const float64x2_t vc = vdupq_n_f64(c);
  float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d0 = vsubq_f64(vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i)), vc);
    const float64x2_t d1 = vsubq_f64(vsubq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)), vc);
    lo = vaddq_f64(lo, vmulq_f64(d0, d0));
    hi = vaddq_f64(hi, vmulq_f64(d1, d1));
  }
  double s = fold(lo, hi);
  for (; i < n; ++i) {
    const double d = (x[i] - y[i]) - c;
    s += d * d;
  }
  return s;
}

const KernelTable neon_table = {sum, sum_sq_dev, sum_cross_dev, sum_sq_diff, sum_diff, sum_sq_dev_diff};

}  // namespace

const KernelTable* neon_kernels() { return &neon_table; }

#else

const KernelTable* neon_kernels() { return nullptr; }

#endif

}  // namespace ccg::simd::detail
