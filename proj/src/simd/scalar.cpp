#include "ccg/simd.hpp"

namespace ccg::simd::detail {
namespace {

inline double fold(const double (&l)[4]) { return (l[0] + l[1]) + (l[2] + l[3]); }

double sum(const double* x, std::size_t n) {
  double l[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int k = 0; k < 4; ++k) l[k] += x[i + k];
  double s = fold(l);
  for (; i < n; ++i) s += x[i];
  return s;
}

double sum_sq_dev(const double* x, std::size_t n, double c) {
  double l[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int k = 0; k < 4; ++k) {
      const double d = x[i + k] - c;
      l[k] += d * d;
    }
  double s = fold(l);
  for (; i < n; ++i) {
    const double d = x[i] - c;
    s += d * d;
  }
  return s;
}

double sum_cross_dev(const double* x, const double* y, std::size_t n, double a, double b) {
  double l[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int k = 0; k < 4; ++k) l[k] += (x[i + k] - a) * (y[i + k] - b);
  double s = fold(l);
  for (; i < n; ++i) s += (x[i] - a) * (y[i] - b);
  return s;
}

double sum_sq_diff(const double* x, const double* y, std::size_t n) {
  double l[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int k = 0; k < 4; ++k) {
      const double d = x[i + k] - y[i + k];
      l[k] += d * d;
    }
  double s = fold(l);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

double sum_diff(const double* x, const double* y, std::size_t n) {
  double l[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int k = 0; k < 4; ++k) l[k] += x[i + k] - y[i + k];
  double s = fold(l);
  for (; i < n; ++i) s += x[i] - y[i];
  return s;
}

double sum_sq_dev_diff(const double* x, const double* y, std::size_t n, double c) {
  double l[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int k = 0; k < 4; ++k) {
      const double d = (x[i + k] - y[i + k]) - c;
      l[k] += d * d;
    }
  double s = fold(l);
  for (; i < n; ++i) {
    const double d = (x[i] - y[i]) - c;
    s += d * d;
  }
  return s;
}

const KernelTable scalar_table = {sum, sum_sq_dev, sum_cross_dev, sum_sq_diff, sum_diff, sum_sq_dev_diff};

}  // namespace

const KernelTable* scalar_kernels() { return &scalar_table; }

}  // namespace ccg::simd::detail
