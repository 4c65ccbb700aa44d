#pragma once
// Reduction kernels shared by the profile, estimator and time-homogeneity code.
//
// Every kernel accumulates into four interleaved lanes (element i goes to lane
// i % 4), folds the lanes as (l0 + l1) + (l2 + l3) and then adds the tail
// sequentially. The scalar reference follows the same order as the vector
// variants, so all variants return bit-identical results.

#include <cstddef>
#include <span>
#include <string_view>

namespace ccg::simd {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa);

struct KernelTable {
  // sum x_i
  double (*sum)(const double* x, std::size_t n);
  // sum (x_i - c)^2
  double (*sum_sq_dev)(const double* x, std::size_t n, double c);
  // sum (x_i - a)(y_i - b)
  double (*sum_cross_dev)(const double* x, const double* y, std::size_t n, double a, double b);
  // sum (x_i - y_i)^2
  double (*sum_sq_diff)(const double* x, const double* y, std::size_t n);
  // sum (x_i - y_i)
  double (*sum_diff)(const double* x, const double* y, std::size_t n);
  // sum ((x_i - y_i) - c)^2
  double (*sum_sq_dev_diff)(const double* x, const double* y, std::size_t n, double c);
};

bool available(Isa isa);
const KernelTable& table(Isa isa);

// Best variant supported by the running CPU, unless overridden.
Isa active();
void override_isa(Isa isa);
void clear_override();

double sum(std::span<const double> x);
double sum_sq_dev(std::span<const double> x, double c);
double sum_cross_dev(std::span<const double> x, std::span<const double> y, double a, double b);
double sum_sq_diff(std::span<const double> x, std::span<const double> y);
double sum_diff(std::span<const double> x, std::span<const double> y);
double sum_sq_dev_diff(std::span<const double> x, std::span<const double> y, double c);

namespace detail {
// nullptr when the variant is not compiled for this architecture
const KernelTable* scalar_kernels();
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();
}  // namespace detail

}  // namespace ccg::simd
