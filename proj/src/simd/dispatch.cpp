#include <atomic>

#include "ccg/simd.hpp"

namespace ccg::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() {
  if (detail::avx2_kernels() && cpu_has_avx2()) return Isa::avx2;
  if (detail::neon_kernels()) return Isa::neon;
  return Isa::scalar;
}

Isa detected() {
  static const Isa isa = detect();
  return isa;
}

// -1 means "no override"
std::atomic<int> g_override{-1};

const KernelTable& current() {
  const int o = g_override.load(std::memory_order_relaxed);
  return table(o < 0 ? detected() : static_cast<Isa>(o));
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool available(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return detail::avx2_kernels() != nullptr && cpu_has_avx2();
    case Isa::neon: return detail::neon_kernels() != nullptr;
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!available(isa)) return *detail::scalar_kernels();
  switch (isa) {
    case Isa::avx2: return *detail::avx2_kernels();
    case Isa::neon: return *detail::neon_kernels();
    default: return *detail::scalar_kernels();
  }
}

Isa active() {
  const int o = g_override.load(std::memory_order_relaxed);
  if (o >= 0 && available(static_cast<Isa>(o))) return static_cast<Isa>(o);
  return detected();
}

void override_isa(Isa isa) { g_override.store(static_cast<int>(isa), std::memory_order_relaxed); }
void clear_override() { g_override.store(-1, std::memory_order_relaxed); }

double sum(std::span<const double> x) { return current().sum(x.data(), x.size()); }

double sum_sq_dev(std::span<const double> x, double c) { return current().sum_sq_dev(x.data(), x.size(), c); }

double sum_cross_dev(std::span<const double> x, std::span<const double> y, double a, double b) {
  return current().sum_cross_dev(x.data(), y.data(), x.size(), a, b);
}

double sum_sq_diff(std::span<const double> x, std::span<const double> y) {
  return current().sum_sq_diff(x.data(), y.data(), x.size());
}

double sum_diff(std::span<const double> x, std::span<const double> y) {
  return current().sum_diff(x.data(), y.data(), x.size());
}

double sum_sq_dev_diff(std::span<const double> x, std::span<const double> y, double c) {
  return current().sum_sq_dev_diff(x.data(), y.data(), x.size(), c);
}

}  // namespace ccg::simd
