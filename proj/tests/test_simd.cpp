#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "ccg/rng.hpp"
#include "ccg/simd.hpp"

using namespace ccg;

namespace {

std::vector<double> pseudo_data(std::size_t n, double shift) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(0.37 * i + shift) * 1e3 + std::cos(1.7 * i) * 1e-3 + shift;
  return x;
}

std::vector<simd::Isa> variants() {
  std::vector<simd::Isa> v{simd::Isa::scalar};
  for (auto isa : {simd::Isa::avx2, simd::Isa::neon})
    if (simd::available(isa)) v.push_back(isa);
  return v;
}

}  // namespace

TEST_CASE("every compiled variant is bit-identical to the scalar reference") {
  const auto& ref = simd::table(simd::Isa::scalar);
  for (auto isa : variants()) {
    CAPTURE(simd::to_string(isa));
    const auto& k = simd::table(isa);
    for (std::size_t n = 0; n <= 67; ++n) {
      CAPTURE(n);
      auto x = pseudo_data(n, 0.25);
      auto y = pseudo_data(n, -1.5);
      CHECK(k.sum(x.data(), n) == ref.sum(x.data(), n));
      CHECK(k.sum_sq_dev(x.data(), n, 0.75) == ref.sum_sq_dev(x.data(), n, 0.75));
      CHECK(k.sum_cross_dev(x.data(), y.data(), n, 0.1, -0.2) == ref.sum_cross_dev(x.data(), y.data(), n, 0.1, -0.2));
      CHECK(k.sum_sq_diff(x.data(), y.data(), n) == ref.sum_sq_diff(x.data(), y.data(), n));
      CHECK(k.sum_diff(x.data(), y.data(), n) == ref.sum_diff(x.data(), y.data(), n));
      CHECK(k.sum_sq_dev_diff(x.data(), y.data(), n, 3.0) == ref.sum_sq_dev_diff(x.data(), y.data(), n, 3.0));
    }
  }
}

TEST_CASE("kernels agree with an extended-precision oracle") {
  for (std::size_t n : {1u, 5u, 64u, 1001u}) {
    auto x = pseudo_data(n, 0.5);
    auto y = pseudo_data(n, 2.0);
    long double s = 0, ssd = 0, cross = 0, sqd = 0, d = 0, ssdd = 0;
    for (std::size_t i = 0; i < n; ++i) {
      long double xi = x[i], yi = y[i];
      s += xi;
      ssd += (xi - 1.0L) * (xi - 1.0L);
      cross += (xi - 1.0L) * (yi + 2.0L);
      sqd += (xi - yi) * (xi - yi);
      d += xi - yi;
      ssdd += (xi - yi - 0.5L) * (xi - yi - 0.5L);
    }
    const double tol = 1e-12;
    CHECK(simd::sum(x) == doctest::Approx(static_cast<double>(s)).epsilon(tol).scale(1e3));
    CHECK(simd::sum_sq_dev(x, 1.0) == doctest::Approx(static_cast<double>(ssd)).epsilon(tol));
    CHECK(simd::sum_cross_dev(x, y, 1.0, -2.0) == doctest::Approx(static_cast<double>(cross)).epsilon(tol).scale(1e6));
    CHECK(simd::sum_sq_diff(x, y) == doctest::Approx(static_cast<double>(sqd)).epsilon(tol));
    CHECK(simd::sum_diff(x, y) == doctest::Approx(static_cast<double>(d)).epsilon(tol).scale(1e3));
    CHECK(simd::sum_sq_dev_diff(x, y, 0.5) == doctest::Approx(static_cast<double>(ssdd)).epsilon(tol));
  }
}

TEST_CASE("dispatch override") {
  auto x = pseudo_data(37, 0.0);
  const double best = simd::sum(x);
  simd::override_isa(simd::Isa::scalar);
  CHECK(simd::active() == simd::Isa::scalar);
  CHECK(simd::sum(x) == best);
  simd::clear_override();
  CHECK(simd::available(simd::active()));
  CHECK(simd::available(simd::Isa::scalar));
}

TEST_CASE("philox known answers") {
  using rng::philox4x32_10;
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == rng::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        rng::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        rng::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("unit streams are addressable and reproducible") {
  rng::UnitStream a(42, 3, 17), b(42, 3, 17);
  for (int i = 0; i < 10; ++i) CHECK(a.normal() == b.normal());
  rng::UnitStream x(42, 3, 17), other_unit(42, 3, 18), other_group(42, 4, 17), other_seed(43, 3, 17);
  const double u = x.uniform();
  CHECK(u != other_unit.uniform());
  CHECK(u != other_group.uniform());
  CHECK(u != other_seed.uniform());
}

TEST_CASE("uniform and normal moments") {
  const int n = 200000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0, sn4 = 0;
  double umin = 1, umax = 0;
  for (int i = 0; i < n; ++i) {
    rng::UnitStream s(7, 0, static_cast<std::uint32_t>(i));
    double u = s.uniform();
    double z = s.normal();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    su += u;
    su2 += u * u;
    sn += z;
    sn2 += z * z;
    sn4 += z * z * z * z;
  }
  CHECK(umin > 0.0);
  CHECK(umax < 1.0);
  // tolerances are about 5 standard errors
  CHECK(std::abs(su / n - 0.5) < 5 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(su2 / n - 1.0 / 3.0) < 5 * std::sqrt(4.0 / 45.0 / n));
  CHECK(std::abs(sn / n) < 5 / std::sqrt(double(n)));
  CHECK(std::abs(sn2 / n - 1.0) < 5 * std::sqrt(2.0 / n));
  CHECK(std::abs(sn4 / n - 3.0) < 5 * std::sqrt(96.0 / n));
}

TEST_CASE("triangular draws stay in range with the right mean") {
  rng::UnitStream s(11, 1, 1);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double x = s.triangular(0.0, 1.0, 0.3);
    REQUIRE(x >= 0.0);
    REQUIRE(x <= 1.0);
    sum += x;
  }
  // mean (0 + 1 + .3) / 3, sd sqrt((1 + .09 - .3) / 18)
  CHECK(std::abs(sum / n - 1.3 / 3.0) < 5 * std::sqrt(0.79 / 18.0 / n));
}

TEST_CASE("derived seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {0ull, 1ull, 12345ull})
    for (std::uint64_t r = 0; r < 5000; ++r) seen.insert(rng::derive_seed(master, r));
  CHECK(seen.size() == 15000);
  CHECK(rng::derive_seed(5, 9) == rng::derive_seed(5, 9));
}
