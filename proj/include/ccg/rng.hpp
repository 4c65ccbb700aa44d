//---------------------------------------------------------------------------//
// Counter-based random streams.
//
// A stream is addressed by (seed, group, unit); the k-th block of the stream
// is Philox4x32-10 applied to the counter (k, unit, group, 0) under a key
// taken from the seed. Draws therefore do not depend on generation order or
// on how units are split across threads.
//---------------------------------------------------------------------------//
#pragma once

#include <array>
#include <cstdint>

namespace ccg::rng {

std::uint64_t splitmix64(std::uint64_t x);

// Derive a child seed, e.g. the seed of replication `index` under a master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

Counter philox4x32_10(Counter ctr, Key key);

class UnitStream {
 public:
  UnitStream(std::uint64_t seed, std::uint32_t group, std::uint32_t unit);

  // Uniform on the open interval (0, 1), 53 bits.
  double uniform();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double triangular(double lo, double hi, double mode);

 private:
  std::uint64_t next64();

  Key key_;
  std::uint32_t group_;
  std::uint32_t unit_;
  std::uint32_t block_ = 0;
  Counter buf_{};
  int used_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ccg::rng
