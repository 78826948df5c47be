#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <string_view>

namespace krop {

// Seedable stream built on std::mt19937_64, whose output sequence is fixed by
// the C++ standard. Every derived quantity (uniforms, normals, bounded ints)
// uses an explicit method below instead of the implementation-defined
// <random> distributions, so a seed replays identically across toolchains.
//
//   uniform01  : ((x >> 12) + 0.5) * 2^-52, strictly inside (0, 1)
//   normal     : Box-Muller, both variates of a pair consumed in order
//   below(n)   : rejection sampling on the top bits, unbiased
//
// Sub-streams are keyed by a list of integers mixed with SplitMix64, so trial
// (cell, t) always sees the same stream no matter which other trials ran.
class SeededRng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64+splitmix64";

  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  // Independent stream for (master seed, path...).
  static SeededRng substream(std::uint64_t master, std::initializer_list<std::uint64_t> path);
  SeededRng substream(std::initializer_list<std::uint64_t> path) const {
    return substream(seed_, path);
  }

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  std::uint64_t below(std::uint64_t n);
  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Stable 64-bit tag for a string (FNV-1a), used to key sub-streams by name.
std::uint64_t stream_tag(std::string_view name) noexcept;

}  // namespace krop
