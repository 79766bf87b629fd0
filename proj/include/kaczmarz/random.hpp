#pragma once

#include <cstdint>

namespace kaczmarz {

/// Counter-based SplitMix64 stream. Output c (0-based) is
/// finalize(seed + (c + 1) * 0x9e3779b97f4a7c15), so any draw can be
/// regenerated from (seed, counter) alone and the sequence is identical on
/// every platform. Standard-library distributions are not used anywhere
/// because their algorithms are implementation-defined.
class counter_rng {
public:
  static constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

  constexpr explicit counter_rng(std::uint64_t seed, std::uint64_t counter = 0) noexcept
      : seed_(seed), counter_(counter) {}

  static constexpr std::uint64_t at(std::uint64_t seed, std::uint64_t counter) noexcept {
    std::uint64_t z = seed + (counter + 1) * golden_gamma;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t next_u64() noexcept { return at(seed_, counter_++); }

  /// Uniform in [0, 1) with 53 random bits.
  constexpr double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound) by floor(u * bound); bound must be > 0.
  constexpr std::uint64_t next_below(std::uint64_t bound) noexcept {
    auto v = static_cast<std::uint64_t>(next_unit() * static_cast<double>(bound));
    return v < bound ? v : bound - 1;
  }

  constexpr std::uint64_t seed() const noexcept { return seed_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace kaczmarz
