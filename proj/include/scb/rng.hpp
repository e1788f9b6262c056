#pragma once

#include <cstdint>
#include <string_view>

namespace scb {

/// splitmix64 finaliser. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Sub-seed for a named component: mix64(seed ^ mix64(fnv1a64(name) + index)).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view name,
                                    std::uint64_t index = 0) noexcept {
  return mix64(seed ^ mix64(fnv1a64(name) + index));
}

/// Counter-based stream: draw k of stream (key, index) is a pure function of
/// (key, index, k), so any element can be produced without its predecessors.
class CounterStream {
 public:
  CounterStream(std::uint64_t key, std::uint64_t index) noexcept
      : base_(mix64(key ^ mix64(index ^ 0x5851f42d4c957f2dULL))) {}

  std::uint64_t next() noexcept { return mix64(base_ + 0x632be59bd9b4e019ULL * ++counter_); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound), bound > 0 (multiply-high reduction).
  std::uint64_t below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace scb
