#pragma once

#include <cstdint>

namespace rejuv::sim {

/// SplitMix64 finalizer. Pure function, used for keyed deterministic values
/// that must not consume the simulation stream.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// SplitMix64 generator (Steele, Lea & Flood, 2014).
///
/// State transition: `state += 0x9E3779B97F4A7C15`; output: `mix64(state)`.
/// Every call to `next()` or `uniform()` advances the state by exactly one
/// step, so a run is reproducible from its seed on any platform.
class Rng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  explicit constexpr Rng(std::uint64_t seed) noexcept : state_(seed), seed_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += kGamma;
    return mix64(state_);
  }

  /// Uniform integer in [lo, hi] using one draw: lo + floor(x * span / 2^64).
  /// Throws Error(kInvalidRange) when lo > hi.
  std::int64_t uniform(std::int64_t lo, std::int64_t hi);

  /// Independent child stream seeded from one draw of this stream.
  Rng split() noexcept { return Rng(next()); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
  std::uint64_t seed_;
};

}  // namespace rejuv::sim
