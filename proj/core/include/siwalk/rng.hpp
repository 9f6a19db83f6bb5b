#pragma once

#include <cstdint>
#include <random>

namespace siwalk {

/// SplitMix64 finalizer; used for seed derivation only.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of stream `index` under `master`. Depends only on the pair, never on
/// scheduling, so per-trial streams are stable across thread counts.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Deterministic pseudo-random stream. The uniform and normal transforms are
/// written out here instead of using <random> distributions so that draws are
/// identical across standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal by the Box-Muller transform (no cached second value).
  double normal();

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace siwalk
