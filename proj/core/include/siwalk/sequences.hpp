#pragma once

#include <cstddef>
#include <cstdint>

#include "siwalk/rng.hpp"
#include "siwalk/types.hpp"

namespace siwalk {

/// Radical inverse of `index` in `base` (van der Corput).
double radical_inverse(std::uint64_t index, std::uint32_t base);

/// The n-th prime, n = 0 -> 2.
std::uint32_t nth_prime(std::size_t n);

/// Deterministic low-discrepancy directions on S^{d-1}: Halton points in
/// 2*ceil(d/2) dimensions mapped to Gaussians by Box-Muller pairs, normalized.
class SphereSequence {
 public:
  explicit SphereSequence(std::size_t dim, std::uint64_t offset = 1);

  Vector next();
  std::size_t dim() const noexcept { return dim_; }

 private:
  std::size_t dim_;
  std::uint64_t index_;
};

/// Uniform direction on S^{d-1} from normal draws.
Vector random_direction(std::size_t dim, Rng& rng);

}  // namespace siwalk
