#include "siwalk/sequences.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include "siwalk/errors.hpp"

namespace siwalk {

double radical_inverse(std::uint64_t index, std::uint32_t base) {
  const double inv = 1.0 / base;
  double factor = inv;
  double value = 0.0;
  while (index > 0) {
    value += static_cast<double>(index % base) * factor;
    index /= base;
    factor *= inv;
  }
  return value;
}

std::uint32_t nth_prime(std::size_t n) {
  static std::vector<std::uint32_t> primes{2};
  static std::mutex guard;
  std::lock_guard lock(guard);
  for (std::uint32_t c = primes.back() + 1; primes.size() <= n; ++c) {
    bool prime = true;
    for (std::uint32_t p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes[n];
}

SphereSequence::SphereSequence(std::size_t dim, std::uint64_t offset)
    : dim_(dim), index_(offset) {
  if (dim == 0) throw InvalidArgument("SphereSequence: dimension must be positive");
}

Vector SphereSequence::next() {
  for (;;) {
    const std::uint64_t i = index_++;
    Vector v(static_cast<Eigen::Index>(dim_));
    for (std::size_t pair = 0; 2 * pair < dim_; ++pair) {
      // 1 - u keeps the log finite; u = 0 occurs only at index 0.
      const double u1 = 1.0 - radical_inverse(i, nth_prime(2 * pair));
      const double u2 = radical_inverse(i, nth_prime(2 * pair + 1));
      const double radius = std::sqrt(-2.0 * std::log(u1));
      const double angle = 2.0 * std::numbers::pi * u2;
      v(static_cast<Eigen::Index>(2 * pair)) = radius * std::cos(angle);
      if (2 * pair + 1 < dim_) v(static_cast<Eigen::Index>(2 * pair + 1)) = radius * std::sin(angle);
    }
    const double n = v.norm();
    if (n > 1e-300) return v / n;
  }
}

Vector random_direction(std::size_t dim, Rng& rng) {
  Vector v(static_cast<Eigen::Index>(dim));
  for (;;) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
    const double n = v.norm();
    if (n > 1e-300) return v / n;
  }
}

}  // namespace siwalk
