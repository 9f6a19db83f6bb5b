#include <cmath>
#include <numbers>
#include <set>

#include "siwalk/parallel.hpp"
#include "siwalk/quadrature.hpp"
#include "siwalk/radial_profile.hpp"
#include "siwalk/rng.hpp"
#include "siwalk/sequences.hpp"
#include "test_support.hpp"

using namespace siwalk;

TEST_CASE("adaptive Simpson on closed-form integrals") {
  CHECK(integrate([](double x) { return x * x * x; }, 0.0, 2.0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(integrate([](double x) { return std::exp(x); }, -1.0, 1.0) ==
        doctest::Approx(std::exp(1.0) - std::exp(-1.0)).epsilon(1e-10));
  // Endpoint singularity of the derivative.
  CHECK(integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-12) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(integrate([](double x) { return x; }, 1.0, 1.0) == 0.0);
  CHECK(integrate([](double x) { return x; }, 1.0, 0.0) == doctest::Approx(-0.5));
}

TEST_CASE("radial density integral identity") {
  for (std::size_t d = 3; d <= 8; ++d) {
    const double top = std::sqrt(static_cast<double>(d - 1));
    const double q = integrate(radial_density, 0.0, top);
    CHECK(std::abs(q - top / static_cast<double>(d)) <= 1e-8);
    // Antiderivative r / (1 + r^2) as an independent oracle.
    CHECK(std::abs(q - top / (1.0 + top * top)) <= 1e-10);
  }
}

TEST_CASE("interval cap is honoured") {
  const auto r = adaptive_simpson([](double x) { return std::sin(1.0 / (x + 1e-3)); }, 0.0, 1.0, 1e-15, 64);
  CHECK(r.intervals <= 64);
  CHECK(std::isfinite(r.value));
}

TEST_CASE("rng seeding") {
  Rng a(1), b(1), c(2);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a(), y = b(), z = c();
    CHECK(x == y);
    differs = differs || x != z;
  }
  CHECK(differs);

  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(derive_seed(42, i));
  CHECK(seeds.size() == 1000);
  CHECK(derive_seed(1, 0) != derive_seed(0, 1));

  Rng u(3);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = u.uniform();
    CHECK_MESSAGE((x >= 0.0 && x < 1.0), x);
    sum += x;
  }
  // Mean 1/2, sd sqrt(1/12 / 1e5) ~ 9.1e-4; 4 sigma.
  CHECK(std::abs(sum / 100000 - 0.5) < 3.7e-3);

  for (std::uint64_t n : {1ULL, 2ULL, 3ULL, 7ULL, 1000ULL}) {
    for (int i = 0; i < 1000; ++i) CHECK(u.below(n) < n);
  }
}

TEST_CASE("low-discrepancy sequences") {
  CHECK(radical_inverse(1, 2) == 0.5);
  CHECK(radical_inverse(2, 2) == 0.25);
  CHECK(radical_inverse(3, 2) == 0.75);
  CHECK(radical_inverse(1, 3) == doctest::Approx(1.0 / 3.0));
  CHECK(radical_inverse(5, 3) == doctest::Approx(7.0 / 9.0));  // 12 in base 3 -> 0.21
  CHECK(nth_prime(0) == 2);
  CHECK(nth_prime(4) == 11);
  CHECK(nth_prime(99) == 541);

  SphereSequence seq(5);
  Vector mean = Vector::Zero(5);
  for (int i = 0; i < 20000; ++i) {
    const Vector v = seq.next();
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
    mean += v;
  }
  CHECK((mean / 20000.0).norm() < 0.02);

  Rng rng(4);
  for (int i = 0; i < 100; ++i) CHECK(random_direction(3, rng).norm() == doctest::Approx(1.0));
}

TEST_CASE("pairwise sum and parallel_for") {
  std::vector<double> xs(1000);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = 1.0 / static_cast<double>(i + 1);
  double naive = 0.0;
  for (double x : xs) naive += x;
  CHECK(pairwise_sum(xs) == doctest::Approx(naive).epsilon(1e-13));

  std::vector<int> hit(10000, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) CHECK(h == 1);
}
