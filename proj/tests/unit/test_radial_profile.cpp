#include <algorithm>
#include <cmath>

#include "siwalk/errors.hpp"
#include "siwalk/lyapunov.hpp"
#include "siwalk/quadrature.hpp"
#include "siwalk/radial_profile.hpp"
#include "test_support.hpp"

using namespace siwalk;

namespace {

double g(double r) { return (1.0 - r * r) / std::pow(1.0 + r * r, 2); }

}  // namespace

TEST_CASE("defining properties at d = 3, eps0 = 0.05") {
  const double eps0 = 0.05;
  const RadialProfile p = build_radial_profile(3, eps0);
  const double top = std::sqrt(2.0);
  CHECK(p.radius() == doctest::Approx(top));
  const auto& r = p.knots();
  REQUIRE(r.size() == 4096);
  CHECK(r.front() == 0.0);
  CHECK(r.back() == doctest::Approx(top).epsilon(1e-15));

  // (i)
  for (double x : r) {
    if (x < 2.0 * eps0) {
      CHECK(p.h(x) >= 0.0);
      CHECK(p.h(x) <= g(x) + 1e-15);
    } else {
      CHECK(p.h(x) == doctest::Approx(g(x)).epsilon(1e-14).scale(1.0));
    }
  }
  // (ii)
  CHECK(p.h(0.0) == 0.0);
  for (std::size_t i = 1; i <= 5; ++i) {
    const double parabola = r[i] * r[i] / (4.0 * eps0 * eps0);
    CHECK(std::abs(p.h(r[i]) / parabola - 1.0) <= 0.05);
  }
  // (iii)
  for (double x : r) {
    if (x <= eps0) CHECK(g(x) - p.h(x) > 0.5);
  }
  // (iv): b against an independent integral of h.
  const double b = integrate([&](double x) { return p.h(x); }, 0.0, top, 1e-12);
  CHECK(p.b() == doctest::Approx(b).epsilon(1e-9));
  CHECK(p.b() > 0.0);
  CHECK(p.b() < 1.0);
  // (v)
  const double c = p.b() / (3.0 * std::pow(2.0, 1.5));
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(p.H(r[i]) > c * std::pow(r[i], 3));
  // psi vanishes at the end and decreases.
  CHECK(std::abs(p.psi(top)) <= 1e-14);
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(p.dpsi(r[i]) <= 0.0);
  CHECK(p.psi(0.0) > 0.0);
  CHECK(p.delta0() > 0.0);
}

TEST_CASE("endpoint identity for r^2 psi'") {
  for (std::size_t d = 3; d <= 8; ++d) {
    const RadialProfile p = build_radial_profile(d, 0.05);
    const double top = p.radius();
    CHECK(top * top * p.dpsi(top) == doctest::Approx(-2.0 * p.b() / 3.0).epsilon(1e-8));
    CHECK(p.H(top) == doctest::Approx(p.b()).epsilon(1e-12));
  }
}

TEST_CASE("blend window placement") {
  const double eps0 = 0.05;
  const RadialProfile p = build_radial_profile(3, eps0);
  // r* is where the parabola meets the radial density.
  const double rs = p.blend_end();
  CHECK(rs * rs / (4.0 * eps0 * eps0) == doctest::Approx(g(rs)).epsilon(1e-12));
  CHECK(p.blend_start() == doctest::Approx(rs - eps0 / 4.0));
  CHECK(p.h(p.blend_start() * 0.5) == doctest::Approx(std::pow(p.blend_start() * 0.5, 2) / (4 * eps0 * eps0)));
}

TEST_CASE("property: derivatives match finite differences of the direct integrals") {
  for (double eps0 : {0.05, 0.25}) {
    const RadialProfile p = build_radial_profile(3, eps0);
    const auto& r = p.knots();
    const double step = 1e-5;
    double worst_h = 0.0, worst_psi = 0.0;
    for (std::size_t i = 3; i + 3 < r.size(); i += 7) {
      const double x = r[i];
      const double dh = (p.H_direct(x + step) - p.H_direct(x - step)) / (2.0 * step);
      const double dp = (p.psi_direct(x + step) - p.psi_direct(x - step)) / (2.0 * step);
      worst_h = std::max(worst_h, std::abs(dh - p.h(x)));
      worst_psi = std::max(worst_psi, std::abs(dp - p.dpsi(x)));
    }
    CHECK(worst_h <= 1e-6);
    CHECK(worst_psi <= 1e-6);
  }
}

TEST_CASE("property: table agrees with direct integration off the knots") {
  const RadialProfile p = build_radial_profile(4, 0.05);
  Rng rng(41);
  for (int i = 0; i < 200; ++i) {
    const double x = p.radius() * rng.uniform();
    CHECK(std::abs(p.H(x) - p.H_direct(x)) <= 1e-10);
    CHECK(std::abs(p.psi(x) - p.psi_direct(x)) <= 1e-10);
  }
}

TEST_CASE("property: capital_phi lower bound for d = 3, 4, 5") {
  for (std::size_t d = 3; d <= 5; ++d) {
    const double eps0 = 0.05;
    const RadialProfile p = build_radial_profile(d, eps0);
    const double scale = p.b() * std::pow(static_cast<double>(d - 1), -1.5);
    const double bound = std::min(scale * eps0 * eps0, 0.5);
    CHECK(capital_phi_lower_bound(p) == doctest::Approx(bound));
    double worst = 1e300;
    for (int i = 0; i < 10000; ++i) {
      const double x = std::min(p.radius(), p.radius() * i / 9999.0);
      const double v = capital_phi(x, p);
      CHECK(v == doctest::Approx(g(x) - p.h(x) + scale * x * x).epsilon(1e-12).scale(1.0));
      if (x <= eps0) CHECK(v > 0.5);
      worst = std::min(worst, v);
    }
    CHECK(worst >= bound - 1e-6);
  }
}

TEST_CASE("profile rejects unsuitable input") {
  CHECK_THROWS_AS(build_radial_profile(2, 0.05), InvalidArgument);
  CHECK_THROWS_AS(build_radial_profile(3, 0.0), InvalidArgument);
  CHECK_THROWS_AS(build_radial_profile(3, 0.8), InvalidArgument);
  try {
    build_radial_profile(3, 0.4);
    FAIL("eps0 = 0.4 should violate (iii)");
  } catch (const PropertyViolation& v) {
    CHECK(v.property() == "iii");
  }
  const RadialProfile p = build_radial_profile(3, 0.05);
  CHECK_THROWS_AS(capital_phi(2.0, p), InvalidArgument);
}

TEST_CASE("profiles build for d = 3..8 at both widths used") {
  for (std::size_t d = 3; d <= 8; ++d) {
    for (double eps0 : {0.05, 0.25}) CHECK_NOTHROW(build_radial_profile(d, eps0));
  }
}
