#include "siwalk/radial_profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "siwalk/errors.hpp"
#include "siwalk/quadrature.hpp"

namespace siwalk {

namespace {

constexpr double kQuadTol = 1e-10;
// Per knot interval; the tabulation sums thousands of these.
constexpr double kPanelTol = 1e-14;

double parabola(double r, double eps0) { return r * r / (4.0 * eps0 * eps0); }

/// Antiderivative of radial_density.
double density_primitive(double r) { return r / (1.0 + r * r); }

/// Antiderivative of 1 / (v (1 + v^2)).
double log_primitive(double v) { return std::log(v) - 0.5 * std::log1p(v * v); }

/// Crossing of the parabola with radial_density on (0, 1), by bisection.
double crossing(double eps0) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
    const double mid = 0.5 * (lo + hi);
    (parabola(mid, eps0) < radial_density(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::string describe(const char* what, double r, double value) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "radial profile: " << what << " at r = " << r << " (value " << value << ")";
  return msg.str();
}

}  // namespace

double radial_density(double r) {
  const double s = 1.0 + r * r;
  return (1.0 - r * r) / (s * s);
}

double RadialProfile::h(double r) const {
  if (r <= blend_start_) return parabola(r, eps0_);
  if (r >= blend_end_) return radial_density(r);
  const double t = (r - blend_start_) / (blend_end_ - blend_start_);
  const double sigma = t * t * (3.0 - 2.0 * t);
  return (1.0 - sigma) * parabola(r, eps0_) + sigma * radial_density(r);
}

double RadialProfile::H_direct(double r) const {
  if (r <= blend_start_) return r * r * r / (12.0 * eps0_ * eps0_);
  const double at_start = blend_start_ * blend_start_ * blend_start_ / (12.0 * eps0_ * eps0_);
  auto hf = [this](double v) { return h(v); };
  if (r <= blend_end_) return at_start + integrate(hf, blend_start_, r, kQuadTol);
  const double at_end = at_start + integrate(hf, blend_start_, blend_end_, kQuadTol);
  return at_end + density_primitive(r) - density_primitive(blend_end_);
}

double RadialProfile::psi_direct(double r) const {
  if (r < 0.0 || r > radius_) throw InvalidArgument("psi_direct: r out of range");
  const double e2 = eps0_ * eps0_;
  double integral = 0.0;  // of H / v^2 over [r, radius]
  // [0, a]: H / v^2 = v / (12 eps0^2).
  if (r < blend_start_) integral += (blend_start_ * blend_start_ - r * r) / (24.0 * e2);
  // Blend window: quadrature.
  const double lo = std::max(r, blend_start_);
  if (lo < blend_end_) {
    integral += integrate([this](double v) { return H_direct(v) / (v * v); }, lo, blend_end_,
                          kQuadTol);
  }
  // [r*, radius]: H = K + v / (1 + v^2).
  const double from = std::max(r, blend_end_);
  const double k = H_direct(blend_end_) - density_primitive(blend_end_);
  integral += k * (1.0 / from - 1.0 / radius_) + log_primitive(radius_) - log_primitive(from);
  const double c = b_ / (3.0 * std::pow(radius_, 3));
  return integral - 0.5 * c * (radius_ * radius_ - r * r);
}

std::size_t RadialProfile::segment(double r) const {
  const auto i = static_cast<std::size_t>(std::floor(r / step_));
  return std::min(i, knots_.size() - 2);
}

double RadialProfile::dpsi_from_H(double r, double H_value) const {
  const double c = b_ / (3.0 * std::pow(radius_, 3));
  if (r == 0.0) return 0.0;
  return c * r - H_value / (r * r);
}

namespace {

double hermite(double x0, double step, double y0, double y1, double m0, double m1, double x) {
  const double t = (x - x0) / step;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * step * m0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * step * m1;
}

}  // namespace

double RadialProfile::H(double r) const {
  if (r < 0.0 || r > radius_) throw InvalidArgument("H: r out of range");
  const std::size_t i = segment(r);
  return hermite(knots_[i], step_, H_[i], H_[i + 1], h_[i], h_[i + 1], r);
}

double RadialProfile::psi(double r) const {
  if (r < 0.0 || r > radius_) throw InvalidArgument("psi: r out of range");
  const std::size_t i = segment(r);
  return hermite(knots_[i], step_, psi_[i], psi_[i + 1], dpsi_[i], dpsi_[i + 1], r);
}

double RadialProfile::dpsi(double r) const { return dpsi_from_H(r, H(r)); }

double RadialProfile::delta0() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (knots_[i] >= 1.0) worst = std::max(worst, dpsi_[i]);
  }
  return -worst;
}

RadialProfile build_radial_profile(std::size_t dim, double eps0, std::size_t knots) {
  if (dim < 3) throw InvalidArgument("build_radial_profile: requires d >= 3");
  if (!(eps0 > 0.0) || !(eps0 < 0.5)) throw InvalidArgument("build_radial_profile: eps0 in (0, 1/2)");
  if (knots < 16) throw InvalidArgument("build_radial_profile: need at least 16 knots");

  RadialProfile p;
  p.dim_ = dim;
  p.eps0_ = eps0;
  p.radius_ = std::sqrt(static_cast<double>(dim - 1));
  p.blend_end_ = crossing(eps0);
  p.blend_start_ = p.blend_end_ - 0.25 * eps0;
  if (!(p.blend_start_ > 0.0)) {
    throw PropertyViolation("i", describe("blend window reaches the origin", p.blend_end_, eps0));
  }
  p.step_ = p.radius_ / static_cast<double>(knots - 1);
  p.knots_.resize(knots);
  for (std::size_t i = 0; i < knots; ++i) p.knots_[i] = p.step_ * static_cast<double>(i);
  p.knots_.back() = p.radius_;

  p.h_.resize(knots);
  for (std::size_t i = 0; i < knots; ++i) p.h_[i] = p.h(p.knots_[i]);

  // H: cumulative Simpson over knot intervals.
  auto hf = [&p](double v) { return p.h(v); };
  p.H_.assign(knots, 0.0);
  for (std::size_t i = 1; i < knots; ++i) {
    p.H_[i] = p.H_[i - 1] + adaptive_simpson(hf, p.knots_[i - 1], p.knots_[i], kPanelTol).value;
  }
  p.b_ = p.H_.back();
  const double c = p.b_ / (3.0 * std::pow(p.radius_, 3));

  // psi: cumulative from the right end, integrand H(v)/v^2 - c v with H evaluated directly.
  auto integrand = [&p, c](double v) {
    if (v == 0.0) return 0.0;
    return p.H_direct(v) / (v * v) - c * v;
  };
  p.psi_.assign(knots, 0.0);
  for (std::size_t i = knots - 1; i-- > 0;) {
    p.psi_[i] =
        p.psi_[i + 1] + adaptive_simpson(integrand, p.knots_[i], p.knots_[i + 1], kPanelTol).value;
  }
  p.dpsi_.resize(knots);
  for (std::size_t i = 0; i < knots; ++i) p.dpsi_[i] = p.dpsi_from_H(p.knots_[i], p.H_[i]);

  // Property checks on the knot grid.
  for (std::size_t i = 0; i < knots; ++i) {
    const double r = p.knots_[i];
    const double g = radial_density(r);
    const double hv = p.h_[i];
    if (r < 2.0 * eps0) {
      if (hv < 0.0 || hv > g + 1e-15) throw PropertyViolation("i", describe("h outside [0, g]", r, hv));
    } else if (hv != g) {
      throw PropertyViolation("i", describe("h differs from g beyond 2 eps0", r, hv));
    }
    if (r <= eps0 && !(g - hv > 0.5)) {
      throw PropertyViolation("iii", describe("g - h <= 1/2", r, g - hv));
    }
  }
  if (p.h_[0] != 0.0) throw PropertyViolation("ii", describe("h(0) != 0", 0.0, p.h_[0]));
  for (std::size_t i = 1; i <= 2; ++i) {
    const double ratio = p.h_[i] / parabola(p.knots_[i], eps0);
    if (std::abs(ratio - 1.0) > 0.05) {
      throw PropertyViolation("ii", describe("h / parabola not near 1", p.knots_[i], ratio));
    }
  }
  if (!(p.b_ > 0.0 && p.b_ < 1.0)) throw PropertyViolation("iv", describe("b outside (0, 1)", p.radius_, p.b_));
  for (std::size_t i = 1; i < knots; ++i) {
    const double r = p.knots_[i];
    if (!(p.H_[i] > c * r * r * r)) {
      throw PropertyViolation("v", describe("H <= b r^3 / (3 (d-1)^{3/2})", r, p.H_[i]));
    }
  }
  if (p.psi_.back() != 0.0) throw PropertyViolation("psi_end", describe("psi(end) != 0", p.radius_, p.psi_.back()));
  for (std::size_t i = 1; i < knots; ++i) {
    if (p.dpsi_[i] > 0.0) {
      throw PropertyViolation("psi_monotone", describe("psi' > 0", p.knots_[i], p.dpsi_[i]));
    }
  }
  return p;
}

}  // namespace siwalk
