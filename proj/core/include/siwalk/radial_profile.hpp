#pragma once

#include <cstddef>
#include <vector>

namespace siwalk {

/// (1 - r^2) / (1 + r^2)^2, the radial density whose integral over
/// [0, sqrt(d-1)] is sqrt(d-1)/d.
double radial_density(double r);

/// Tabulated radial profile (h, H, psi, psi') on [0, sqrt(d-1)] for the
/// recurrence Lyapunov function.
///
/// h follows the parabola r^2 / (4 eps0^2) up to a = r* - eps0/4, where r* is its
/// crossing with radial_density, blends with a C^1 smoothstep over [a, r*] and
/// equals radial_density from r* on. H(r) = int_0^r h, b = H(sqrt(d-1)) and
///   psi(r) = int_r^{sqrt(d-1)} (H(v)/v^2 - b v / (3 (d-1)^{3/2})) dv,
/// so that r^2 psi'(r) = b r^3 / (3 (d-1)^{3/2}) - H(r).
///
/// H and psi are tabulated on uniform knots by adaptive Simpson quadrature and
/// interpolated by cubic Hermite splines using the exact slopes h and psi'.
class RadialProfile {
 public:
  std::size_t dim() const noexcept { return dim_; }
  double eps0() const noexcept { return eps0_; }
  double b() const noexcept { return b_; }
  /// sqrt(d - 1).
  double radius() const noexcept { return radius_; }
  /// [a, r*] blend window.
  double blend_start() const noexcept { return blend_start_; }
  double blend_end() const noexcept { return blend_end_; }

  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<double>& H_knots() const noexcept { return H_; }
  const std::vector<double>& psi_knots() const noexcept { return psi_; }

  double h(double r) const;
  double H(double r) const;
  double psi(double r) const;
  double dpsi(double r) const;

  /// H and psi re-integrated from scratch at r, bypassing the knot table.
  double H_direct(double r) const;
  double psi_direct(double r) const;

  /// Largest psi' over [1, sqrt(d-1)] on the knot grid, negated: psi' <= -delta0 there.
  double delta0() const;

 private:
  friend RadialProfile build_radial_profile(std::size_t, double, std::size_t);
  std::size_t segment(double r) const;
  double dpsi_from_H(double r, double H_value) const;

  std::size_t dim_ = 0;
  double eps0_ = 0.0;
  double b_ = 0.0;
  double radius_ = 0.0;
  double blend_start_ = 0.0;
  double blend_end_ = 0.0;
  double step_ = 0.0;
  std::vector<double> knots_;
  std::vector<double> h_;
  std::vector<double> H_;
  std::vector<double> psi_;
  std::vector<double> dpsi_;
};

/// Builds and validates the profile. Throws PropertyViolation naming the failed
/// property ("i" ... "v", "psi_end", "psi_monotone") when eps0 is unsuitable.
RadialProfile build_radial_profile(std::size_t dim, double eps0, std::size_t knots = 4096);

}  // namespace siwalk
