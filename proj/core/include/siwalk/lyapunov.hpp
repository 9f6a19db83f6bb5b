#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "siwalk/caps.hpp"
#include "siwalk/measure.hpp"
#include "siwalk/radial_profile.hpp"
#include "siwalk/types.hpp"

namespace siwalk {

// ---------------------------------------------------------------------------
// Power-law potential ||x||^-alpha capped at r0^-alpha (transience certificate)
// ---------------------------------------------------------------------------

struct PhiParams {
  double alpha = 0.5;
  double r0 = 2.0;

  /// Throws InvalidArgument unless alpha in (0, 1) and r0 > 1.
  void validate() const;
};

/// min(||x||^-alpha, r0^-alpha); equals r0^-alpha at the origin.
double phi_tilde(const Vector& x, const PhiParams& p);

/// Exact E[phi~(x + Z) - phi~(x)] for Z ~ mu.
double phi_drift(const FiniteMeasure& mu, const Vector& x, const PhiParams& p);

struct PhiSearchOptions {
  /// Tried in ascending order; the first alpha admitting some r0 wins.
  std::vector<double> alpha_grid{1e-3, 1e-2, 0.05, 0.1, 0.25, 0.5};
  /// Scan covers ||x|| in [r0, radius_span * r0].
  double radius_span = 100.0;
  /// Total scan points: (sample_count / radial_steps) directions x radial_steps radii.
  std::size_t sample_count = 10'000;
  std::size_t radial_steps = 50;
  /// r0 candidates: max(2, 2 * support radius) * 2^k, k = 0 .. r0_doublings.
  int r0_doublings = 20;
  double drift_tol = 1e-12;
};

struct ScanPoint {
  Vector x;
  double drift = 0.0;
  std::size_t measure = 0;
};

/// The deterministic scan set used by find_phi_params: low-discrepancy
/// directions times log-spaced radii in [r0, span * r0].
std::vector<Vector> phi_scan_points(std::size_t dim, double r0, double span,
                                    std::size_t sample_count, std::size_t radial_steps);

/// Largest phi_drift over the scan set for every measure; the returned point
/// carries the measure index that attains it.
ScanPoint worst_phi_drift(std::span<const FiniteMeasure> mus, const PhiParams& p,
                          const PhiSearchOptions& options);

/// Smallest grid alpha with a candidate r0 whose scan has phi_drift <= drift_tol
/// for every measure; the returned r0 is the next doubling, re-verified on a
/// scan with ten times the directions. Measures must be zero-mean with
/// positive trace-condition margin (InvalidArgument otherwise); SearchFailure
/// reports the worst offending point when no pair qualifies.
PhiParams find_phi_params(std::span<const FiniteMeasure> mus,
                          const PhiSearchOptions& options = {});

// ---------------------------------------------------------------------------
// Logarithmic potential (cap walk)
// ---------------------------------------------------------------------------

/// Exact E[log||x + Z|| - log||x||]. Throws InvalidArgument if x or some x + z is 0.
double log_drift(const FiniteMeasure& mu, const Vector& x);

struct CapScanOptions {
  /// Points have ||x|| log-uniform in [r0, radius_span * r0].
  double r0 = 20.0;
  double radius_span = 100.0;
  std::size_t samples = 10'000;
  std::uint64_t seed = 0xca9;
};

struct CapDriftScan {
  double eps = 0.0;
  Vector worst_point;
  double worst_drift = 0.0;
  std::size_t points = 0;

  bool pass() const { return points > 0 && worst_drift <= 0.0; }
};

/// Exact log-drift of the cap walk (step law of the owning cap) at random points.
CapDriftScan scan_cap_log_drift(const CapSystem& caps, double eps, const CapScanOptions& options = {});

/// Largest grid eps whose scan passes. SearchFailure (with the least bad scan) otherwise.
CapDriftScan find_cap_eps(const CapSystem& caps, std::span<const double> eps_grid,
                          const CapScanOptions& options = {});

// ---------------------------------------------------------------------------
// Radial-profile potential f(x) = (1 - alpha psi(r)) ||x||^alpha (gamma walk)
// ---------------------------------------------------------------------------

/// Ratio radius of x: with |x| sorted descending, r = ||(|x_(1)|, ..., |x_(d-1)|)|| / |x_(0)|.
double ratio_radius(const Vector& x);

/// f(x); throws InvalidArgument at x = 0.
double f_value(const Vector& x, double alpha, const RadialProfile& profile);

/// Exact E[f(X_{n+1}) - f(X_n) | X_n = x] for the gamma walk. A neighbor at the
/// origin contributes f = 0, the continuous extension of f.
double gamma_walk_drift(const Vector& x, double gamma, double alpha,
                        const RadialProfile& profile);

/// (1 - r^2)/(1 + r^2)^2 + (r^2 psi'(r))', evaluated through the identity
/// (r^2 psi')' = b (d-1)^{-3/2} r^2 - h(r). Throws outside [0, sqrt(d-1)].
double capital_phi(double r, const RadialProfile& profile);

/// min(b (d-1)^{-3/2} eps0^2, 1/2), the guaranteed lower bound of capital_phi.
double capital_phi_lower_bound(const RadialProfile& profile);

struct Shell {
  double inner = 10.0;
  double outer = 60.0;
};

struct GammaScanOptions {
  /// d = 3 shells with outer <= this radius are enumerated exhaustively.
  double max_enumeration_radius = 60.0;
  /// Lattice points tried when sampling instead.
  std::size_t sample_count = 100'000;
  std::uint64_t seed = 0x9a44a;
  /// 0 = hardware concurrency.
  std::size_t threads = 0;
};

struct DriftScan {
  std::vector<long long> worst_point;
  double worst_drift = 0.0;
  std::size_t points = 0;
  std::size_t positive = 0;
  bool enumerated = false;

  bool pass() const { return points > 0 && worst_drift <= 0.0; }
};

/// Exact gamma-walk drift over the lattice points with inner <= ||x|| <= outer.
/// The worst point is the largest drift, ties broken by lexicographic order.
DriftScan scan_gamma_walk_drift(const RadialProfile& profile, double gamma, double alpha,
                                const Shell& shell, const GammaScanOptions& options = {});

struct GammaAlphaCertificate {
  double gamma = 0.0;
  double alpha = 0.0;
  Shell shell;
  DriftScan scan;
};

/// First (gamma ascending, then alpha ascending) grid pair whose shell scan has
/// no positive drift. Throws SearchFailure with the overall worst point otherwise.
GammaAlphaCertificate find_gamma_alpha(const RadialProfile& profile,
                                       std::span<const double> gamma_grid,
                                       std::span<const double> alpha_grid, const Shell& shell,
                                       const GammaScanOptions& options = {});

// ---------------------------------------------------------------------------
// Cap counting
// ---------------------------------------------------------------------------

/// Regularized incomplete beta I_x(a, b), x in [0, 1], a, b > 0 (Boost.Math).
double regularized_incomplete_beta(double x, double a, double b);

/// 2 / I_{1/2}((d-1)/2, 1/2): sphere area over the area of a cap of angular
/// radius pi/4 (cap diameter pi/2).
double cap_count_lower_bound(std::size_t dim);

}  // namespace siwalk
