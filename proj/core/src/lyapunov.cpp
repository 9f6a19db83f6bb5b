#include "siwalk/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

#include "siwalk/cov_transform.hpp"
#include "siwalk/errors.hpp"
#include "siwalk/parallel.hpp"
#include "siwalk/quadrature.hpp"
#include "siwalk/rng.hpp"
#include "siwalk/sequences.hpp"

namespace siwalk {

// ---------------------------------------------------------------------------
// phi
// ---------------------------------------------------------------------------

void PhiParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("PhiParams: alpha must lie in (0, 1)");
  if (!(r0 > 1.0) || !std::isfinite(r0)) throw InvalidArgument("PhiParams: r0 must exceed 1");
}

double phi_tilde(const Vector& x, const PhiParams& p) {
  const double n = x.norm();
  if (n <= p.r0) return std::pow(p.r0, -p.alpha);
  return std::pow(n, -p.alpha);
}

double phi_drift(const FiniteMeasure& mu, const Vector& x, const PhiParams& p) {
  if (static_cast<std::size_t>(x.size()) != mu.dim()) {
    throw InvalidArgument("phi_drift: dimension mismatch");
  }
  const double n2 = x.squaredNorm();
  const double base = phi_tilde(x, p);
  const bool outside = std::sqrt(n2) > p.r0;
  double drift = 0.0;
  for (const auto& atom : mu.atoms()) {
    const Vector y = x + atom.point;
    double diff;
    if (outside && y.norm() > p.r0) {
      // |y|^-a - |x|^-a without cancellation.
      const double rel = (2.0 * x.dot(atom.point) + atom.point.squaredNorm()) / n2;
      diff = base * std::expm1(-0.5 * p.alpha * std::log1p(rel));
    } else {
      diff = phi_tilde(y, p) - base;
    }
    drift += atom.weight * diff;
  }
  return drift;
}

std::vector<Vector> phi_scan_points(std::size_t dim, double r0, double span,
                                    std::size_t sample_count, std::size_t radial_steps) {
  if (radial_steps < 2) throw InvalidArgument("phi_scan_points: need at least 2 radial steps");
  const std::size_t directions = std::max<std::size_t>(1, sample_count / radial_steps);
  SphereSequence seq(dim);
  std::vector<Vector> points;
  points.reserve(directions * radial_steps);
  for (std::size_t k = 0; k < directions; ++k) {
    const Vector u = seq.next();
    for (std::size_t i = 0; i < radial_steps; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(radial_steps - 1);
      points.push_back(u * (r0 * std::pow(span, t)));
    }
  }
  return points;
}

ScanPoint worst_phi_drift(std::span<const FiniteMeasure> mus, const PhiParams& p,
                          const PhiSearchOptions& options) {
  if (mus.empty()) throw InvalidArgument("worst_phi_drift: empty family");
  const auto points = phi_scan_points(mus.front().dim(), p.r0, options.radius_span,
                                      options.sample_count, options.radial_steps);
  ScanPoint worst;
  worst.drift = -std::numeric_limits<double>::infinity();
  for (const auto& x : points) {
    for (std::size_t j = 0; j < mus.size(); ++j) {
      const double v = phi_drift(mus[j], x, p);
      if (v > worst.drift) {
        worst.drift = v;
        worst.x = x;
        worst.measure = j;
      }
    }
  }
  return worst;
}

PhiParams find_phi_params(std::span<const FiniteMeasure> mus, const PhiSearchOptions& options) {
  if (mus.empty()) throw InvalidArgument("find_phi_params: empty family");
  double support = 0.0;
  for (std::size_t j = 0; j < mus.size(); ++j) {
    const auto& mu = mus[j];
    if (mu.dim() != mus.front().dim()) throw InvalidArgument("find_phi_params: dimension mismatch");
    support = std::max(support, mu.support_radius());
    if (mean(mu).norm() > 1e-9 * std::max(1.0, mu.support_radius())) {
      throw InvalidArgument("find_phi_params: measure " + std::to_string(j) + " is not zero-mean");
    }
    if (!(trace_condition_margin(covariance(mu)) > 0.0)) {
      throw InvalidArgument("find_phi_params: measure " + std::to_string(j) +
                            " violates the trace condition");
    }
  }

  std::vector<double> alphas = options.alpha_grid;
  std::sort(alphas.begin(), alphas.end());
  const double first_r0 = std::max(2.0, 2.0 * support);

  ScanPoint least_bad;
  least_bad.drift = std::numeric_limits<double>::infinity();
  PhiParams least_bad_params;
  for (double alpha : alphas) {
    for (int k = 0; k <= options.r0_doublings; ++k) {
      const PhiParams p{alpha, first_r0 * std::ldexp(1.0, k)};
      p.validate();
      const ScanPoint w = worst_phi_drift(mus, p, options);
      if (w.drift <= options.drift_tol) {
        // Step one doubling out and confirm on ten times the directions: the
        // sampled directions can miss a thin positive band just outside r0.
        const PhiParams safe{alpha, 2.0 * p.r0};
        PhiSearchOptions dense = options;
        dense.sample_count = options.sample_count * 10;
        if (worst_phi_drift(mus, safe, dense).drift <= options.drift_tol) return safe;
        continue;
      }
      if (w.drift < least_bad.drift) {
        least_bad = w;
        least_bad_params = p;
      }
    }
  }
  nlohmann::json detail = {{"alpha", least_bad_params.alpha},
                           {"r0", least_bad_params.r0},
                           {"worst_drift", least_bad.drift},
                           {"measure", least_bad.measure},
                           {"worst_point", std::vector<double>(least_bad.x.data(),
                                                               least_bad.x.data() + least_bad.x.size())}};
  throw SearchFailure("find_phi_params: no (alpha, r0) on the grid has non-positive drift", detail);
}

// ---------------------------------------------------------------------------
// log ||x||
// ---------------------------------------------------------------------------

double log_drift(const FiniteMeasure& mu, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != mu.dim()) throw InvalidArgument("log_drift: dimension mismatch");
  const double n2 = x.squaredNorm();
  if (n2 == 0.0) throw InvalidArgument("log_drift: x = 0");
  double drift = 0.0;
  for (const auto& atom : mu.atoms()) {
    if ((x + atom.point).squaredNorm() == 0.0) {
      throw InvalidArgument("log_drift: an atom steps onto the origin");
    }
    const double rel = (2.0 * x.dot(atom.point) + atom.point.squaredNorm()) / n2;
    drift += atom.weight * 0.5 * std::log1p(rel);
  }
  return drift;
}

CapDriftScan scan_cap_log_drift(const CapSystem& caps, double eps, const CapScanOptions& options) {
  if (caps.caps.empty()) throw InvalidArgument("scan_cap_log_drift: empty cap system");
  if (!(options.r0 > 0.0 && options.radius_span >= 1.0)) {
    throw InvalidArgument("scan_cap_log_drift: need r0 > 0 and radius_span >= 1");
  }
  std::vector<FiniteMeasure> laws;
  for (std::size_t i = 0; i < caps.caps.size(); ++i) laws.push_back(cap_step_measure(caps, i, eps));
  Rng rng(options.seed);
  CapDriftScan scan;
  scan.eps = eps;
  scan.worst_drift = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < options.samples; ++s) {
    const Vector u = random_direction(caps.dim, rng);
    const Vector x = u * (options.r0 * std::pow(options.radius_span, rng.uniform()));
    const double v = log_drift(laws[caps.owner(x)], x);
    ++scan.points;
    if (v > scan.worst_drift) {
      scan.worst_drift = v;
      scan.worst_point = x;
    }
  }
  return scan;
}

CapDriftScan find_cap_eps(const CapSystem& caps, std::span<const double> eps_grid,
                          const CapScanOptions& options) {
  if (eps_grid.empty()) throw InvalidArgument("find_cap_eps: empty grid");
  std::vector<double> grid(eps_grid.begin(), eps_grid.end());
  std::sort(grid.begin(), grid.end(), std::greater<>());
  CapDriftScan least_bad;
  least_bad.worst_drift = std::numeric_limits<double>::infinity();
  for (double eps : grid) {
    CapDriftScan scan = scan_cap_log_drift(caps, eps, options);
    if (scan.pass()) return scan;
    if (scan.worst_drift < least_bad.worst_drift) least_bad = scan;
  }
  nlohmann::json detail = {
      {"eps", least_bad.eps},
      {"worst_drift", least_bad.worst_drift},
      {"worst_point", std::vector<double>(least_bad.worst_point.data(),
                                          least_bad.worst_point.data() + least_bad.worst_point.size())}};
  throw SearchFailure("find_cap_eps: no grid eps has non-positive log drift", detail);
}

// ---------------------------------------------------------------------------
// f(x) = (1 - alpha psi(r)) ||x||^alpha
// ---------------------------------------------------------------------------

namespace {

struct Sorted {
  double norm = 0.0;
  double ratio = 0.0;
};

/// Norm and ratio radius from the sorted absolute coordinates, so both are
/// bit-identical under signed coordinate permutations.
Sorted sorted_geometry(const Vector& x) {
  std::vector<double> a(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) a[static_cast<std::size_t>(i)] = std::abs(x(i));
  std::sort(a.begin(), a.end(), std::greater<>());
  double tail = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) tail += a[i] * a[i];
  Sorted s;
  s.norm = std::sqrt(a[0] * a[0] + tail);
  s.ratio = a[0] > 0.0 ? std::sqrt(tail) / a[0] : 0.0;
  return s;
}

}  // namespace

double ratio_radius(const Vector& x) {
  if (x.size() == 0) throw InvalidArgument("ratio_radius: empty vector");
  return sorted_geometry(x).ratio;
}

double f_value(const Vector& x, double alpha, const RadialProfile& profile) {
  if (static_cast<std::size_t>(x.size()) != profile.dim()) throw InvalidArgument("f_value: dimension mismatch");
  const Sorted s = sorted_geometry(x);
  if (s.norm == 0.0) throw InvalidArgument("f_value: x = 0");
  const double r = std::min(s.ratio, profile.radius());
  return (1.0 - alpha * profile.psi(r)) * std::pow(s.norm, alpha);
}

double gamma_walk_drift(const Vector& x, double gamma, double alpha, const RadialProfile& profile) {
  const std::size_t d = profile.dim();
  if (static_cast<std::size_t>(x.size()) != d) throw InvalidArgument("gamma_walk_drift: dimension mismatch");
  if (!(gamma > 0.0)) throw InvalidArgument("gamma_walk_drift: gamma must be positive");
  const Sorted sx = sorted_geometry(x);
  if (sx.norm == 0.0) throw InvalidArgument("gamma_walk_drift: x = 0");

  std::size_t lead = 0;
  for (std::size_t k = 1; k < d; ++k) {
    if (std::abs(x(static_cast<Eigen::Index>(k))) > std::abs(x(static_cast<Eigen::Index>(lead)))) lead = k;
  }
  const double denom = 2.0 * (gamma + static_cast<double>(d) - 1.0);
  const double n2 = sx.norm * sx.norm;
  const double pow_x = std::pow(sx.norm, alpha);
  const double psi_x = profile.psi(std::min(sx.ratio, profile.radius()));
  const double f_x = (1.0 - alpha * psi_x) * pow_x;

  double drift = 0.0;
  Vector y = x;
  for (std::size_t k = 0; k < d; ++k) {
    const double w = (k == lead ? gamma : 1.0) / denom;
    const auto ki = static_cast<Eigen::Index>(k);
    for (double s : {1.0, -1.0}) {
      y(ki) = x(ki) + s;
      const Sorted sy = sorted_geometry(y);
      double diff;
      if (sy.norm == 0.0) {
        diff = -f_x;
      } else {
        // f(y) - f(x) = (|y|^a - |x|^a)(1 - a psi_x) - a |y|^a (psi_y - psi_x)
        const double rel = (2.0 * s * x(ki) + 1.0) / n2;
        const double dpow = pow_x * std::expm1(0.5 * alpha * std::log1p(rel));
        const double psi_y = profile.psi(std::min(sy.ratio, profile.radius()));
        diff = dpow * (1.0 - alpha * psi_x) - alpha * (pow_x + dpow) * (psi_y - psi_x);
      }
      drift += w * diff;
    }
    y(ki) = x(ki);
  }
  return drift;
}

double capital_phi(double r, const RadialProfile& profile) {
  if (!(r >= 0.0 && r <= profile.radius())) throw InvalidArgument("capital_phi: r out of range");
  const double scale = profile.b() / std::pow(profile.radius(), 3);
  return radial_density(r) - profile.h(r) + scale * r * r;
}

double capital_phi_lower_bound(const RadialProfile& profile) {
  const double scale = profile.b() / std::pow(profile.radius(), 3);
  return std::min(scale * profile.eps0() * profile.eps0(), 0.5);
}

// ---------------------------------------------------------------------------
// Shell scans
// ---------------------------------------------------------------------------

namespace {

struct Partial {
  std::vector<long long> worst_point;
  double worst_drift = -std::numeric_limits<double>::infinity();
  std::size_t points = 0;
  std::size_t positive = 0;

  void add(const std::vector<long long>& p, double drift) {
    ++points;
    if (drift > 0.0) ++positive;
    if (drift > worst_drift || (drift == worst_drift && p < worst_point)) {
      worst_drift = drift;
      worst_point = p;
    }
  }

  void merge(const Partial& o) {
    points += o.points;
    positive += o.positive;
    if (o.points > 0 && (o.worst_drift > worst_drift ||
                         (o.worst_drift == worst_drift && o.worst_point < worst_point))) {
      worst_drift = o.worst_drift;
      worst_point = o.worst_point;
    }
  }
};

Vector to_vector(const std::vector<long long>& p) {
  Vector v(static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) v(static_cast<Eigen::Index>(i)) = static_cast<double>(p[i]);
  return v;
}

bool in_shell(long long n2, const Shell& shell) {
  const double n = std::sqrt(static_cast<double>(n2));
  return n >= shell.inner && n <= shell.outer;
}

}  // namespace

DriftScan scan_gamma_walk_drift(const RadialProfile& profile, double gamma, double alpha,
                                const Shell& shell, const GammaScanOptions& options) {
  if (!(shell.inner >= 0.0 && shell.outer >= shell.inner)) {
    throw InvalidArgument("scan_gamma_walk_drift: invalid shell");
  }
  const std::size_t d = profile.dim();
  const bool enumerate = d == 3 && shell.outer <= options.max_enumeration_radius;
  std::vector<Partial> partials;

  if (enumerate) {
    const auto m = static_cast<long long>(std::floor(shell.outer));
    const auto span = static_cast<std::size_t>(2 * m + 1);
    partials.resize(span);
    parallel_for(span, options.threads, [&](std::size_t slab) {
      const long long a = static_cast<long long>(slab) - m;
      Partial& part = partials[slab];
      std::vector<long long> p(3);
      for (long long b = -m; b <= m; ++b) {
        for (long long c = -m; c <= m; ++c) {
          const long long n2 = a * a + b * b + c * c;
          if (n2 == 0 || !in_shell(n2, shell)) continue;
          p = {a, b, c};
          part.add(p, gamma_walk_drift(to_vector(p), gamma, alpha, profile));
        }
      }
    });
  } else {
    const std::size_t chunks = 64;
    partials.resize(chunks);
    parallel_for(chunks, options.threads, [&](std::size_t chunk) {
      Rng rng(derive_seed(options.seed, chunk));
      Partial& part = partials[chunk];
      const std::size_t begin = options.sample_count * chunk / chunks;
      const std::size_t end = options.sample_count * (chunk + 1) / chunks;
      const double lo = std::pow(shell.inner, static_cast<double>(d));
      const double hi = std::pow(shell.outer, static_cast<double>(d));
      std::vector<long long> p(d);
      for (std::size_t s = begin; s < end; ++s) {
        // Radius uniform in volume, direction uniform, rounded to the lattice.
        for (int attempt = 0; attempt < 64; ++attempt) {
          const Vector u = random_direction(d, rng);
          const double radius = std::pow(lo + rng.uniform() * (hi - lo), 1.0 / static_cast<double>(d));
          long long n2 = 0;
          for (std::size_t i = 0; i < d; ++i) {
            p[i] = std::llround(u(static_cast<Eigen::Index>(i)) * radius);
            n2 += p[i] * p[i];
          }
          if (n2 == 0 || !in_shell(n2, shell)) continue;
          part.add(p, gamma_walk_drift(to_vector(p), gamma, alpha, profile));
          break;
        }
      }
    });
  }

  Partial total;
  for (const auto& p : partials) total.merge(p);
  DriftScan scan;
  scan.worst_point = total.worst_point;
  scan.worst_drift = total.points > 0 ? total.worst_drift : 0.0;
  scan.points = total.points;
  scan.positive = total.positive;
  scan.enumerated = enumerate;
  return scan;
}

GammaAlphaCertificate find_gamma_alpha(const RadialProfile& profile,
                                       std::span<const double> gamma_grid,
                                       std::span<const double> alpha_grid, const Shell& shell,
                                       const GammaScanOptions& options) {
  if (gamma_grid.empty() || alpha_grid.empty()) throw InvalidArgument("find_gamma_alpha: empty grid");
  std::vector<double> gammas(gamma_grid.begin(), gamma_grid.end());
  std::vector<double> alphas(alpha_grid.begin(), alpha_grid.end());
  std::sort(gammas.begin(), gammas.end());
  std::sort(alphas.begin(), alphas.end());

  nlohmann::json attempts = nlohmann::json::array();
  GammaAlphaCertificate least_bad;
  least_bad.scan.worst_drift = std::numeric_limits<double>::infinity();
  for (double gamma : gammas) {
    for (double alpha : alphas) {
      DriftScan scan = scan_gamma_walk_drift(profile, gamma, alpha, shell, options);
      if (scan.pass()) return {gamma, alpha, shell, std::move(scan)};
      attempts.push_back({{"gamma", gamma}, {"alpha", alpha}, {"worst_drift", scan.worst_drift},
                          {"positive", scan.positive}, {"worst_point", scan.worst_point}});
      if (scan.worst_drift < least_bad.scan.worst_drift) least_bad = {gamma, alpha, shell, scan};
    }
  }
  nlohmann::json detail = {{"gamma", least_bad.gamma},
                           {"alpha", least_bad.alpha},
                           {"worst_drift", least_bad.scan.worst_drift},
                           {"worst_point", least_bad.scan.worst_point},
                           {"attempts", attempts}};
  throw SearchFailure("find_gamma_alpha: no grid pair has non-positive drift on the shell", detail);
}

// ---------------------------------------------------------------------------
// Cap counting
// ---------------------------------------------------------------------------

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("regularized_incomplete_beta: x outside [0, 1]");
  if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("regularized_incomplete_beta: a, b must be positive");
  return boost::math::ibeta(a, b, x);
}

double cap_count_lower_bound(std::size_t dim) {
  if (dim < 2) throw InvalidArgument("cap_count_lower_bound: requires d >= 2");
  return 2.0 / regularized_incomplete_beta(0.5, 0.5 * static_cast<double>(dim - 1), 0.5);
}

}  // namespace siwalk
