#include "siwalk/caps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "siwalk/errors.hpp"
#include "siwalk/sequences.hpp"

namespace siwalk {

std::size_t CapSystem::owner(const Vector& x) const {
  if (caps.empty()) throw InvalidArgument("CapSystem::owner: no caps");
  const double n = x.norm();
  if (n == 0.0) return 0;
  const Vector u = x / n;
  const double limit = std::cos(theta);
  std::size_t nearest = 0;
  double best = -2.0;
  for (std::size_t i = 0; i < caps.size(); ++i) {
    const double c = caps[i].center.dot(u);
    if (c >= limit) return i;
    if (c > best) {
      best = c;
      nearest = i;
    }
  }
  return nearest;
}

CoverCheck verify_cover(const CapSystem& caps, std::size_t samples, Rng& rng) {
  CoverCheck check;
  check.samples = samples;
  const double limit = std::cos(caps.theta);
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector u = random_direction(caps.dim, rng);
    double best = -1.0;
    for (const auto& cap : caps.caps) best = std::max(best, cap.center.dot(u));
    if (best < limit) ++check.uncovered;
    check.max_angle = std::max(check.max_angle, std::acos(std::clamp(best, -1.0, 1.0)));
  }
  return check;
}

std::vector<Vector> orthonormal_complement(const Vector& center) {
  const auto d = center.size();
  if (d < 1 || std::abs(center.norm() - 1.0) > 1e-10) {
    throw InvalidArgument("orthonormal_complement: center must be a unit vector");
  }
  std::vector<Vector> basis{center};
  std::vector<bool> used(static_cast<std::size_t>(d), false);
  auto residual = [&basis](Vector v) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) v -= b.dot(v) * b;
    }
    return v;
  };
  for (Eigen::Index step = 1; step < d; ++step) {
    Eigen::Index pick = -1;
    double pick_norm = -1.0;
    Vector pick_vec;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      Vector r = residual(Vector::Unit(d, i));
      const double n = r.norm();
      if (n > pick_norm) {
        pick = i;
        pick_norm = n;
        pick_vec = std::move(r);
      }
    }
    used[static_cast<std::size_t>(pick)] = true;
    basis.push_back(pick_vec / pick_norm);
  }
  basis.erase(basis.begin());
  return basis;
}

CapSystem build_cap_system(std::size_t dim, double theta, Rng& rng, const CapBuildOptions& options) {
  if (dim < 2) throw InvalidArgument("build_cap_system: requires d >= 2");
  if (!(theta > 0.0 && theta < std::numbers::pi / 4)) {
    throw InvalidArgument("build_cap_system: theta must lie in (0, pi/4)");
  }
  CapSystem system;
  system.dim = dim;
  system.theta = theta;

  const double separation = std::cos(options.separation_factor * theta);
  SphereSequence seq(dim);
  std::size_t rejections = 0;
  while (rejections < options.max_consecutive_rejections) {
    const Vector u = seq.next();
    bool far = true;
    for (const auto& cap : system.caps) {
      if (cap.center.dot(u) > separation) {
        far = false;
        break;
      }
    }
    if (far) {
      system.caps.push_back({u, orthonormal_complement(u)});
      rejections = 0;
    } else {
      ++rejections;
    }
  }

  const CoverCheck check = verify_cover(system, options.verification_samples, rng);
  if (check.uncovered > 0) {
    std::ostringstream msg;
    msg << "build_cap_system: " << check.uncovered << " of " << check.samples
        << " directions uncovered (max angle " << check.max_angle << ")";
    throw PropertyViolation("covering", msg.str());
  }
  return system;
}

FiniteMeasure cap_step_measure(const CapSystem& caps, std::size_t index, double eps) {
  if (index >= caps.caps.size()) throw InvalidArgument("cap_step_measure: cap index out of range");
  if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidArgument("cap_step_measure: eps must lie in [0, 1]");
  const Cap& cap = caps.caps[index];
  const std::size_t d = caps.dim;
  const double eta_values[3] = {0.0, 1.0, -1.0};
  const double eta_weights[3] = {1.0 - eps, 0.5 * eps, 0.5 * eps};

  std::vector<Atom> atoms;
  std::vector<int> digit(d - 1, 0);
  for (double lead : {1.0, -1.0}) {
    std::fill(digit.begin(), digit.end(), 0);
    for (;;) {
      double w = 0.5;
      Vector p = lead * cap.center;
      for (std::size_t j = 0; j + 1 < d; ++j) {
        w *= eta_weights[digit[j]];
        p += eta_values[digit[j]] * cap.complement[j];
      }
      if (w > 0.0) atoms.push_back({std::move(p), w});
      std::size_t j = 0;
      while (j + 1 < d && ++digit[j] == 3) digit[j++] = 0;
      if (j + 1 >= d) break;
    }
  }
  return FiniteMeasure(d, std::move(atoms));
}

Vector cap_walk_step(const Vector& x, const CapSystem& caps, double eps, Rng& rng) {
  const Cap& cap = caps.caps[caps.owner(x)];
  Vector y = x;
  y += (rng.uniform() < 0.5 ? 1.0 : -1.0) * cap.center;
  for (const auto& v : cap.complement) {
    const double u = rng.uniform();
    if (u < 0.5 * eps) {
      y += v;
    } else if (u < eps) {
      y -= v;
    }
  }
  return y;
}

}  // namespace siwalk
