#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "siwalk/measure.hpp"
#include "siwalk/rng.hpp"
#include "siwalk/types.hpp"

namespace siwalk {

struct Cap {
  /// Unit center direction m.
  Vector center;
  /// d - 1 orthonormal vectors spanning the hyperplane orthogonal to `center`.
  std::vector<Vector> complement;
};

/// Ordered caps of common angular radius theta < pi/4 covering S^{d-1}.
/// The order is the greedy insertion order and decides which cap owns a direction.
struct CapSystem {
  std::size_t dim = 0;
  double theta = 0.0;
  std::vector<Cap> caps;

  /// Index of the first cap whose center is within theta of x / ||x||.
  /// x = 0 maps to cap 0; a direction outside every cap (possible only if the
  /// statistical covering check missed a gap) maps to the nearest center.
  std::size_t owner(const Vector& x) const;
};

struct CapBuildOptions {
  /// Candidates closer than separation_factor * theta to a kept center are
  /// rejected, so the greedy cover has covering radius below theta.
  double separation_factor = 0.9;
  std::size_t max_consecutive_rejections = 100'000;
  std::size_t verification_samples = 1'000'000;
};

struct CoverCheck {
  std::size_t samples = 0;
  std::size_t uncovered = 0;
  /// Largest angle from a sample to its nearest center.
  double max_angle = 0.0;
};

/// Covering test with uniform random directions drawn from `rng`.
CoverCheck verify_cover(const CapSystem& caps, std::size_t samples, Rng& rng);

/// Greedy cover from a low-discrepancy direction sequence, complements by
/// Gram-Schmidt with largest-pivot selection, then verified with `rng`.
/// Throws InvalidArgument unless 0 < theta < pi/4, and PropertyViolation if the
/// covering test finds an uncovered direction.
CapSystem build_cap_system(std::size_t dim, double theta, Rng& rng,
                           const CapBuildOptions& options = {});

/// Orthonormal basis of the complement of the unit vector `center`.
std::vector<Vector> orthonormal_complement(const Vector& center);

/// Step law inside cap i: fair +-1 along the center, independent +-1 with
/// probability eps/2 each (0 otherwise) along each complement vector.
/// Zero-probability atoms are omitted.
FiniteMeasure cap_step_measure(const CapSystem& caps, std::size_t index, double eps);

/// One cap-walk step from x.
Vector cap_walk_step(const Vector& x, const CapSystem& caps, double eps, Rng& rng);

}  // namespace siwalk
