#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "siwalk/rational.hpp"
#include "siwalk/rng.hpp"
#include "siwalk/sym_matrix.hpp"
#include "siwalk/types.hpp"

namespace siwalk {

struct Atom {
  Vector point;
  double weight = 0.0;
};

/// Probability measure on R^d with finitely many atoms.
///
/// Weights must be positive and sum to one within 1e-9; they are renormalized
/// on construction so the stored sum is one to rounding. The atom order is part
/// of the value: sampling walks the cumulative weights in this order, so two
/// measures with permuted atoms produce different (equally distributed) streams.
///
/// A measure may also carry exact rational weights. The enumerators use those
/// when present and otherwise convert the stored doubles exactly.
class FiniteMeasure {
 public:
  FiniteMeasure(std::size_t dim, std::vector<Atom> atoms);

  /// Exact weights must be positive and sum to exactly one.
  static FiniteMeasure with_exact_weights(std::size_t dim, std::vector<Vector> points,
                                          std::vector<Rational> weights);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const Vector& point(std::size_t i) const { return atoms_[i].point; }
  double weight(std::size_t i) const { return atoms_[i].weight; }

  bool has_exact_weights() const noexcept { return exact_.has_value(); }
  /// Exact weights summing to one: the stored rationals, or the doubles
  /// converted exactly and renormalized.
  std::vector<Rational> rational_weights() const;

  /// Largest atom norm.
  double support_radius() const;

  /// Inverse-CDF draw of an atom index over the fixed atom order.
  std::size_t sample_index(Rng& rng) const;

 private:
  FiniteMeasure() = default;
  void finish();

  std::size_t dim_ = 0;
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
  std::optional<std::vector<Rational>> exact_;
};

Vector mean(const FiniteMeasure& mu);

/// Matrix of second central moments.
SymMatrix covariance(const FiniteMeasure& mu);

/// True iff the smallest covariance eigenvalue exceeds `tol`.
bool is_full_dimensional(const FiniteMeasure& mu, double tol = 1e-12);

/// E ||Z||^p.
double moment(const FiniteMeasure& mu, double p);

/// Law of A Z for Z ~ mu. Weights (and exact weights) carry over unchanged.
FiniteMeasure pushforward(const Matrix& a, const FiniteMeasure& mu);

const Vector& sample(const FiniteMeasure& mu, Rng& rng);

// Frequently used measures.

/// +-e_j with probability 1/(2d) each, atoms ordered +e_0, -e_0, +e_1, ...
FiniteMeasure simple_random_walk_measure(std::size_t dim);

/// Zero-mean measure with covariance exactly `m`: atoms +-sqrt(d) L e_j with
/// weight 1/(2d), where L L^T = m is the Cholesky factor.
FiniteMeasure measure_with_covariance(const SymMatrix& m);

/// True when every atom coordinate is an integer.
bool is_lattice_measure(const FiniteMeasure& mu);

}  // namespace siwalk
