#pragma once

#include <cstddef>

#include "siwalk/types.hpp"

namespace siwalk {

/// Real symmetric d x d matrix. Construction from a general matrix checks
/// |m(i,j) - m(j,i)| <= 1e-14 * scale, where scale is the largest absolute entry.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix m);

  /// (m + m^T) / 2, for results of floating-point products that are symmetric
  /// in exact arithmetic.
  static SymMatrix symmetrized(const Matrix& m);
  static SymMatrix identity(std::size_t dim);
  static SymMatrix diagonal(const Vector& entries);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  double trace() const { return m_.trace(); }
  /// Frobenius norm.
  double norm() const { return m_.norm(); }
  bool is_diagonal(double rel_tol = 0.0) const;

 private:
  Matrix m_;
};

/// A * M * A^T, symmetrized.
SymMatrix congruence(const Matrix& a, const SymMatrix& m);

}  // namespace siwalk
