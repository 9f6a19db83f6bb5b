#include "siwalk/sym_matrix.hpp"

#include <cmath>
#include <sstream>

#include "siwalk/errors.hpp"

namespace siwalk {

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw InvalidArgument("symmetric matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < m_.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m_.cols(); ++j) {
      if (std::abs(m_(i, j) - m_(j, i)) > 1e-14 * scale) {
        std::ostringstream msg;
        msg << "matrix is not symmetric at (" << i << ", " << j << ")";
        throw InvalidArgument(msg.str());
      }
    }
  }
  // Store the exactly symmetric version.
  m_ = (0.5 * (m_ + m_.transpose())).eval();
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("symmetrized: matrix must be square");
  return SymMatrix(Matrix(0.5 * (m + m.transpose())));
}

SymMatrix SymMatrix::identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return SymMatrix(Matrix::Identity(n, n));
}

SymMatrix SymMatrix::diagonal(const Vector& entries) {
  return SymMatrix(Matrix(entries.asDiagonal()));
}

bool SymMatrix::is_diagonal(double rel_tol) const {
  const double scale = m_.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < m_.rows(); ++i) {
    for (Eigen::Index j = 0; j < m_.cols(); ++j) {
      if (i != j && std::abs(m_(i, j)) > rel_tol * scale) return false;
    }
  }
  return true;
}

SymMatrix congruence(const Matrix& a, const SymMatrix& m) {
  if (a.cols() != static_cast<Eigen::Index>(m.dim())) {
    throw InvalidArgument("congruence: dimension mismatch");
  }
  return SymMatrix::symmetrized(a * m.matrix() * a.transpose());
}

}  // namespace siwalk
