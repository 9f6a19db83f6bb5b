#pragma once

#include "siwalk/sym_matrix.hpp"
#include "siwalk/types.hpp"

namespace siwalk {

struct EigenDecomposition {
  /// Columns are orthonormal eigenvectors; M = vectors * diag(values) * vectors^T.
  Matrix vectors;
  /// Descending; equal eigenvalues keep their diagonal order.
  Vector values;
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition. Sweeps until the off-diagonal Frobenius
/// norm is at most `tol * ||M||_F`, up to 50 sweeps (ConvergenceError beyond).
EigenDecomposition jacobi_eigen(const SymMatrix& m, double tol = 1e-13);

double lambda_max(const SymMatrix& m);
double lambda_min(const SymMatrix& m);

}  // namespace siwalk
