#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "siwalk/sym_matrix.hpp"
#include "siwalk/types.hpp"

namespace siwalk {

/// Operational positive definiteness: smallest eigenvalue > rel_tol * trace.
inline constexpr double kPositiveDefiniteTol = 1e-10;

struct MeasureMargin {
  double trace = 0.0;
  double lambda_max = 0.0;
  /// trace - 2 * lambda_max; positive iff the trace condition holds.
  double margin = 0.0;
};

/// Trace-condition diagnostics of one linear transform applied to a family of
/// covariance matrices.
struct TransformReport {
  Matrix transform;
  std::vector<MeasureMargin> per_measure;
  /// max_j lambda_max / trace of A M_j A^T.
  double psi = 1.0;

  bool satisfies_trace_condition() const;
};

TransformReport make_transform_report(const Matrix& a, std::span<const SymMatrix> ms);

/// tr(M) - 2 lambda_max(M).
double trace_condition_margin(const SymMatrix& m);

bool is_positive_definite(const SymMatrix& m, double rel_tol = kPositiveDefiniteTol);

/// W = D U with U M U^T diagonal and D = diag(lambda_i^{-1/2}), so W M W^T = I.
/// Throws NotPositiveDefinite unless min eigenvalue > rel_tol * trace.
Matrix whiten(const SymMatrix& m, double rel_tol = kPositiveDefiniteTol);

/// Explicit transform making two 3x3 positive definite covariances satisfy the
/// trace condition: whiten M1, rotate the whitened M2 to its eigenbasis
/// (lambda_1 >= lambda_2 >= lambda_3) and, when lambda_1 >= lambda_2 + lambda_3,
/// shrink the leading axis by sqrt(lambda_2 / lambda_1).
TransformReport construct_joint_transform_3d(const SymMatrix& m1, const SymMatrix& m2);

/// max_j lambda_max(A M_j A^T) / tr(A M_j A^T). Invariant under A -> cA.
double psi_objective(const Matrix& a, std::span<const SymMatrix> ms);

/// Orthogonal Q with Q^T M_i Q diagonal for a commuting family, by joint Jacobi
/// rotations. Throws InvalidArgument when some commutator exceeds
/// tol * ||M_i|| ||M_j||, and ConvergenceError when the result still has
/// off-diagonal mass above 1e-8 * trace(M_i).
Matrix joint_diagonalize(std::span<const SymMatrix> ms, double tol = 1e-9);

struct DiagonalSearchOptions {
  /// Coordinate-descent sweeps per start.
  int budget = 200;
  /// Identity plus (starts - 1) log-uniform diagonals in [1e-2, 1e2].
  int starts = 8;
  std::uint64_t seed = 0x51a1c0de;
};

/// Minimizes psi over diagonal A (normalized to unit Frobenius norm) by multi-start
/// coordinate descent on the log-entries with golden-section line search.
/// Requires d >= 4, k <= d - 1 and diagonal inputs with positive entries.
/// Throws SearchFailure (carrying the best report) if psi < 1/2 is not reached.
TransformReport minimize_psi_diagonal(std::span<const SymMatrix> ms,
                                      const DiagonalSearchOptions& options = {});

/// Same search without the dimension / count preconditions; never throws on
/// psi >= 1/2. Diagonal entries may be zero as long as every trace stays positive.
TransformReport minimize_psi_diagonal_unchecked(std::span<const SymMatrix> ms,
                                                const DiagonalSearchOptions& options = {});

struct GeneralSearchOptions {
  int restarts = 16;
  /// Objective evaluations per local descent.
  int evaluations = 4000;
  std::uint64_t seed = 0x5ea4c4;
};

struct GeneralSearchResult {
  TransformReport best;
  int start_index = 0;

  bool success() const { return best.psi < 0.5; }
  std::optional<TransformReport> certificate() const;
};

/// Best-effort search for any A with psi(A) < 1/2: structured starts (identity,
/// whitenings, commuting-family diagonal optimum) and random restarts, each
/// refined by pattern search over the full matrix. Failure proves nothing.
GeneralSearchResult search_transform_general(std::span<const SymMatrix> ms,
                                             const GeneralSearchOptions& options = {});

}  // namespace siwalk
