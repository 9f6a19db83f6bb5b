#include "siwalk/cov_transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "siwalk/errors.hpp"
#include "siwalk/jacobi.hpp"
#include "siwalk/rng.hpp"

namespace siwalk {

bool TransformReport::satisfies_trace_condition() const {
  return !per_measure.empty() &&
         std::all_of(per_measure.begin(), per_measure.end(),
                     [](const MeasureMargin& m) { return m.margin > 0.0; });
}

TransformReport make_transform_report(const Matrix& a, std::span<const SymMatrix> ms) {
  TransformReport report;
  report.transform = a;
  report.psi = 0.0;
  for (const auto& m : ms) {
    const SymMatrix t = congruence(a, m);
    MeasureMargin mm;
    mm.trace = t.trace();
    mm.lambda_max = lambda_max(t);
    mm.margin = mm.trace - 2.0 * mm.lambda_max;
    report.per_measure.push_back(mm);
    report.psi = std::max(report.psi, mm.trace > 0.0 ? mm.lambda_max / mm.trace : 1.0);
  }
  return report;
}

double trace_condition_margin(const SymMatrix& m) { return m.trace() - 2.0 * lambda_max(m); }

bool is_positive_definite(const SymMatrix& m, double rel_tol) {
  const double tr = m.trace();
  return tr > 0.0 && lambda_min(m) > rel_tol * tr;
}

Matrix whiten(const SymMatrix& m, double rel_tol) {
  const auto e = jacobi_eigen(m);
  const double tr = m.trace();
  const double smallest = e.values(e.values.size() - 1);
  if (!(tr > 0.0) || !(smallest > rel_tol * tr)) {
    std::ostringstream msg;
    msg << "whiten: matrix is not positive definite (smallest eigenvalue " << smallest
        << ", trace " << tr << ")";
    throw NotPositiveDefinite(msg.str());
  }
  const Vector scale = e.values.cwiseSqrt().cwiseInverse();
  return scale.asDiagonal() * e.vectors.transpose();
}

TransformReport construct_joint_transform_3d(const SymMatrix& m1, const SymMatrix& m2) {
  if (m1.dim() != 3 || m2.dim() != 3) {
    throw InvalidArgument("construct_joint_transform_3d: both matrices must be 3x3");
  }
  if (!is_positive_definite(m1) || !is_positive_definite(m2)) {
    throw NotPositiveDefinite("construct_joint_transform_3d: inputs must be positive definite");
  }
  const Matrix w = whiten(m1);
  const auto rotated = jacobi_eigen(congruence(w, m2));
  Matrix a = rotated.vectors.transpose() * w;

  const double l1 = rotated.values(0);
  const double l2 = rotated.values(1);
  const double l3 = rotated.values(2);
  if (l1 >= l2 + l3) {
    Matrix shrink = Matrix::Identity(3, 3);
    shrink(0, 0) = std::sqrt(l2 / l1);
    a = shrink * a;
  }
  const SymMatrix family[] = {m1, m2};
  return make_transform_report(a, family);
}

double psi_objective(const Matrix& a, std::span<const SymMatrix> ms) {
  if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0) {
    throw InvalidArgument("psi_objective: transform must be non-zero");
  }
  if (ms.empty()) throw InvalidArgument("psi_objective: empty family");
  double psi = 0.0;
  for (const auto& m : ms) {
    const SymMatrix t = congruence(a, m);
    const double tr = t.trace();
    psi = std::max(psi, tr > 0.0 ? lambda_max(t) / tr : 1.0);
  }
  return psi;
}

// ---------------------------------------------------------------------------
// Joint diagonalization
// ---------------------------------------------------------------------------

namespace {

double off_mass(const Matrix& m) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != j) s += m(i, j) * m(i, j);
    }
  }
  return std::sqrt(s);
}

void rotate(Matrix& m, Eigen::Index p, Eigen::Index q, double c, double s) {
  // m <- R^T m R with R = [[c, -s], [s, c]] in the (p, q) plane.
  const Vector cp = m.col(p);
  const Vector cq = m.col(q);
  m.col(p) = c * cp + s * cq;
  m.col(q) = -s * cp + c * cq;
  const Eigen::RowVectorXd rp = m.row(p);
  const Eigen::RowVectorXd rq = m.row(q);
  m.row(p) = c * rp + s * rq;
  m.row(q) = -s * rp + c * rq;
}

bool family_commutes(std::span<const SymMatrix> ms, double tol) {
  for (std::size_t i = 0; i < ms.size(); ++i) {
    for (std::size_t j = i + 1; j < ms.size(); ++j) {
      const Matrix& a = ms[i].matrix();
      const Matrix& b = ms[j].matrix();
      if ((a * b - b * a).norm() > tol * a.norm() * b.norm()) return false;
    }
  }
  return true;
}

}  // namespace

Matrix joint_diagonalize(std::span<const SymMatrix> ms, double tol) {
  if (ms.empty()) throw InvalidArgument("joint_diagonalize: empty family");
  const auto n = static_cast<Eigen::Index>(ms.front().dim());
  for (const auto& m : ms) {
    if (static_cast<Eigen::Index>(m.dim()) != n) {
      throw InvalidArgument("joint_diagonalize: dimension mismatch");
    }
  }
  if (!family_commutes(ms, tol)) {
    throw InvalidArgument("joint_diagonalize: matrices do not commute");
  }

  std::vector<Matrix> work;
  for (const auto& m : ms) work.push_back(m.matrix());
  Matrix v = Matrix::Identity(n, n);

  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        double g00 = 0.0, g01 = 0.0, g11 = 0.0;
        for (const auto& m : work) {
          const double h0 = m(p, p) - m(q, q);
          const double h1 = 2.0 * m(p, q);
          g00 += h0 * h0;
          g01 += h0 * h1;
          g11 += h1 * h1;
        }
        // (cos 2t, sin 2t) is the leading eigenvector of the 2x2 Gram matrix.
        const double angle = 0.25 * std::atan2(2.0 * g01, g00 - g11);
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        if (std::abs(s) < 1e-15) continue;
        rotated = true;
        for (auto& m : work) rotate(m, p, q, c, s);
        const Vector vp = v.col(p);
        const Vector vq = v.col(q);
        v.col(p) = c * vp + s * vq;
        v.col(q) = -s * vp + c * vq;
      }
    }
    if (!rotated) break;
  }

  for (std::size_t i = 0; i < ms.size(); ++i) {
    const Matrix d = v.transpose() * ms[i].matrix() * v;
    if (off_mass(d) > 1e-8 * std::abs(ms[i].trace())) {
      throw ConvergenceError("joint_diagonalize: residual off-diagonal mass too large");
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Diagonal psi minimization
// ---------------------------------------------------------------------------

namespace {

/// Rows are the diagonals of the family.
class DiagonalPsi {
 public:
  explicit DiagonalPsi(std::span<const SymMatrix> ms) {
    const auto d = static_cast<Eigen::Index>(ms.front().dim());
    entries_.resize(static_cast<Eigen::Index>(ms.size()), d);
    for (std::size_t j = 0; j < ms.size(); ++j) {
      entries_.row(static_cast<Eigen::Index>(j)) = ms[j].matrix().diagonal().transpose();
    }
    weights_.resize(d);
  }

  Eigen::Index dim() const { return entries_.cols(); }

  /// psi of A = diag(exp(log_a)).
  double operator()(const Vector& log_a) {
    set_weights(log_a);
    double psi = 0.0;
    for (Eigen::Index j = 0; j < entries_.rows(); ++j) {
      double total = 0.0, largest = 0.0;
      for (Eigen::Index i = 0; i < dim(); ++i) {
        const double v = weights_(i) * entries_(j, i);
        total += v;
        largest = std::max(largest, v);
      }
      psi = std::max(psi, total > 0.0 ? largest / total : 1.0);
    }
    return psi;
  }

  /// Log-sum-exp relaxation of the max over all (measure, coordinate) ratios,
  /// with its gradient in log_a. Exceeds psi by at most tau * log(k d).
  double smoothed(const Vector& log_a, double tau, Vector& grad) {
    set_weights(log_a);
    const Eigen::Index k = entries_.rows(), d = dim();
    ratios_.assign(static_cast<std::size_t>(k * d), 0.0);
    double top = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      double total = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) total += weights_(i) * entries_(j, i);
      for (Eigen::Index i = 0; i < d; ++i) {
        const double r = total > 0.0 ? weights_(i) * entries_(j, i) / total : 0.0;
        ratios_[static_cast<std::size_t>(j * d + i)] = r;
        top = std::max(top, r);
      }
    }
    double s = 0.0;
    for (double r : ratios_) s += std::exp((r - top) / tau);
    grad = Vector::Zero(d);
    // d r_ji / d t_l = 2 r_ji (delta_il - r_jl)
    for (Eigen::Index j = 0; j < k; ++j) {
      const double* r = &ratios_[static_cast<std::size_t>(j * d)];
      double pr = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) pr += std::exp((r[i] - top) / tau) / s * r[i];
      for (Eigen::Index i = 0; i < d; ++i) {
        const double p = std::exp((r[i] - top) / tau) / s;
        grad(i) += 2.0 * (p * r[i] - pr * r[i]);
      }
    }
    return top + tau * std::log(s);
  }

  void set_weights(const Vector& log_a) {
    const double top = log_a.maxCoeff();
    for (Eigen::Index i = 0; i < dim(); ++i) weights_(i) = std::exp(2.0 * (log_a(i) - top));
  }

  Matrix entries_;
  Vector weights_;
  std::vector<double> ratios_;
};

/// Golden-section minimization of a unimodal function on [lo, hi].
template <class F>
std::pair<double, double> golden_section(F&& f, double lo, double hi, double tol) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

constexpr double kLineWindow = 10.0;
constexpr double kLineTol = 1e-10;

template <class F>
double coordinate_descent(F&& psi, Vector& log_a, int budget) {
  double best = psi(log_a);
  Vector trial = log_a;
  for (int sweep = 0; sweep < budget; ++sweep) {
    const double before = best;
    for (Eigen::Index i = 0; i < log_a.size(); ++i) {
      trial = log_a;
      auto along = [&](double t) {
        trial(i) = t;
        return psi(trial);
      };
      const auto [t, value] =
          golden_section(along, log_a(i) - kLineWindow, log_a(i) + kLineWindow, kLineTol);
      if (value < best) {
        log_a(i) = t;
        best = value;
      }
    }
    if (!(best < before)) break;
  }
  return best;
}

/// Quasi-Newton descent on the smoothed objective, Armijo backtracking.
void bfgs_smoothed(DiagonalPsi& psi, Vector& x, double tau) {
  const Eigen::Index n = x.size();
  Vector g(n), g_new(n);
  double f = psi.smoothed(x, tau, g);
  Matrix inv_hessian = Matrix::Identity(n, n);
  for (int iter = 0; iter < 200 && g.norm() > 1e-12; ++iter) {
    Vector dir = -inv_hessian * g;
    if (dir.dot(g) >= 0.0) {
      inv_hessian.setIdentity();
      dir = -g;
    }
    double step = 1.0;
    Vector x_new;
    double f_new = f;
    bool moved = false;
    for (int back = 0; back < 60; ++back, step *= 0.5) {
      x_new = x + step * dir;
      f_new = psi.smoothed(x_new, tau, g_new);
      if (f_new <= f + 1e-4 * step * dir.dot(g)) {
        moved = true;
        break;
      }
    }
    if (!moved) break;
    const Vector sx = x_new - x;
    const Vector y = g_new - g;
    x = x_new;
    f = f_new;
    g = g_new;
    const double sy = sx.dot(y);
    if (sy > 1e-300) {
      const Vector hy = inv_hessian * y;
      inv_hessian += ((sy + y.dot(hy)) / (sy * sy)) * (sx * sx.transpose()) -
                     (hy * sx.transpose() + sx * hy.transpose()) / sy;
    }
  }
}

void check_diagonal_family(std::span<const SymMatrix> ms, bool strictly_positive) {
  if (ms.empty()) throw InvalidArgument("minimize_psi_diagonal: empty family");
  const std::size_t d = ms.front().dim();
  for (const auto& m : ms) {
    if (m.dim() != d) throw InvalidArgument("minimize_psi_diagonal: dimension mismatch");
    if (!m.is_diagonal(1e-12)) {
      throw InvalidArgument("minimize_psi_diagonal: matrices must be diagonal");
    }
    for (std::size_t i = 0; i < d; ++i) {
      if (strictly_positive ? !(m(i, i) > 0.0) : m(i, i) < 0.0) {
        throw InvalidArgument("minimize_psi_diagonal: diagonal entries must be positive");
      }
    }
    if (!(m.trace() > 0.0)) throw InvalidArgument("minimize_psi_diagonal: zero matrix");
  }
}

}  // namespace

TransformReport minimize_psi_diagonal_unchecked(std::span<const SymMatrix> ms,
                                                const DiagonalSearchOptions& options) {
  check_diagonal_family(ms, false);
  DiagonalPsi psi(ms);
  const Eigen::Index d = psi.dim();
  Rng rng(options.seed);

  Vector best_log = Vector::Zero(d);
  double best = std::numeric_limits<double>::infinity();
  for (int start = 0; start < std::max(1, options.starts); ++start) {
    Vector log_a = Vector::Zero(d);
    if (start > 0) {
      for (Eigen::Index i = 0; i < d; ++i) log_a(i) = std::log(10.0) * (4.0 * rng.uniform() - 2.0);
    }
    const double value = coordinate_descent(psi, log_a, options.budget);
    if (value < best) {
      best = value;
      best_log = log_a;
    }
  }

  // The max of ratios has kinks where coordinate moves stall. Polish the best
  // point on a log-sum-exp relaxation with shrinking temperature and keep any
  // exact improvement.
  Vector trial = best_log;
  for (double tau = 1e-2; tau > 1e-7; tau *= 0.3) {
    bfgs_smoothed(psi, trial, tau);
    trial.array() -= trial.maxCoeff();
    Vector polished = trial;
    const double exact = coordinate_descent(psi, polished, options.budget);
    if (exact < best) {
      best = exact;
      best_log = polished;
    }
  }
  best_log.array() -= best_log.maxCoeff();
  Vector diag = best_log.array().exp();
  diag /= diag.norm();
  return make_transform_report(Matrix(diag.asDiagonal()), ms);
}

TransformReport minimize_psi_diagonal(std::span<const SymMatrix> ms,
                                      const DiagonalSearchOptions& options) {
  check_diagonal_family(ms, true);
  const std::size_t d = ms.front().dim();
  if (d < 4) throw InvalidArgument("minimize_psi_diagonal: requires d >= 4");
  if (ms.size() > d - 1) throw InvalidArgument("minimize_psi_diagonal: requires k <= d - 1");
  TransformReport report = minimize_psi_diagonal_unchecked(ms, options);
  if (!(report.psi < 0.5)) {
    nlohmann::json detail = {{"psi", report.psi}, {"starts", options.starts},
                             {"budget", options.budget}};
    throw SearchFailure("minimize_psi_diagonal: budget exhausted with psi >= 1/2", detail);
  }
  return report;
}

// ---------------------------------------------------------------------------
// General search
// ---------------------------------------------------------------------------

std::optional<TransformReport> GeneralSearchResult::certificate() const {
  if (success()) return best;
  return std::nullopt;
}

namespace {

/// Whitening of m, with a small ridge when m is singular.
Matrix ridge_whiten(const SymMatrix& m) {
  if (is_positive_definite(m)) return whiten(m);
  const auto d = static_cast<Eigen::Index>(m.dim());
  const double ridge = 1e-9 * std::max(m.trace(), 1e-300) / static_cast<double>(d);
  return whiten(SymMatrix(Matrix(m.matrix() + ridge * Matrix::Identity(d, d))));
}

/// If W M_j W^T commute, refine W by the best diagonal transform in their
/// common eigenbasis.
Matrix refine_commuting(const Matrix& w, std::span<const SymMatrix> ms) {
  std::vector<SymMatrix> transformed;
  for (const auto& m : ms) transformed.push_back(congruence(w, m));
  if (!family_commutes(transformed, 1e-6)) return w;
  try {
    const Matrix q = joint_diagonalize(transformed, 1e-6);
    std::vector<SymMatrix> diagonal;
    for (const auto& t : transformed) {
      diagonal.push_back(SymMatrix::diagonal((q.transpose() * t.matrix() * q).diagonal()));
    }
    const TransformReport r = minimize_psi_diagonal_unchecked(diagonal);
    return r.transform * q.transpose() * w;
  } catch (const Error&) {
    return w;
  }
}

double safe_psi(const Matrix& a, std::span<const SymMatrix> ms) {
  if (!a.allFinite() || a.cwiseAbs().maxCoeff() == 0.0) return 1.0;
  return psi_objective(a, ms);
}

/// Compass search over the entries of A.
Matrix pattern_search(Matrix a, std::span<const SymMatrix> ms, int evaluations, double& value) {
  value = safe_psi(a, ms);
  double step = 0.25 * a.cwiseAbs().maxCoeff();
  const double floor = 1e-12 * a.cwiseAbs().maxCoeff();
  int used = 1;
  while (used < evaluations && step > floor) {
    bool improved = false;
    for (Eigen::Index i = 0; i < a.rows() && used < evaluations; ++i) {
      for (Eigen::Index j = 0; j < a.cols() && used < evaluations; ++j) {
        for (double dir : {1.0, -1.0}) {
          const double saved = a(i, j);
          a(i, j) = saved + dir * step;
          const double v = safe_psi(a, ms);
          ++used;
          if (v < value) {
            value = v;
            improved = true;
            break;
          }
          a(i, j) = saved;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return a;
}

}  // namespace

GeneralSearchResult search_transform_general(std::span<const SymMatrix> ms,
                                             const GeneralSearchOptions& options) {
  if (ms.empty()) throw InvalidArgument("search_transform_general: empty family");
  const auto d = static_cast<Eigen::Index>(ms.front().dim());
  for (const auto& m : ms) {
    if (static_cast<Eigen::Index>(m.dim()) != d) {
      throw InvalidArgument("search_transform_general: dimension mismatch");
    }
  }

  std::vector<Matrix> starts;
  starts.push_back(Matrix::Identity(d, d));
  starts.push_back(refine_commuting(Matrix::Identity(d, d), ms));
  Matrix total = Matrix::Zero(d, d);
  for (const auto& m : ms) total += m.matrix();
  starts.push_back(refine_commuting(ridge_whiten(SymMatrix::symmetrized(total)), ms));
  for (const auto& m : ms) starts.push_back(refine_commuting(ridge_whiten(m), ms));
  Rng rng(options.seed);
  for (int r = 0; r < options.restarts; ++r) {
    Matrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.normal();
    }
    starts.push_back(g);
  }

  GeneralSearchResult result;
  double best = std::numeric_limits<double>::infinity();
  Matrix best_a;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    double value = 0.0;
    Matrix a = pattern_search(starts[s], ms, options.evaluations, value);
    if (value < best) {
      best = value;
      best_a = std::move(a);
      result.start_index = static_cast<int>(s);
    }
  }
  result.best = make_transform_report(best_a / best_a.cwiseAbs().maxCoeff(), ms);
  return result;
}

}  // namespace siwalk
