#include "siwalk/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "siwalk/errors.hpp"
#include "siwalk/jacobi.hpp"

namespace siwalk {

namespace {

constexpr double kWeightSumTol = 1e-9;

void check_points(std::size_t dim, const std::vector<Atom>& atoms) {
  if (dim == 0) throw InvalidArgument("measure dimension must be positive");
  if (atoms.empty()) throw InvalidArgument("measure needs at least one atom");
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (static_cast<std::size_t>(atoms[i].point.size()) != dim) {
      std::ostringstream msg;
      msg << "atom " << i << " has " << atoms[i].point.size() << " coordinates, expected " << dim;
      throw InvalidArgument(msg.str());
    }
    if (!atoms[i].point.allFinite()) throw InvalidArgument("atom coordinates must be finite");
  }
}

}  // namespace

FiniteMeasure::FiniteMeasure(std::size_t dim, std::vector<Atom> atoms)
    : dim_(dim), atoms_(std::move(atoms)) {
  check_points(dim_, atoms_);
  double total = 0.0;
  for (const auto& a : atoms_) {
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
      throw InvalidArgument("atom weights must be positive");
    }
    total += a.weight;
  }
  if (std::abs(total - 1.0) > kWeightSumTol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "atom weights sum to " << total << ", expected 1";
    throw InvalidArgument(msg.str());
  }
  for (auto& a : atoms_) a.weight /= total;
  finish();
}

FiniteMeasure FiniteMeasure::with_exact_weights(std::size_t dim, std::vector<Vector> points,
                                                std::vector<Rational> weights) {
  if (points.size() != weights.size()) {
    throw InvalidArgument("exact weights: point and weight counts differ");
  }
  Rational total = 0;
  for (const auto& w : weights) {
    if (w <= 0) throw InvalidArgument("exact weights must be positive");
    total += w;
  }
  if (total != 1) throw InvalidArgument("exact weights must sum to exactly 1");
  FiniteMeasure mu;
  mu.dim_ = dim;
  mu.atoms_.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    mu.atoms_.push_back({std::move(points[i]), weights[i].convert_to<double>()});
  }
  check_points(dim, mu.atoms_);
  mu.exact_ = std::move(weights);
  mu.finish();
  return mu;
}

void FiniteMeasure::finish() {
  cumulative_.resize(atoms_.size());
  double running = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    running += atoms_[i].weight;
    cumulative_[i] = running;
  }
}

std::vector<Rational> FiniteMeasure::rational_weights() const {
  if (exact_) return *exact_;
  std::vector<Rational> out;
  out.reserve(atoms_.size());
  Rational total = 0;
  for (const auto& a : atoms_) {
    out.emplace_back(a.weight);  // exact binary value of the double
    total += out.back();
  }
  for (auto& w : out) w /= total;
  return out;
}

double FiniteMeasure::support_radius() const {
  double r = 0.0;
  for (const auto& a : atoms_) r = std::max(r, a.point.norm());
  return r;
}

std::size_t FiniteMeasure::sample_index(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) return atoms_.size() - 1;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

Vector mean(const FiniteMeasure& mu) {
  Vector m = Vector::Zero(static_cast<Eigen::Index>(mu.dim()));
  for (const auto& a : mu.atoms()) m += a.weight * a.point;
  return m;
}

SymMatrix covariance(const FiniteMeasure& mu) {
  const Vector m = mean(mu);
  const auto d = static_cast<Eigen::Index>(mu.dim());
  Matrix c = Matrix::Zero(d, d);
  for (const auto& a : mu.atoms()) {
    const Vector z = a.point - m;
    c.noalias() += a.weight * z * z.transpose();
  }
  return SymMatrix::symmetrized(c);
}

bool is_full_dimensional(const FiniteMeasure& mu, double tol) {
  return lambda_min(covariance(mu)) > tol;
}

double moment(const FiniteMeasure& mu, double p) {
  if (p < 0.0) throw InvalidArgument("moment exponent must be non-negative");
  double s = 0.0;
  for (const auto& a : mu.atoms()) {
    const double n = a.point.norm();
    s += a.weight * (p == 0.0 ? 1.0 : std::pow(n, p));
  }
  return s;
}

FiniteMeasure pushforward(const Matrix& a, const FiniteMeasure& mu) {
  if (a.cols() != static_cast<Eigen::Index>(mu.dim()) || a.rows() == 0) {
    std::ostringstream msg;
    msg << "pushforward: matrix is " << a.rows() << "x" << a.cols() << ", measure dimension is "
        << mu.dim();
    throw InvalidArgument(msg.str());
  }
  const auto out_dim = static_cast<std::size_t>(a.rows());
  if (mu.has_exact_weights()) {
    std::vector<Vector> points;
    points.reserve(mu.size());
    for (const auto& at : mu.atoms()) points.emplace_back(a * at.point);
    return FiniteMeasure::with_exact_weights(out_dim, std::move(points), mu.rational_weights());
  }
  std::vector<Atom> atoms;
  atoms.reserve(mu.size());
  for (const auto& at : mu.atoms()) atoms.push_back({a * at.point, at.weight});
  return FiniteMeasure(out_dim, std::move(atoms));
}

const Vector& sample(const FiniteMeasure& mu, Rng& rng) { return mu.point(mu.sample_index(rng)); }

FiniteMeasure simple_random_walk_measure(std::size_t dim) {
  if (dim == 0) throw InvalidArgument("dimension must be positive");
  std::vector<Vector> points;
  std::vector<Rational> weights;
  const auto d = static_cast<Eigen::Index>(dim);
  for (Eigen::Index k = 0; k < d; ++k) {
    for (double sign : {1.0, -1.0}) {
      Vector e = Vector::Zero(d);
      e(k) = sign;
      points.push_back(std::move(e));
      weights.emplace_back(1, 2 * static_cast<long long>(dim));
    }
  }
  return FiniteMeasure::with_exact_weights(dim, std::move(points), std::move(weights));
}

FiniteMeasure measure_with_covariance(const SymMatrix& m) {
  const Eigen::LLT<Matrix> llt(m.matrix());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("measure_with_covariance: matrix is not positive definite");
  }
  const Matrix l = llt.matrixL();
  const auto d = static_cast<Eigen::Index>(m.dim());
  const double scale = std::sqrt(static_cast<double>(d));
  std::vector<Atom> atoms;
  for (Eigen::Index j = 0; j < d; ++j) {
    const Vector column = scale * l.col(j);
    atoms.push_back({column, 1.0 / (2.0 * static_cast<double>(d))});
    atoms.push_back({-column, 1.0 / (2.0 * static_cast<double>(d))});
  }
  return FiniteMeasure(m.dim(), std::move(atoms));
}

bool is_lattice_measure(const FiniteMeasure& mu) {
  for (const auto& a : mu.atoms()) {
    for (Eigen::Index i = 0; i < a.point.size(); ++i) {
      if (a.point(i) != std::round(a.point(i))) return false;
    }
  }
  return true;
}

}  // namespace siwalk
