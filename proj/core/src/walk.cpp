#include "siwalk/walk.hpp"

#include <cmath>

#include "siwalk/errors.hpp"

namespace siwalk {

namespace {

void check_family(std::span<const FiniteMeasure> measures) {
  if (measures.empty()) throw InvalidArgument("walk: empty measure family");
  for (const auto& mu : measures) {
    if (mu.dim() != measures.front().dim()) throw InvalidArgument("walk: dimension mismatch");
  }
}

std::size_t checked_choice(std::size_t j, std::size_t k) {
  if (j >= k) throw InvalidArgument("walk: rule chose measure " + std::to_string(j) + " of " + std::to_string(k));
  return j;
}

}  // namespace

Trajectory simulate(std::span<const FiniteMeasure> measures, AdaptedRule& rule, std::size_t steps,
                    std::uint64_t seed) {
  check_family(measures);
  Trajectory path;
  path.seed = seed;
  path.positions.reserve(steps + 1);
  path.choices.reserve(steps);
  path.positions.push_back(Vector::Zero(static_cast<Eigen::Index>(measures.front().dim())));
  Rng rng(seed);
  for (std::size_t i = 0; i < steps; ++i) {
    const WalkHistory history{path.positions, path.choices};
    const std::size_t j = checked_choice(rule.choose(history, rng), measures.size());
    const Vector& z = sample(measures[j], rng);
    path.positions.push_back(path.positions.back() + z);
    path.choices.push_back(j);
  }
  return path;
}

StreamTrajectory simulate_stream_model(std::span<const FiniteMeasure> measures, AdaptedRule& rule,
                                       std::size_t steps, std::uint64_t seed) {
  check_family(measures);
  const std::size_t k = measures.size();
  StreamTrajectory out;
  Trajectory& path = out.path;
  path.seed = seed;
  path.positions.push_back(Vector::Zero(static_cast<Eigen::Index>(measures.front().dim())));
  Rng rule_rng(derive_seed(seed, 0));
  std::vector<Rng> streams;
  streams.reserve(k);
  for (std::size_t j = 0; j < k; ++j) streams.emplace_back(derive_seed(seed, j + 1));

  std::vector<std::size_t> counters(k, 0);
  out.counters.push_back(counters);
  for (std::size_t i = 0; i < steps; ++i) {
    const WalkHistory history{path.positions, path.choices};
    const std::size_t j = checked_choice(rule.choose(history, rule_rng), k);
    // Stream j's next unused variable: its generator has produced exactly counters[j] draws.
    const Vector& z = sample(measures[j], streams[j]);
    ++counters[j];
    path.positions.push_back(path.positions.back() + z);
    path.choices.push_back(j);
    out.counters.push_back(counters);
  }
  return out;
}

std::size_t rho(const Vector& x) {
  std::size_t lead = 0;
  for (Eigen::Index k = 1; k < x.size(); ++k) {
    if (std::abs(x(k)) > std::abs(x(static_cast<Eigen::Index>(lead)))) lead = static_cast<std::size_t>(k);
  }
  return lead;
}

FiniteMeasure gamma_walk_step_distribution(const Vector& x, double gamma, std::size_t dim) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be positive");
  if (static_cast<std::size_t>(x.size()) != dim) throw InvalidArgument("gamma walk: dimension mismatch");
  const std::size_t lead = rho(x);
  const Rational g(gamma);
  const Rational denom = 2 * (g + Rational(static_cast<long long>(dim) - 1));
  std::vector<Vector> points;
  std::vector<Rational> weights;
  const auto d = static_cast<Eigen::Index>(dim);
  for (Eigen::Index k = 0; k < d; ++k) {
    const Rational w = (static_cast<std::size_t>(k) == lead ? g : Rational(1)) / denom;
    for (double sign : {1.0, -1.0}) {
      Vector e = Vector::Zero(d);
      e(k) = sign;
      points.push_back(std::move(e));
      weights.push_back(w);
    }
  }
  return FiniteMeasure::with_exact_weights(dim, std::move(points), std::move(weights));
}

void run_generic_walk(std::span<const FiniteMeasure> measures, AdaptedRule& rule,
                      std::size_t steps, std::uint64_t seed, const StepObserver& observer) {
  check_family(measures);
  std::vector<Vector> positions{Vector::Zero(static_cast<Eigen::Index>(measures.front().dim()))};
  std::vector<std::size_t> choices;
  positions.reserve(steps + 1);
  choices.reserve(steps);
  if (!observer(0, positions.back())) return;
  Rng rng(seed);
  for (std::size_t i = 0; i < steps; ++i) {
    const WalkHistory history{positions, choices};
    const std::size_t j = checked_choice(rule.choose(history, rng), measures.size());
    positions.push_back(positions.back() + sample(measures[j], rng));
    choices.push_back(j);
    if (!observer(i + 1, positions.back())) return;
  }
}

namespace {

/// Draws the gamma-walk step at x: returns (coordinate, sign) via one atom index 2k + (sign < 0).
std::size_t gamma_step(const Vector& x, double gamma, Rng& rng) {
  const auto d = static_cast<std::size_t>(x.size());
  const std::size_t lead = rho(x);
  const double u = rng.uniform() * (gamma + static_cast<double>(d) - 1.0);
  std::size_t coord = lead;
  if (u >= gamma) {
    auto other = static_cast<std::size_t>(u - gamma);
    if (other > d - 2) other = d - 2;
    coord = other < lead ? other : other + 1;
  }
  const std::size_t negative = rng() >> 63;
  return 2 * coord + negative;
}

}  // namespace

void run_gamma_walk(std::size_t dim, double gamma, std::size_t steps, std::uint64_t seed,
                    const StepObserver& observer) {
  if (dim == 0) throw InvalidArgument("gamma walk: dimension must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be positive");
  Vector x = Vector::Zero(static_cast<Eigen::Index>(dim));
  if (!observer(0, x)) return;
  Rng rng(seed);
  for (std::size_t i = 0; i < steps; ++i) {
    const std::size_t atom = gamma_step(x, gamma, rng);
    x(static_cast<Eigen::Index>(atom / 2)) += (atom % 2 == 0) ? 1.0 : -1.0;
    if (!observer(i + 1, x)) return;
  }
}

Trajectory simulate_gamma_walk(std::size_t dim, double gamma, std::size_t steps,
                               std::uint64_t seed) {
  Trajectory path;
  path.seed = seed;
  path.positions.reserve(steps + 1);
  run_gamma_walk(dim, gamma, steps, seed, [&path](std::size_t t, const Vector& x) {
    if (t > 0) {
      const Vector delta = x - path.positions.back();
      Eigen::Index k = 0;
      delta.cwiseAbs().maxCoeff(&k);
      path.choices.push_back(2 * static_cast<std::size_t>(k) + (delta(k) < 0 ? 1 : 0));
    }
    path.positions.push_back(x);
    return true;
  });
  return path;
}

void run_cap_walk(const CapSystem& caps, double eps, std::size_t steps, std::uint64_t seed,
                  const StepObserver& observer) {
  if (caps.caps.empty()) throw InvalidArgument("cap walk: empty cap system");
  if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidArgument("cap walk: eps must lie in [0, 1]");
  Vector x = Vector::Zero(static_cast<Eigen::Index>(caps.dim));
  if (!observer(0, x)) return;
  Rng rng(seed);
  for (std::size_t i = 0; i < steps; ++i) {
    x = cap_walk_step(x, caps, eps, rng);
    if (!observer(i + 1, x)) return;
  }
}

Trajectory simulate_cap_walk(const CapSystem& caps, double eps, std::size_t steps,
                             std::uint64_t seed) {
  Trajectory path;
  path.seed = seed;
  path.positions.reserve(steps + 1);
  run_cap_walk(caps, eps, steps, seed, [&](std::size_t t, const Vector& x) {
    if (t > 0) path.choices.push_back(caps.owner(path.positions.back()));
    path.positions.push_back(x);
    return true;
  });
  return path;
}

}  // namespace siwalk
