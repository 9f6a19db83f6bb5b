#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "siwalk/caps.hpp"
#include "siwalk/measure.hpp"
#include "siwalk/rules.hpp"
#include "siwalk/types.hpp"

namespace siwalk {

/// X_0 = 0, X_1, ..., X_T and the T choices that produced them. For the
/// generic walk a choice is the measure index; for the gamma walk it is the
/// atom index of the step (+e_0, -e_0, +e_1, ...); for the cap walk it is the
/// owning cap.
struct Trajectory {
  std::vector<Vector> positions;
  std::vector<std::size_t> choices;
  std::uint64_t seed = 0;
};

/// Called with (t, X_t) for t = 0 .. T; return false to stop early.
using StepObserver = std::function<bool(std::size_t, const Vector&)>;

/// Walk generated by `measures` and `rule`: at each step the rule is consulted
/// on the history so far, then one atom of the chosen measure is drawn.
Trajectory simulate(std::span<const FiniteMeasure> measures, AdaptedRule& rule, std::size_t steps,
                    std::uint64_t seed);

struct StreamTrajectory {
  Trajectory path;
  /// counters[i][j] = r(j, i): draws taken from stream j during the first i steps.
  std::vector<std::vector<std::size_t>> counters;
};

/// The same law through pre-committed i.i.d. streams: stream j has its own
/// generator (seeded from derive_seed(seed, j + 1)) and step i consumes the next
/// unused variable of stream l(i).
StreamTrajectory simulate_stream_model(std::span<const FiniteMeasure> measures, AdaptedRule& rule,
                                       std::size_t steps, std::uint64_t seed);

/// Minimal index attaining max_j |x_j|.
std::size_t rho(const Vector& x);

/// Step law of the gamma walk at x: gamma / (2 (gamma + d - 1)) on +-e_rho(x) and
/// 1 / (2 (gamma + d - 1)) on the other +-e_k, with exact rational weights.
FiniteMeasure gamma_walk_step_distribution(const Vector& x, double gamma, std::size_t dim);

Trajectory simulate_gamma_walk(std::size_t dim, double gamma, std::size_t steps,
                               std::uint64_t seed);

Trajectory simulate_cap_walk(const CapSystem& caps, double eps, std::size_t steps,
                             std::uint64_t seed);

// Streaming variants: same draws as the Trajectory versions, but positions are
// only shown to `observer` and not stored.

void run_generic_walk(std::span<const FiniteMeasure> measures, AdaptedRule& rule,
                      std::size_t steps, std::uint64_t seed, const StepObserver& observer);
void run_gamma_walk(std::size_t dim, double gamma, std::size_t steps, std::uint64_t seed,
                    const StepObserver& observer);
void run_cap_walk(const CapSystem& caps, double eps, std::size_t steps, std::uint64_t seed,
                  const StepObserver& observer);

}  // namespace siwalk
