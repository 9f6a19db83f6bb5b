#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "siwalk/measure.hpp"
#include "siwalk/rational.hpp"
#include "siwalk/rules.hpp"

namespace siwalk {

/// Endpoint coordinates, compared lexicographically. Atoms used with the
/// enumerators should be exactly representable sums (integers, dyadics) so
/// that equal endpoints reached along different paths share one key.
using EndpointKey = std::vector<double>;
using EndpointDistribution = std::map<EndpointKey, Rational>;

inline constexpr std::size_t kMaxEnumerationLeaves = 10'000'000;
inline constexpr std::size_t kMaxEnumerationSteps = 6;

/// Exact law of X_T by walking the full choice tree of the adapted-rule walk.
/// The rule must be deterministic; it is cloned at every branch.
EndpointDistribution enumerate_distribution(std::span<const FiniteMeasure> measures,
                                            const AdaptedRule& rule, std::size_t steps);

/// Exact law of X_T in the stream formulation: enumerates every assignment of
/// the first T variables of each of the k i.i.d. streams and replays the rule.
EndpointDistribution enumerate_stream_distribution(std::span<const FiniteMeasure> measures,
                                                   const AdaptedRule& rule, std::size_t steps);

Rational total_mass(const EndpointDistribution& dist);

/// Sum of |p - q| / 2 over the union of supports.
Rational total_variation(const EndpointDistribution& p, const EndpointDistribution& q);

}  // namespace siwalk
