#include "siwalk/enumerate.hpp"

#include <cmath>

#include "siwalk/errors.hpp"

namespace siwalk {

namespace {

void check_inputs(std::span<const FiniteMeasure> measures, const AdaptedRule& rule,
                  std::size_t steps) {
  if (measures.empty()) throw InvalidArgument("enumerate: empty measure family");
  for (const auto& mu : measures) {
    if (mu.dim() != measures.front().dim()) throw InvalidArgument("enumerate: dimension mismatch");
  }
  if (!rule.deterministic()) throw InvalidArgument("enumerate: rule must be deterministic");
  if (steps > kMaxEnumerationSteps) {
    throw InvalidArgument("enumerate: at most " + std::to_string(kMaxEnumerationSteps) + " steps");
  }
}

EndpointKey key_of(const Vector& x) { return EndpointKey(x.data(), x.data() + x.size()); }

std::vector<std::vector<Rational>> exact_weights(std::span<const FiniteMeasure> measures) {
  std::vector<std::vector<Rational>> w;
  for (const auto& mu : measures) w.push_back(mu.rational_weights());
  return w;
}

struct TreeWalker {
  std::span<const FiniteMeasure> measures;
  std::vector<std::vector<Rational>> weights;
  std::size_t steps;
  EndpointDistribution out;
  std::vector<Vector> positions;
  std::vector<std::size_t> choices;
  Rng unused{0};

  void visit(const AdaptedRule& rule, const Rational& mass) {
    if (choices.size() == steps) {
      out[key_of(positions.back())] += mass;
      return;
    }
    auto here = rule.clone();
    const std::size_t j = here->choose(WalkHistory{positions, choices}, unused);
    if (j >= measures.size()) throw InvalidArgument("enumerate: rule chose an invalid measure");
    for (std::size_t a = 0; a < measures[j].size(); ++a) {
      positions.push_back(positions.back() + measures[j].point(a));
      choices.push_back(j);
      visit(*here, mass * weights[j][a]);
      positions.pop_back();
      choices.pop_back();
    }
  }
};

}  // namespace

EndpointDistribution enumerate_distribution(std::span<const FiniteMeasure> measures,
                                            const AdaptedRule& rule, std::size_t steps) {
  check_inputs(measures, rule, steps);
  std::size_t widest = 0;
  for (const auto& mu : measures) widest = std::max(widest, mu.size());
  if (std::pow(static_cast<double>(widest), static_cast<double>(steps)) >
      static_cast<double>(kMaxEnumerationLeaves)) {
    throw InvalidArgument("enumerate: tree exceeds the leaf limit");
  }
  TreeWalker walker{measures, exact_weights(measures), steps, {}, {}, {}};
  walker.positions.push_back(Vector::Zero(static_cast<Eigen::Index>(measures.front().dim())));
  walker.visit(rule, Rational(1));
  return walker.out;
}

EndpointDistribution enumerate_stream_distribution(std::span<const FiniteMeasure> measures,
                                                   const AdaptedRule& rule, std::size_t steps) {
  check_inputs(measures, rule, steps);
  const std::size_t k = measures.size();
  double leaves = 1.0;
  for (const auto& mu : measures) leaves *= std::pow(static_cast<double>(mu.size()), static_cast<double>(steps));
  if (leaves > static_cast<double>(kMaxEnumerationLeaves)) {
    throw InvalidArgument("enumerate: stream assignments exceed the leaf limit");
  }
  const auto weights = exact_weights(measures);
  const auto dim = static_cast<Eigen::Index>(measures.front().dim());

  // assignment[j * steps + t] = atom index of the t-th variable of stream j.
  std::vector<std::size_t> assignment(k * steps, 0);
  EndpointDistribution out;
  Rng unused(0);
  for (;;) {
    Rational mass = 1;
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t t = 0; t < steps; ++t) mass *= weights[j][assignment[j * steps + t]];
    }
    auto replay = rule.clone();
    std::vector<Vector> positions{Vector::Zero(dim)};
    std::vector<std::size_t> choices;
    std::vector<std::size_t> used(k, 0);
    for (std::size_t i = 0; i < steps; ++i) {
      const std::size_t j = replay->choose(WalkHistory{positions, choices}, unused);
      if (j >= k) throw InvalidArgument("enumerate: rule chose an invalid measure");
      const std::size_t atom = assignment[j * steps + used[j]++];
      positions.push_back(positions.back() + measures[j].point(atom));
      choices.push_back(j);
    }
    out[key_of(positions.back())] += mass;

    std::size_t v = 0;
    for (; v < assignment.size(); ++v) {
      const std::size_t j = v / steps;
      if (++assignment[v] < measures[j].size()) break;
      assignment[v] = 0;
    }
    if (v == assignment.size()) break;
  }
  return out;
}

Rational total_mass(const EndpointDistribution& dist) {
  Rational s = 0;
  for (const auto& [key, p] : dist) s += p;
  return s;
}

Rational total_variation(const EndpointDistribution& p, const EndpointDistribution& q) {
  Rational s = 0;
  for (const auto& [key, w] : p) {
    const auto it = q.find(key);
    s += abs(w - (it == q.end() ? Rational(0) : it->second));
  }
  for (const auto& [key, w] : q) {
    if (!p.contains(key)) s += w;
  }
  return s / 2;
}

}  // namespace siwalk
