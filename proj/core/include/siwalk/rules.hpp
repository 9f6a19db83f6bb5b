#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "siwalk/measure.hpp"
#include "siwalk/rng.hpp"
#include "siwalk/types.hpp"

namespace siwalk {

/// What a rule may look at when choosing step i: X_0 .. X_i and the i past choices.
struct WalkHistory {
  std::span<const Vector> positions;
  std::span<const std::size_t> choices;

  std::size_t time() const { return choices.size(); }
  const Vector& current() const { return positions.back(); }
};

/// Adapted measure-selection rule. `choose` is called exactly once per step, in
/// time order, and returns a 0-based measure index. Rules may keep state built
/// from the history they have been shown; `clone` copies that state so parallel
/// trials and enumeration branches never share it.
class AdaptedRule {
 public:
  virtual ~AdaptedRule() = default;

  virtual std::size_t choose(const WalkHistory& history, Rng& rng) = 0;
  /// True if `choose` never consumes randomness.
  virtual bool deterministic() const = 0;
  virtual std::unique_ptr<AdaptedRule> clone() const = 0;
  virtual std::string name() const = 0;
  virtual nlohmann::json state() const = 0;
};

class ConstantRule final : public AdaptedRule {
 public:
  explicit ConstantRule(std::size_t index) : index_(index) {}

  std::size_t choose(const WalkHistory&, Rng&) override { return index_; }
  bool deterministic() const override { return true; }
  std::unique_ptr<AdaptedRule> clone() const override;
  std::string name() const override { return "constant"; }
  nlohmann::json state() const override;

 private:
  std::size_t index_;
};

/// l(i) = i mod k.
class AlternatingRule final : public AdaptedRule {
 public:
  explicit AlternatingRule(std::size_t count);

  std::size_t choose(const WalkHistory& history, Rng&) override;
  bool deterministic() const override { return true; }
  std::unique_ptr<AdaptedRule> clone() const override;
  std::string name() const override { return "alternating"; }
  nlohmann::json state() const override;

 private:
  std::size_t count_;
};

/// Measure 0 on the first visit to a site, measure 1 on every later visit.
class FirstVisitRule final : public AdaptedRule {
 public:
  FirstVisitRule() = default;

  std::size_t choose(const WalkHistory& history, Rng&) override;
  bool deterministic() const override { return true; }
  std::unique_ptr<AdaptedRule> clone() const override;
  std::string name() const override { return "first-visit"; }
  nlohmann::json state() const override;

  std::size_t visited_count() const { return visited_.size(); }

 private:
  std::set<std::vector<long long>> visited_;
};

/// Uniformly random index; the one non-deterministic rule.
class RandomRule final : public AdaptedRule {
 public:
  explicit RandomRule(std::size_t count);

  std::size_t choose(const WalkHistory&, Rng& rng) override;
  bool deterministic() const override { return false; }
  std::unique_ptr<AdaptedRule> clone() const override;
  std::string name() const override { return "random"; }
  nlohmann::json state() const override;

 private:
  std::size_t count_;
};

using Potential = std::function<double(const Vector&)>;

/// Picks the measure with the smallest exact expected potential increment at
/// the current position; ties go to the smallest index.
class GreedyAdversaryRule final : public AdaptedRule {
 public:
  GreedyAdversaryRule(std::vector<FiniteMeasure> measures, Potential potential);

  std::size_t choose(const WalkHistory& history, Rng&) override;
  bool deterministic() const override { return true; }
  std::unique_ptr<AdaptedRule> clone() const override;
  std::string name() const override { return "greedy-adversary"; }
  nlohmann::json state() const override;

  /// The choice at an arbitrary point, without touching any history.
  std::size_t choose_at(const Vector& x) const;

 private:
  std::vector<FiniteMeasure> measures_;
  Potential potential_;
};

/// First-visit rule for two lattice measures; InvalidArgument on non-integer atoms.
std::unique_ptr<AdaptedRule> first_visit_rule(std::span<const FiniteMeasure> measures);

std::unique_ptr<AdaptedRule> greedy_adversary_rule(std::span<const FiniteMeasure> measures,
                                                   Potential potential);

/// "constant:<j>", "alternating", "first-visit", "random".
std::unique_ptr<AdaptedRule> make_rule(const std::string& spec,
                                       std::span<const FiniteMeasure> measures);

}  // namespace siwalk
