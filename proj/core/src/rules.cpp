#include "siwalk/rules.hpp"

#include <cmath>

#include "siwalk/errors.hpp"

namespace siwalk {

std::unique_ptr<AdaptedRule> ConstantRule::clone() const {
  return std::make_unique<ConstantRule>(*this);
}

nlohmann::json ConstantRule::state() const { return {{"index", index_}}; }

AlternatingRule::AlternatingRule(std::size_t count) : count_(count) {
  if (count == 0) throw InvalidArgument("AlternatingRule: need at least one measure");
}

std::size_t AlternatingRule::choose(const WalkHistory& history, Rng&) {
  return history.time() % count_;
}

std::unique_ptr<AdaptedRule> AlternatingRule::clone() const {
  return std::make_unique<AlternatingRule>(*this);
}

nlohmann::json AlternatingRule::state() const { return {{"count", count_}}; }

namespace {

std::vector<long long> site_of(const Vector& x) {
  std::vector<long long> site(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) site[static_cast<std::size_t>(i)] = std::llround(x(i));
  return site;
}

}  // namespace

std::size_t FirstVisitRule::choose(const WalkHistory& history, Rng&) {
  const bool fresh = visited_.insert(site_of(history.current())).second;
  return fresh ? 0 : 1;
}

std::unique_ptr<AdaptedRule> FirstVisitRule::clone() const {
  return std::make_unique<FirstVisitRule>(*this);
}

nlohmann::json FirstVisitRule::state() const {
  nlohmann::json sites = nlohmann::json::array();
  for (const auto& s : visited_) sites.push_back(s);
  return {{"visited", sites}};
}

RandomRule::RandomRule(std::size_t count) : count_(count) {
  if (count == 0) throw InvalidArgument("RandomRule: need at least one measure");
}

std::size_t RandomRule::choose(const WalkHistory&, Rng& rng) {
  return static_cast<std::size_t>(rng.below(count_));
}

std::unique_ptr<AdaptedRule> RandomRule::clone() const {
  return std::make_unique<RandomRule>(*this);
}

nlohmann::json RandomRule::state() const { return {{"count", count_}}; }

GreedyAdversaryRule::GreedyAdversaryRule(std::vector<FiniteMeasure> measures, Potential potential)
    : measures_(std::move(measures)), potential_(std::move(potential)) {
  if (measures_.empty()) throw InvalidArgument("GreedyAdversaryRule: empty family");
  if (!potential_) throw InvalidArgument("GreedyAdversaryRule: missing potential");
}

std::size_t GreedyAdversaryRule::choose_at(const Vector& x) const {
  const double here = potential_(x);
  std::size_t best = 0;
  double best_value = 0.0;
  for (std::size_t j = 0; j < measures_.size(); ++j) {
    double drift = 0.0;
    for (const auto& atom : measures_[j].atoms()) {
      drift += atom.weight * (potential_(x + atom.point) - here);
    }
    if (j == 0 || drift < best_value) {
      best = j;
      best_value = drift;
    }
  }
  return best;
}

std::size_t GreedyAdversaryRule::choose(const WalkHistory& history, Rng&) {
  return choose_at(history.current());
}

std::unique_ptr<AdaptedRule> GreedyAdversaryRule::clone() const {
  return std::make_unique<GreedyAdversaryRule>(*this);
}

nlohmann::json GreedyAdversaryRule::state() const { return {{"measures", measures_.size()}}; }

std::unique_ptr<AdaptedRule> first_visit_rule(std::span<const FiniteMeasure> measures) {
  if (measures.size() != 2) throw InvalidArgument("first_visit_rule: needs exactly two measures");
  for (const auto& mu : measures) {
    if (!is_lattice_measure(mu)) {
      throw InvalidArgument("first_visit_rule: measures must have integer atoms");
    }
  }
  return std::make_unique<FirstVisitRule>();
}

std::unique_ptr<AdaptedRule> greedy_adversary_rule(std::span<const FiniteMeasure> measures,
                                                   Potential potential) {
  return std::make_unique<GreedyAdversaryRule>(
      std::vector<FiniteMeasure>(measures.begin(), measures.end()), std::move(potential));
}

std::unique_ptr<AdaptedRule> make_rule(const std::string& spec,
                                       std::span<const FiniteMeasure> measures) {
  const std::size_t k = measures.size();
  if (k == 0) throw InvalidArgument("make_rule: empty family");
  if (spec.rfind("constant", 0) == 0) {
    std::size_t index = 0;
    if (spec.size() > 8) {
      if (spec[8] != ':') throw InvalidArgument("make_rule: expected constant:<j>, got " + spec);
      try {
        std::size_t used = 0;
        index = std::stoul(spec.substr(9), &used);
        if (used != spec.size() - 9) throw std::invalid_argument(spec);
      } catch (const std::exception&) {
        throw InvalidArgument("make_rule: bad measure index in " + spec);
      }
    }
    if (index >= k) throw InvalidArgument("make_rule: measure index out of range in " + spec);
    return std::make_unique<ConstantRule>(index);
  }
  if (spec == "alternating") return std::make_unique<AlternatingRule>(k);
  if (spec == "first-visit") return first_visit_rule(measures);
  if (spec == "random") return std::make_unique<RandomRule>(k);
  throw InvalidArgument("make_rule: unknown rule " + spec);
}

}  // namespace siwalk
