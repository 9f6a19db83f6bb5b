#include "siwalk/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "siwalk/caps.hpp"
#include "siwalk/errors.hpp"
#include "siwalk/io.hpp"
#include "siwalk/parallel.hpp"
#include "siwalk/rules.hpp"
#include "siwalk/walk.hpp"

namespace siwalk {

void ExperimentConfig::validate() const {
  if (trials < 1) throw InvalidArgument("experiment: trials must be at least 1");
  if (horizon < 1) throw InvalidArgument("experiment: horizon T must be at least 1");
  if (!(return_radius >= 0.0)) throw InvalidArgument("experiment: return radius r must be >= 0");
  if (!(return_radius < escape_radius)) throw InvalidArgument("experiment: need r < R");
  if (walk.dim == 0) throw InvalidArgument("experiment: dimension must be positive");
  switch (walk.kind) {
    case WalkKind::generic:
      if (walk.measures.empty()) throw InvalidArgument("experiment: generic walk needs measures");
      for (const auto& mu : walk.measures) {
        if (mu.dim() != walk.dim) throw InvalidArgument("experiment: measure dimension mismatch");
      }
      break;
    case WalkKind::gamma:
      if (!(walk.gamma > 0.0)) throw InvalidArgument("experiment: gamma must be positive");
      break;
    case WalkKind::cap:
      if (!(walk.eps >= 0.0 && walk.eps <= 1.0)) throw InvalidArgument("experiment: eps must lie in [0, 1]");
      if (!(walk.theta > 0.0 && walk.theta < std::atan(1.0))) {
        throw InvalidArgument("experiment: theta must lie in (0, pi/4)");
      }
      if (walk.dim < 2) throw InvalidArgument("experiment: cap walk needs d >= 2");
      break;
  }
}

namespace {

CapSystem caps_for(const WalkSpec& walk) {
  Rng rng(walk.cap_seed);
  return build_cap_system(walk.dim, walk.theta, rng);
}

TrialStats trial_with(const ExperimentConfig& cfg, std::size_t trial, const CapSystem* caps) {
  TrialStats stats;
  stats.trial = trial;
  const double r2 = cfg.return_radius * cfg.return_radius;
  const double big_r2 = cfg.escape_radius * cfg.escape_radius;
  double last_norm2 = 0.0;
  const StepObserver observer = [&](std::size_t t, const Vector& x) {
    const double n2 = x.squaredNorm();
    last_norm2 = n2;
    if (!stats.exit_time) {
      if (n2 > big_r2) stats.exit_time = t;
    } else if (n2 <= r2) {
      stats.returned = true;
      ++stats.return_count;
    }
    return true;
  };
  const std::uint64_t seed = derive_seed(cfg.seed, trial);
  switch (cfg.walk.kind) {
    case WalkKind::generic: {
      auto rule = make_rule(cfg.walk.rule, cfg.walk.measures);
      run_generic_walk(cfg.walk.measures, *rule, cfg.horizon, seed, observer);
      break;
    }
    case WalkKind::gamma:
      run_gamma_walk(cfg.walk.dim, cfg.walk.gamma, cfg.horizon, seed, observer);
      break;
    case WalkKind::cap:
      run_cap_walk(*caps, cfg.walk.eps, cfg.horizon, seed, observer);
      break;
  }
  stats.final_norm = std::sqrt(last_norm2);
  return stats;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                   : pairwise_sum(v) / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v, double m) {
  if (v.size() < 2) return 0.0;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
  const double var = pairwise_sum(sq) / static_cast<double>(v.size() - 1);
  return std::sqrt(var / static_cast<double>(v.size()));
}

/// Linear interpolation between order statistics.
double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

TrialStats run_trial(const ExperimentConfig& cfg, std::size_t trial) {
  cfg.validate();
  if (cfg.walk.kind == WalkKind::cap) {
    const CapSystem caps = caps_for(cfg.walk);
    return trial_with(cfg, trial, &caps);
  }
  return trial_with(cfg, trial, nullptr);
}

ReturnStats summarize(std::vector<TrialStats> trials) {
  std::sort(trials.begin(), trials.end(),
            [](const TrialStats& a, const TrialStats& b) { return a.trial < b.trial; });
  ReturnStats s;
  const std::size_t n = trials.size();
  if (n == 0) {
    s.escape_fraction = s.return_frequency = s.mean_return_count = s.mean_exit_time =
        s.mean_final_norm = s.final_norm_q10 = s.final_norm_q50 = s.final_norm_q90 =
            std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  std::vector<double> escaped, returned, counts, exits, norms;
  for (const auto& t : trials) {
    escaped.push_back(t.exit_time ? 1.0 : 0.0);
    returned.push_back(t.returned ? 1.0 : 0.0);
    counts.push_back(static_cast<double>(t.return_count));
    if (t.exit_time) exits.push_back(static_cast<double>(*t.exit_time));
    norms.push_back(t.final_norm);
  }
  const double dn = static_cast<double>(n);
  s.escape_fraction = mean_of(escaped);
  s.return_frequency = mean_of(returned);
  s.return_stderr = std::sqrt(s.return_frequency * (1.0 - s.return_frequency) / dn);
  s.mean_return_count = mean_of(counts);
  s.return_count_stderr = stderr_of(counts, s.mean_return_count);
  s.mean_exit_time = mean_of(exits);
  s.mean_final_norm = mean_of(norms);
  s.final_norm_stderr = stderr_of(norms, s.mean_final_norm);
  s.final_norm_q10 = quantile(norms, 0.1);
  s.final_norm_q50 = quantile(norms, 0.5);
  s.final_norm_q90 = quantile(norms, 0.9);
  s.trials = std::move(trials);
  return s;
}

ReturnStats run_return_experiment(const ExperimentConfig& cfg, std::size_t threads) {
  cfg.validate();
  std::optional<CapSystem> caps;
  if (cfg.walk.kind == WalkKind::cap) caps = caps_for(cfg.walk);
  std::vector<TrialStats> trials(cfg.trials);
  parallel_for(cfg.trials, threads, [&](std::size_t i) {
    trials[i] = trial_with(cfg, i, caps ? &*caps : nullptr);
  });
  ReturnStats stats = summarize(std::move(trials));
  if (!cfg.output_path.empty()) emit_to_file(stats, OutputFormat::csv, cfg.output_path);
  return stats;
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, const SweepGrid& grid,
                            std::size_t threads) {
  static const char* const known[] = {"gamma", "eps", "theta", "horizon", "return_radius",
                                      "escape_radius"};
  if (std::find(std::begin(known), std::end(known), grid.parameter) == std::end(known)) {
    throw InvalidArgument("sweep: unknown parameter " + grid.parameter);
  }
  if (grid.values.empty()) throw InvalidArgument("sweep: empty grid");
  std::vector<SweepRow> rows;
  for (double value : grid.values) {
    ExperimentConfig cfg = base;
    cfg.output_path.clear();
    if (grid.parameter == "gamma") cfg.walk.gamma = value;
    else if (grid.parameter == "eps") cfg.walk.eps = value;
    else if (grid.parameter == "theta") cfg.walk.theta = value;
    else if (grid.parameter == "horizon") {
      if (!(value >= 1.0) || value != std::floor(value)) throw InvalidArgument("sweep: horizon must be a positive integer");
      cfg.horizon = static_cast<std::size_t>(value);
    } else if (grid.parameter == "return_radius") cfg.return_radius = value;
    else cfg.escape_radius = value;
    cfg.seed = derive_seed(base.seed, std::bit_cast<std::uint64_t>(value));
    rows.push_back({grid.parameter, value, run_return_experiment(cfg, threads)});
  }
  return rows;
}

OutputFormat parse_output_format(const std::string& name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw InvalidArgument("unknown output format " + name + " (expected csv or json)");
}

void emit(const ReturnStats& stats, OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::json) {
    out << dump_json(stats_to_json(stats)) << '\n';
    return;
  }
  out << kTrialCsvHeader << '\n';
  for (const auto& t : stats.trials) {
    out << t.trial << ',' << (t.exit_time ? std::to_string(*t.exit_time) : std::string("-1")) << ','
        << (t.returned ? 1 : 0) << ',' << t.return_count << ',' << format_double(t.final_norm)
        << '\n';
  }
}

void emit(const std::vector<SweepRow>& rows, OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::json) {
    Json arr = Json::array();
    for (const auto& r : rows) {
      arr.push_back({{"parameter", r.parameter}, {"value", r.value}, {"stats", stats_to_json(r.stats)}});
    }
    out << dump_json(arr) << '\n';
    return;
  }
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    const ReturnStats& s = r.stats;
    out << r.parameter << ',' << format_double(r.value) << ',' << s.trials.size() << ','
        << format_double(s.escape_fraction) << ',' << format_double(s.return_frequency) << ','
        << format_double(s.return_stderr) << ',' << format_double(s.mean_return_count) << ','
        << format_double(s.mean_exit_time) << ',' << format_double(s.mean_final_norm) << '\n';
  }
}

namespace {

template <class T>
void emit_file(const T& value, OutputFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open output file " + path);
  emit(value, format, out);
  out.flush();
  if (!out) throw Error("failed writing output file " + path);
}

}  // namespace

void emit_to_file(const ReturnStats& stats, OutputFormat format, const std::string& path) {
  emit_file(stats, format, path);
}

void emit_to_file(const std::vector<SweepRow>& rows, OutputFormat format, const std::string& path) {
  emit_file(rows, format, path);
}

}  // namespace siwalk
