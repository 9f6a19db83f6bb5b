#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "siwalk/measure.hpp"

namespace siwalk {

enum class WalkKind { generic, gamma, cap };

struct WalkSpec {
  WalkKind kind = WalkKind::gamma;
  std::size_t dim = 3;
  // generic
  std::vector<FiniteMeasure> measures;
  std::string rule = "constant:0";
  // gamma
  double gamma = 1.0;
  // cap
  double eps = 0.05;
  double theta = 0.6;
  std::uint64_t cap_seed = 1;
};

/// Finite-horizon return experiment. A trial escapes when ||X_t|| > escape_radius
/// and returns when, after escaping, ||X_t|| <= return_radius.
struct ExperimentConfig {
  WalkSpec walk;
  std::size_t trials = 1;
  std::size_t horizon = 1000;
  double return_radius = 1.0;
  double escape_radius = 10.0;
  std::uint64_t seed = 1;
  /// Optional per-trial CSV destination written by run_return_experiment.
  std::string output_path;

  void validate() const;
};

struct TrialStats {
  std::size_t trial = 0;
  std::optional<std::size_t> exit_time;
  bool returned = false;
  /// Times t after the exit with ||X_t|| <= return_radius.
  std::size_t return_count = 0;
  double final_norm = 0.0;
};

/// Per-trial records plus aggregates. These are finite-horizon diagnostics,
/// not recurrence certificates.
struct ReturnStats {
  std::vector<TrialStats> trials;
  double escape_fraction = 0.0;
  double return_frequency = 0.0;
  /// sqrt(p (1 - p) / n).
  double return_stderr = 0.0;
  double mean_return_count = 0.0;
  double return_count_stderr = 0.0;
  /// Mean over trials that escaped; NaN if none did.
  double mean_exit_time = 0.0;
  double mean_final_norm = 0.0;
  double final_norm_stderr = 0.0;
  double final_norm_q10 = 0.0;
  double final_norm_q50 = 0.0;
  double final_norm_q90 = 0.0;
};

/// One trial of the configured walk; seeded with derive_seed(cfg.seed, trial).
TrialStats run_trial(const ExperimentConfig& cfg, std::size_t trial);

ReturnStats summarize(std::vector<TrialStats> trials);

/// Deterministic given the master seed, for any thread count. Writes the
/// per-trial CSV to cfg.output_path when set (Error on I/O failure).
ReturnStats run_return_experiment(const ExperimentConfig& cfg, std::size_t threads = 0);

struct SweepGrid {
  /// gamma | eps | theta | horizon | return_radius | escape_radius
  std::string parameter;
  std::vector<double> values;
};

struct SweepRow {
  std::string parameter;
  double value = 0.0;
  ReturnStats stats;
};

/// One experiment per grid value. The seed of a point depends only on the base
/// seed and the value, so duplicate values give identical rows and permuting
/// the grid permutes the rows.
std::vector<SweepRow> sweep(const ExperimentConfig& base, const SweepGrid& grid,
                            std::size_t threads = 0);

enum class OutputFormat { csv, json };

OutputFormat parse_output_format(const std::string& name);

/// Per-trial CSV (header trial,exit_time,returned,return_count,final_norm;
/// exit_time is -1 for trials that never escaped) or the JSON document.
void emit(const ReturnStats& stats, OutputFormat format, std::ostream& out);
/// Sweep table: one CSV row per grid point, or a JSON array of rows.
void emit(const std::vector<SweepRow>& rows, OutputFormat format, std::ostream& out);
void emit_to_file(const ReturnStats& stats, OutputFormat format, const std::string& path);
void emit_to_file(const std::vector<SweepRow>& rows, OutputFormat format,
                  const std::string& path);

inline constexpr const char* kTrialCsvHeader = "trial,exit_time,returned,return_count,final_norm";
inline constexpr const char* kSweepCsvHeader =
    "parameter,value,trials,escape_fraction,return_frequency,return_stderr,mean_return_count,"
    "mean_exit_time,mean_final_norm";

}  // namespace siwalk
