#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "siwalk/caps.hpp"
#include "siwalk/cov_transform.hpp"
#include "siwalk/harness.hpp"
#include "siwalk/lyapunov.hpp"
#include "siwalk/measure.hpp"
#include "siwalk/sym_matrix.hpp"
#include "siwalk/types.hpp"

namespace siwalk {

using Json = nlohmann::json;

/// Shortest round-trip form is not used; every double is written with 17
/// significant digits so output bytes depend only on the value.
std::string format_double(double value);

/// Measure file: {"dim": d, "atoms": [{"point": [...], "weight": w}, ...]}.
/// Rejects weight sums deviating from 1 by more than 1e-9.
FiniteMeasure measure_from_json(const Json& j);
Json measure_to_json(const FiniteMeasure& mu);

Matrix matrix_from_json(const Json& j);
Json matrix_to_json(const Matrix& m);
Json vector_to_json(const Vector& v);

/// Accepts a JSON array of rows, "diag(a,b,...)" or "I<d>" (identity).
Matrix parse_matrix(const std::string& text);

/// {"A": [[...]], "margins": [...], "psi": p, "per_measure": [...], "pass": bool}.
Json report_to_json(const TransformReport& report);

Json drift_scan_to_json(const DriftScan& scan);

/// {"type": "generic"|"gamma"|"cap", "dim", "measures", "rule", "gamma", "eps",
///  "theta", "cap_seed"}.
WalkSpec walk_spec_from_json(const Json& j);
Json walk_spec_to_json(const WalkSpec& spec);

/// Walk spec fields plus "trials", "T", "r", "R", "seed", "output".
ExperimentConfig experiment_from_json(const Json& j);

/// Mirrors ReturnStats, tagged "schema": 1.
Json stats_to_json(const ReturnStats& stats);
ReturnStats stats_from_json(const Json& j);

Json cap_system_to_json(const CapSystem& caps);

/// Serializes with fixed formatting (17 significant digits, 2-space indent).
std::string dump_json(const Json& j);

Json read_json_file(const std::string& path);

}  // namespace siwalk
