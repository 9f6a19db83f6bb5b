#include "siwalk/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "siwalk/errors.hpp"

namespace siwalk {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw InvalidArgument(std::string("expected a number for ") + what);
  return j.get<double>();
}

Vector vector_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw InvalidArgument(std::string("expected an array for ") + what);
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what);
  return v;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("not a number: '" + t + "'");
  }
  if (used != t.size()) throw InvalidArgument("not a number: '" + t + "'");
  return v;
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const char* what) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw InvalidArgument(std::string("unknown key '") + key + "' in " + what);
  }
}

void write(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(key).dump() + ": ";
        write(value, out, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          write(j[i], out, indent);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        write(j[i], out, indent + 2);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

Json stats_aggregate(const ReturnStats& s) {
  return {{"escape_fraction", s.escape_fraction},
          {"return_frequency", s.return_frequency},
          {"return_stderr", s.return_stderr},
          {"mean_return_count", s.mean_return_count},
          {"return_count_stderr", s.return_count_stderr},
          {"mean_exit_time", s.mean_exit_time},
          {"mean_final_norm", s.mean_final_norm},
          {"final_norm_stderr", s.final_norm_stderr},
          {"final_norm_q10", s.final_norm_q10},
          {"final_norm_q50", s.final_norm_q50},
          {"final_norm_q90", s.final_norm_q90}};
}

double number_or_nan(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

FiniteMeasure measure_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("measure: expected a JSON object");
  check_keys(j, {"dim", "atoms"}, "measure");
  if (!j.contains("atoms") || !j["atoms"].is_array()) throw InvalidArgument("measure: missing atoms array");
  std::vector<Atom> atoms;
  for (const auto& a : j["atoms"]) {
    if (!a.is_object() || !a.contains("point") || !a.contains("weight")) {
      throw InvalidArgument("measure: every atom needs point and weight");
    }
    check_keys(a, {"point", "weight"}, "atom");
    atoms.push_back({vector_from_json(a["point"], "atom point"), number(a["weight"], "atom weight")});
  }
  std::size_t dim = atoms.empty() ? 0 : static_cast<std::size_t>(atoms.front().point.size());
  if (j.contains("dim")) {
    if (!j["dim"].is_number_unsigned()) throw InvalidArgument("measure: dim must be a positive integer");
    dim = j["dim"].get<std::size_t>();
  }
  return FiniteMeasure(dim, std::move(atoms));
}

Json measure_to_json(const FiniteMeasure& mu) {
  Json atoms = Json::array();
  for (const auto& a : mu.atoms()) atoms.push_back({{"point", vector_to_json(a.point)}, {"weight", a.weight}});
  return {{"dim", mu.dim()}, {"atoms", atoms}};
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw InvalidArgument("matrix: expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) throw InvalidArgument("matrix: rows must be non-empty arrays");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw InvalidArgument("matrix: ragged rows");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], "matrix entry");
    }
  }
  return m;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Matrix parse_matrix(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw InvalidArgument("empty matrix specification");
  if (t.front() == '[') {
    Json j;
    try {
      j = Json::parse(t);
    } catch (const Json::parse_error& e) {
      throw InvalidArgument(std::string("matrix: invalid JSON: ") + e.what());
    }
    return matrix_from_json(j);
  }
  if (t.rfind("diag(", 0) == 0 && t.back() == ')') {
    std::vector<double> entries;
    std::stringstream ss(t.substr(5, t.size() - 6));
    std::string item;
    while (std::getline(ss, item, ',')) entries.push_back(parse_number(item));
    if (entries.empty()) throw InvalidArgument("matrix: diag() needs entries");
    Vector d(static_cast<Eigen::Index>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) d(static_cast<Eigen::Index>(i)) = entries[i];
    return d.asDiagonal();
  }
  if (t.size() > 1 && t.front() == 'I') {
    const double n = parse_number(t.substr(1));
    if (!(n >= 1.0) || n != std::floor(n) || n > 1024) throw InvalidArgument("matrix: bad identity size in " + t);
    const auto d = static_cast<Eigen::Index>(n);
    return Matrix::Identity(d, d);
  }
  throw InvalidArgument("matrix: cannot parse '" + t + "' (use JSON rows, diag(...) or I<d>)");
}

Json report_to_json(const TransformReport& report) {
  Json margins = Json::array();
  Json per = Json::array();
  for (const auto& m : report.per_measure) {
    margins.push_back(m.margin);
    per.push_back({{"trace", m.trace}, {"lambda_max", m.lambda_max}, {"margin", m.margin}});
  }
  return {{"A", matrix_to_json(report.transform)},
          {"margins", margins},
          {"psi", report.psi},
          {"per_measure", per},
          {"pass", report.satisfies_trace_condition()}};
}

Json drift_scan_to_json(const DriftScan& scan) {
  return {{"worst_point", scan.worst_point}, {"worst_drift", scan.worst_drift},
          {"points", scan.points},           {"positive", scan.positive},
          {"enumerated", scan.enumerated},   {"pass", scan.pass()}};
}

namespace {

const std::set<std::string> kWalkKeys{"type", "dim", "measures", "rule", "gamma", "eps", "theta", "cap_seed"};

std::uint64_t seed_value(const Json& j, const char* what) {
  if (!j.is_number_unsigned()) throw InvalidArgument(std::string(what) + " must be a non-negative integer");
  return j.get<std::uint64_t>();
}

std::size_t count_value(const Json& j, const char* what) {
  if (!j.is_number_unsigned()) throw InvalidArgument(std::string(what) + " must be a non-negative integer");
  return j.get<std::size_t>();
}

void read_walk(const Json& j, WalkSpec& spec) {
  if (j.contains("type")) {
    const std::string type = j["type"].get<std::string>();
    if (type == "generic") spec.kind = WalkKind::generic;
    else if (type == "gamma") spec.kind = WalkKind::gamma;
    else if (type == "cap") spec.kind = WalkKind::cap;
    else throw InvalidArgument("walk: unknown type " + type);
  }
  if (j.contains("measures")) {
    if (!j["measures"].is_array()) throw InvalidArgument("walk: measures must be an array");
    for (const auto& m : j["measures"]) spec.measures.push_back(measure_from_json(m));
    if (!spec.measures.empty()) spec.dim = spec.measures.front().dim();
  }
  if (j.contains("dim")) spec.dim = count_value(j["dim"], "dim");
  if (j.contains("rule")) spec.rule = j["rule"].get<std::string>();
  if (j.contains("gamma")) spec.gamma = number(j["gamma"], "gamma");
  if (j.contains("eps")) spec.eps = number(j["eps"], "eps");
  if (j.contains("theta")) spec.theta = number(j["theta"], "theta");
  if (j.contains("cap_seed")) spec.cap_seed = seed_value(j["cap_seed"], "cap_seed");
}

}  // namespace

WalkSpec walk_spec_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("walk spec: expected a JSON object");
  check_keys(j, kWalkKeys, "walk spec");
  WalkSpec spec;
  read_walk(j, spec);
  return spec;
}

Json walk_spec_to_json(const WalkSpec& spec) {
  static const char* const names[] = {"generic", "gamma", "cap"};
  Json measures = Json::array();
  for (const auto& m : spec.measures) measures.push_back(measure_to_json(m));
  return {{"type", names[static_cast<int>(spec.kind)]},
          {"dim", spec.dim},
          {"measures", measures},
          {"rule", spec.rule},
          {"gamma", spec.gamma},
          {"eps", spec.eps},
          {"theta", spec.theta},
          {"cap_seed", spec.cap_seed}};
}

ExperimentConfig experiment_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("experiment config: expected a JSON object");
  std::set<std::string> allowed = kWalkKeys;
  allowed.insert({"trials", "T", "r", "R", "seed", "output", "sweep"});
  check_keys(j, allowed, "experiment config");
  ExperimentConfig cfg;
  read_walk(j, cfg.walk);
  try {
    if (j.contains("trials")) cfg.trials = count_value(j["trials"], "trials");
    if (j.contains("T")) cfg.horizon = count_value(j["T"], "T");
    if (j.contains("r")) cfg.return_radius = number(j["r"], "r");
    if (j.contains("R")) cfg.escape_radius = number(j["R"], "R");
    if (j.contains("seed")) cfg.seed = seed_value(j["seed"], "seed");
    if (j.contains("output")) cfg.output_path = j["output"].get<std::string>();
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("experiment config: ") + e.what());
  }
  return cfg;
}

Json stats_to_json(const ReturnStats& stats) {
  Json trials = Json::array();
  for (const auto& t : stats.trials) {
    trials.push_back({{"trial", t.trial},
                      {"exit_time", t.exit_time ? Json(*t.exit_time) : Json(nullptr)},
                      {"returned", t.returned},
                      {"return_count", t.return_count},
                      {"final_norm", t.final_norm}});
  }
  return {{"schema", 1}, {"trials", trials}, {"aggregate", stats_aggregate(stats)}};
}

ReturnStats stats_from_json(const Json& j) {
  if (!j.is_object() || j.value("schema", 0) != 1) throw InvalidArgument("stats: expected schema 1");
  ReturnStats s;
  for (const auto& t : j.at("trials")) {
    TrialStats ts;
    ts.trial = t.at("trial").get<std::size_t>();
    if (!t.at("exit_time").is_null()) ts.exit_time = t.at("exit_time").get<std::size_t>();
    ts.returned = t.at("returned").get<bool>();
    ts.return_count = t.at("return_count").get<std::size_t>();
    ts.final_norm = number_or_nan(t.at("final_norm"));
    s.trials.push_back(ts);
  }
  const Json& a = j.at("aggregate");
  s.escape_fraction = number_or_nan(a.at("escape_fraction"));
  s.return_frequency = number_or_nan(a.at("return_frequency"));
  s.return_stderr = number_or_nan(a.at("return_stderr"));
  s.mean_return_count = number_or_nan(a.at("mean_return_count"));
  s.return_count_stderr = number_or_nan(a.at("return_count_stderr"));
  s.mean_exit_time = number_or_nan(a.at("mean_exit_time"));
  s.mean_final_norm = number_or_nan(a.at("mean_final_norm"));
  s.final_norm_stderr = number_or_nan(a.at("final_norm_stderr"));
  s.final_norm_q10 = number_or_nan(a.at("final_norm_q10"));
  s.final_norm_q50 = number_or_nan(a.at("final_norm_q50"));
  s.final_norm_q90 = number_or_nan(a.at("final_norm_q90"));
  return s;
}

Json cap_system_to_json(const CapSystem& caps) {
  Json arr = Json::array();
  for (const auto& c : caps.caps) {
    Json comp = Json::array();
    for (const auto& v : c.complement) comp.push_back(vector_to_json(v));
    arr.push_back({{"center", vector_to_json(c.center)}, {"complement", comp}});
  }
  return {{"dim", caps.dim}, {"theta", caps.theta}, {"caps", arr}};
}

std::string dump_json(const Json& j) {
  std::string out;
  write(j, out, 0);
  return out;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument("invalid JSON in " + path + ": " + e.what());
  }
}

}  // namespace siwalk
