#include "siwalk_cli/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "siwalk/caps.hpp"
#include "siwalk/cov_transform.hpp"
#include "siwalk/errors.hpp"
#include "siwalk/harness.hpp"
#include "siwalk/io.hpp"
#include "siwalk/lyapunov.hpp"
#include "siwalk/radial_profile.hpp"
#include "siwalk/walk.hpp"

namespace siwalk::cli {

namespace {

/// Verification or search ran and failed; `payload` goes to stdout, exit 1.
struct Failure {
  Json payload;
};

struct Common {
  std::string config;
  std::string out;
  std::string format;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

std::size_t thread_count(const Common& c) {
  if (c.threads) return *c.threads;
  if (const char* env = std::getenv("SIWALK_THREADS")) {
    try {
      std::size_t used = 0;
      const unsigned long n = std::stoul(env, &used);
      if (used == std::string(env).size()) return n;
    } catch (const std::exception&) {
    }
    throw InvalidArgument(std::string("SIWALK_THREADS must be a non-negative integer, got '") + env + "'");
  }
  return 0;
}

OutputFormat format_or(const Common& c, OutputFormat fallback) {
  return c.format.empty() ? fallback : parse_output_format(c.format);
}

void write_output(const Common& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(c.out, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot open output file " + c.out);
  file << text;
  if (!file.flush()) throw Error("failed writing output file " + c.out);
}

Json load_config(const Common& c) {
  if (c.config.empty()) return Json::object();
  Json j = read_json_file(c.config);
  if (!j.is_object()) throw InvalidArgument("config " + c.config + " must hold a JSON object");
  return j;
}

Matrix matrix_entry(const Json& j) {
  if (j.is_string()) return parse_matrix(j.get<std::string>());
  return matrix_from_json(j);
}

FiniteMeasure measure_entry(const Json& j) {
  if (j.is_string()) return measure_from_json(read_json_file(j.get<std::string>()));
  return measure_from_json(j);
}

/// Covariance family from inline --matrix specs, --measure files and the
/// config's "matrices" / "measures" arrays, in that order.
std::vector<SymMatrix> load_family(const std::vector<std::string>& matrices,
                                   const std::vector<std::string>& measures, const Json& config) {
  std::vector<SymMatrix> family;
  for (const auto& m : matrices) family.emplace_back(parse_matrix(m));
  for (const auto& path : measures) {
    family.push_back(covariance(measure_from_json(read_json_file(path))));
  }
  if (config.contains("matrices")) {
    for (const auto& m : config["matrices"]) family.emplace_back(matrix_entry(m));
  }
  if (config.contains("measures")) {
    for (const auto& m : config["measures"]) family.push_back(covariance(measure_entry(m)));
  }
  if (family.empty()) throw InvalidArgument("no matrices given (use --matrix, --measure or --config)");
  for (const auto& m : family) {
    if (m.dim() != family.front().dim()) throw InvalidArgument("matrices have different dimensions");
  }
  return family;
}

std::string report_text(const TransformReport& report) { return dump_json(report_to_json(report)) + "\n"; }

// ---------------------------------------------------------------------------

struct TraceArgs {
  std::vector<std::string> matrices, measures;
  std::string transform;
};

int check_trace(const Common& c, const TraceArgs& a, std::ostream& out) {
  const Json config = load_config(c);
  const auto family = load_family(a.matrices, a.measures, config);
  const auto d = static_cast<Eigen::Index>(family.front().dim());
  Matrix transform = Matrix::Identity(d, d);
  if (!a.transform.empty()) transform = parse_matrix(a.transform);
  else if (config.contains("A")) transform = matrix_entry(config["A"]);
  if (transform.cols() != d) throw InvalidArgument("transform A has the wrong number of columns");
  const TransformReport report = make_transform_report(transform, family);
  if (!report.satisfies_trace_condition()) {
    Json j = report_to_json(report);
    j["error"] = "trace condition fails";
    throw Failure{j};
  }
  write_output(c, report_text(report), out);
  return 0;
}

int construct_a(const Common& c, const TraceArgs& a, std::ostream& out) {
  const auto family = load_family(a.matrices, a.measures, load_config(c));
  if (family.size() != 2) throw InvalidArgument("construct-A needs exactly two matrices");
  const TransformReport report = construct_joint_transform_3d(family[0], family[1]);
  if (!report.satisfies_trace_condition()) {
    Json j = report_to_json(report);
    j["error"] = "constructed transform does not satisfy the trace condition";
    throw Failure{j};
  }
  write_output(c, report_text(report), out);
  return 0;
}

struct PsiArgs {
  TraceArgs family;
  int budget = DiagonalSearchOptions{}.budget;
  int starts = DiagonalSearchOptions{}.starts;
};

int minimize_psi(const Common& c, const PsiArgs& a, std::ostream& out) {
  const auto family = load_family(a.family.matrices, a.family.measures, load_config(c));
  DiagonalSearchOptions options;
  options.budget = a.budget;
  options.starts = a.starts;
  if (c.seed) options.seed = *c.seed;

  // Non-diagonal commuting input: work in the common eigenbasis and map back.
  const bool diagonal = std::all_of(family.begin(), family.end(),
                                    [](const SymMatrix& m) { return m.is_diagonal(1e-12); });
  Matrix basis = Matrix::Identity(static_cast<Eigen::Index>(family.front().dim()),
                                  static_cast<Eigen::Index>(family.front().dim()));
  std::vector<SymMatrix> work = family;
  if (!diagonal) {
    basis = joint_diagonalize(family);
    work.clear();
    for (const auto& m : family) {
      work.push_back(SymMatrix::diagonal((basis.transpose() * m.matrix() * basis).diagonal()));
    }
  }
  try {
    const TransformReport diag = minimize_psi_diagonal(work, options);
    write_output(c, report_text(make_transform_report(diag.transform * basis.transpose(), family)), out);
    return 0;
  } catch (const SearchFailure& f) {
    Json j = f.detail();
    j["error"] = f.what();
    throw Failure{j};
  }
}

struct SearchArgs {
  TraceArgs family;
  int restarts = GeneralSearchOptions{}.restarts;
  int evaluations = GeneralSearchOptions{}.evaluations;
};

int search_a(const Common& c, const SearchArgs& a, std::ostream& out) {
  const auto family = load_family(a.family.matrices, a.family.measures, load_config(c));
  GeneralSearchOptions options;
  options.restarts = a.restarts;
  options.evaluations = a.evaluations;
  if (c.seed) options.seed = *c.seed;
  const GeneralSearchResult result = search_transform_general(family, options);
  Json j = report_to_json(result.best);
  j["start_index"] = result.start_index;
  if (!result.success()) {
    j["error"] = "no transform with psi < 1/2 found (this proves nothing)";
    throw Failure{j};
  }
  write_output(c, dump_json(j) + "\n", out);
  return 0;
}

struct ProfileArgs {
  std::size_t dim = 3;
  double eps0 = 0.05;
  std::size_t knots = 4096;
};

int build_profile(const Common& c, const ProfileArgs& a, std::ostream& out) {
  RadialProfile profile;
  try {
    profile = build_radial_profile(a.dim, a.eps0, a.knots);
  } catch (const PropertyViolation& v) {
    throw Failure{{{"error", v.what()}, {"property", v.property()}, {"d", a.dim}, {"eps0", a.eps0}}};
  }
  std::ostringstream text;
  const auto& r = profile.knots();
  if (format_or(c, OutputFormat::csv) == OutputFormat::csv) {
    text << "r,h,H,psi,dpsi\n";
    for (std::size_t i = 0; i < r.size(); ++i) {
      text << format_double(r[i]) << ',' << format_double(profile.h(r[i])) << ','
           << format_double(profile.H_knots()[i]) << ',' << format_double(profile.psi_knots()[i])
           << ',' << format_double(profile.dpsi(r[i])) << '\n';
    }
  } else {
    Json rows = Json::array();
    for (std::size_t i = 0; i < r.size(); ++i) {
      rows.push_back({r[i], profile.h(r[i]), profile.H_knots()[i], profile.psi_knots()[i],
                      profile.dpsi(r[i])});
    }
    const Json j = {{"d", a.dim},
                    {"eps0", a.eps0},
                    {"b", profile.b()},
                    {"delta0", profile.delta0()},
                    {"blend", {profile.blend_start(), profile.blend_end()}},
                    {"columns", {"r", "h", "H", "psi", "dpsi"}},
                    {"rows", rows}};
    text << dump_json(j) << '\n';
  }
  write_output(c, text.str(), out);
  return 0;
}

struct LyapunovArgs {
  std::size_t dim = 3;
  double eps0 = 0.25;
  std::optional<double> gamma, alpha;
  std::vector<double> gamma_grid{10.0, 1e2, 1e3, 1e4};
  std::vector<double> alpha_grid{1e-4, 1e-3, 1e-2, 1e-1};
  double inner = 10.0;
  double outer = 60.0;
  std::size_t samples = GammaScanOptions{}.sample_count;
};

int verify_lyapunov(const Common& c, const LyapunovArgs& a, std::ostream& out) {
  if (a.gamma.has_value() != a.alpha.has_value()) {
    throw InvalidArgument("--gamma and --alpha must be given together (or neither, to search the grids)");
  }
  const RadialProfile profile = build_radial_profile(a.dim, a.eps0);
  GammaScanOptions options;
  options.threads = thread_count(c);
  options.sample_count = a.samples;
  if (c.seed) options.seed = *c.seed;
  const Shell shell{a.inner, a.outer};

  Json params = {{"d", a.dim}, {"eps0", a.eps0}, {"R0", a.inner}, {"R1", a.outer}, {"b", profile.b()}};
  DriftScan scan;
  if (a.gamma) {
    scan = scan_gamma_walk_drift(profile, *a.gamma, *a.alpha, shell, options);
    params["gamma"] = *a.gamma;
    params["alpha"] = *a.alpha;
  } else {
    try {
      const GammaAlphaCertificate cert = find_gamma_alpha(profile, a.gamma_grid, a.alpha_grid, shell, options);
      scan = cert.scan;
      params["gamma"] = cert.gamma;
      params["alpha"] = cert.alpha;
    } catch (const SearchFailure& f) {
      Json j = f.detail();
      j["params"] = params;
      j["pass"] = false;
      j["error"] = f.what();
      throw Failure{j};
    }
  }
  Json j = drift_scan_to_json(scan);
  j["params"] = params;
  if (!scan.pass()) {
    j["error"] = "positive drift found in the shell";
    throw Failure{j};
  }
  write_output(c, dump_json(j) + "\n", out);
  return 0;
}

struct WalkArgs {
  std::optional<std::string> type, rule;
  std::optional<std::size_t> dim, horizon, trials;
  std::optional<double> gamma, eps, theta, r, big_r;
  bool summary = false;
  std::string parameter;
  std::string values;
};

ExperimentConfig experiment(const Common& c, const WalkArgs& a, Json* config_out = nullptr) {
  const Json config = load_config(c);
  ExperimentConfig cfg = experiment_from_json(config);
  if (a.type) {
    if (*a.type == "generic") cfg.walk.kind = WalkKind::generic;
    else if (*a.type == "gamma") cfg.walk.kind = WalkKind::gamma;
    else if (*a.type == "cap") cfg.walk.kind = WalkKind::cap;
    else throw InvalidArgument("--type must be generic, gamma or cap");
  }
  if (a.rule) cfg.walk.rule = *a.rule;
  if (a.dim) cfg.walk.dim = *a.dim;
  if (a.horizon) cfg.horizon = *a.horizon;
  if (a.trials) cfg.trials = *a.trials;
  if (a.gamma) cfg.walk.gamma = *a.gamma;
  if (a.eps) cfg.walk.eps = *a.eps;
  if (a.theta) cfg.walk.theta = *a.theta;
  if (a.r) cfg.return_radius = *a.r;
  if (a.big_r) cfg.escape_radius = *a.big_r;
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  if (config_out) *config_out = config;
  return cfg;
}

int simulate_cmd(const Common& c, const WalkArgs& a, std::ostream& out) {
  ExperimentConfig cfg = experiment(c, a);
  const std::size_t threads = thread_count(c);
  const OutputFormat format = format_or(c, OutputFormat::csv);
  std::ostringstream text;
  if (a.summary) {
    const std::string per_trial = cfg.output_path;
    cfg.output_path.clear();
    const ReturnStats stats = run_return_experiment(cfg, threads);
    if (!per_trial.empty()) emit_to_file(stats, OutputFormat::csv, per_trial);
    emit(stats, format, text);
    write_output(c, text.str(), out);
    return 0;
  }

  std::optional<CapSystem> caps;
  if (cfg.walk.kind == WalkKind::cap) {
    Rng rng(cfg.walk.cap_seed);
    caps = build_cap_system(cfg.walk.dim, cfg.walk.theta, rng);
  }
  std::vector<Trajectory> paths(cfg.trials);
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = derive_seed(cfg.seed, t);
    switch (cfg.walk.kind) {
      case WalkKind::generic: {
        auto rule = make_rule(cfg.walk.rule, cfg.walk.measures);
        paths[t] = simulate(cfg.walk.measures, *rule, cfg.horizon, seed);
        break;
      }
      case WalkKind::gamma:
        paths[t] = simulate_gamma_walk(cfg.walk.dim, cfg.walk.gamma, cfg.horizon, seed);
        break;
      case WalkKind::cap:
        paths[t] = simulate_cap_walk(*caps, cfg.walk.eps, cfg.horizon, seed);
        break;
    }
  }
  if (format == OutputFormat::csv) {
    const bool many = paths.size() > 1;
    if (many) text << "trial,";
    text << "t";
    for (std::size_t k = 0; k < cfg.walk.dim; ++k) text << ",x" << k;
    text << ",choice\n";
    for (std::size_t tr = 0; tr < paths.size(); ++tr) {
      const Trajectory& p = paths[tr];
      for (std::size_t t = 0; t < p.positions.size(); ++t) {
        if (many) text << tr << ',';
        text << t;
        for (Eigen::Index k = 0; k < p.positions[t].size(); ++k) text << ',' << format_double(p.positions[t](k));
        text << ',';
        if (t < p.choices.size()) text << p.choices[t];
        else text << -1;
        text << '\n';
      }
    }
  } else {
    Json arr = Json::array();
    for (std::size_t tr = 0; tr < paths.size(); ++tr) {
      Json positions = Json::array();
      for (const auto& x : paths[tr].positions) positions.push_back(vector_to_json(x));
      arr.push_back({{"trial", tr}, {"seed", paths[tr].seed}, {"positions", positions},
                     {"choices", paths[tr].choices}});
    }
    text << dump_json({{"schema", 1}, {"walk", walk_spec_to_json(cfg.walk)}, {"trajectories", arr}}) << '\n';
  }
  write_output(c, text.str(), out);
  return 0;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("--values: not a number: '" + item + "'");
    }
    if (used != item.size()) throw InvalidArgument("--values: not a number: '" + item + "'");
    values.push_back(v);
  }
  return values;
}

int sweep_cmd(const Common& c, const WalkArgs& a, std::ostream& out) {
  Json config;
  ExperimentConfig cfg = experiment(c, a, &config);
  SweepGrid grid;
  if (config.contains("sweep")) {
    const Json& s = config["sweep"];
    grid.parameter = s.at("parameter").get<std::string>();
    grid.values = s.at("values").get<std::vector<double>>();
  }
  if (!a.parameter.empty()) grid.parameter = a.parameter;
  if (!a.values.empty()) grid.values = parse_values(a.values);
  if (grid.parameter.empty()) throw InvalidArgument("sweep needs --param (or a config \"sweep\" entry)");
  if (grid.values.empty()) throw InvalidArgument("sweep needs --values (or a config \"sweep\" entry)");
  cfg.output_path.clear();
  const auto rows = sweep(cfg, grid, thread_count(c));
  std::ostringstream text;
  emit(rows, format_or(c, OutputFormat::csv), text);
  write_output(c, text.str(), out);
  return 0;
}

int cap_count(const Common& c, std::size_t dim, std::ostream& out) {
  const double ratio = cap_count_lower_bound(dim);
  std::string text;
  if (c.format == "json") {
    text = dump_json({{"d", dim}, {"ratio", ratio}, {"power_bound", std::pow(2.0, 0.5 * static_cast<double>(dim) + 1.0)}}) + "\n";
  } else if (c.format.empty() || c.format == "csv") {
    text = format_double(ratio) + "\n";
  } else {
    parse_output_format(c.format);
  }
  write_output(c, text, out);
  return 0;
}

void add_family_options(CLI::App* sub, TraceArgs& a) {
  sub->add_option("--matrix", a.matrices, "Covariance matrix: JSON rows, diag(a,b,..) or I<d>; repeatable")
      ->allow_extra_args(false);
  sub->add_option("--measure", a.measures, "Measure JSON file; its covariance is used; repeatable")
      ->allow_extra_args(false);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-interacting random walks: trace-condition transforms, Lyapunov certificates and simulation",
               "siwalk"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Common common;
  app.add_option("--config", common.config, "JSON config file");
  app.add_option("--seed", common.seed, "Master seed");
  app.add_option("--threads", common.threads, "Worker threads (default: SIWALK_THREADS or all cores)");
  app.add_option("--out", common.out, "Write the result to this file instead of stdout");
  app.add_option("--format", common.format, "Output format: csv or json")->check(CLI::IsMember({"csv", "json"}));

  TraceArgs trace;
  auto* check = app.add_subcommand("check-trace", "Trace-condition margins of A M_j A^T");
  add_family_options(check, trace);
  check->add_option("--A", trace.transform, "Transform A (default identity)");

  TraceArgs construct;
  auto* cons = app.add_subcommand("construct-A", "Explicit transform for two 3x3 covariances");
  add_family_options(cons, construct);

  PsiArgs psi;
  auto* minp = app.add_subcommand("minimize-psi", "Diagonal psi minimization for a commuting family");
  add_family_options(minp, psi.family);
  minp->add_option("--budget", psi.budget, "Coordinate-descent sweeps per start");
  minp->add_option("--starts", psi.starts, "Number of starts");

  SearchArgs search;
  auto* srch = app.add_subcommand("search-A", "Best-effort search for a general transform");
  add_family_options(srch, search.family);
  srch->add_option("--restarts", search.restarts, "Random restarts");
  srch->add_option("--evaluations", search.evaluations, "Objective evaluations per local search");

  ProfileArgs profile;
  auto* prof = app.add_subcommand("build-profile", "Tabulate the radial profile (r, h, H, psi, psi')");
  prof->add_option("--d", profile.dim, "Dimension (>= 3)");
  prof->add_option("--eps0", profile.eps0, "Parabola width");
  prof->add_option("--knots", profile.knots, "Number of knots");

  LyapunovArgs lyap;
  auto* ver = app.add_subcommand("verify-lyapunov", "Exact gamma-walk drift certificate on a lattice shell");
  ver->add_option("--d", lyap.dim, "Dimension (>= 3)");
  ver->add_option("--eps0", lyap.eps0, "Profile parabola width");
  ver->add_option("--gamma", lyap.gamma, "Fixed gamma (with --alpha)");
  ver->add_option("--alpha", lyap.alpha, "Fixed alpha (with --gamma)");
  ver->add_option("--gamma-grid", lyap.gamma_grid, "Gamma grid searched when --gamma is absent")->delimiter(',');
  ver->add_option("--alpha-grid", lyap.alpha_grid, "Alpha grid searched when --alpha is absent")->delimiter(',');
  ver->add_option("--R0", lyap.inner, "Inner shell radius");
  ver->add_option("--R1", lyap.outer, "Outer shell radius");
  ver->add_option("--samples", lyap.samples, "Sampled points when the shell is not enumerated");

  WalkArgs walk;
  auto add_walk = [&walk](CLI::App* sub) {
    sub->add_option("--type", walk.type, "generic, gamma or cap");
    sub->add_option("--rule", walk.rule, "constant:<j>, alternating, first-visit or random");
    sub->add_option("--d", walk.dim, "Dimension");
    sub->add_option("--T", walk.horizon, "Steps per trial");
    sub->add_option("--trials", walk.trials, "Number of trials");
    sub->add_option("--gamma", walk.gamma, "Gamma-walk weight");
    sub->add_option("--eps", walk.eps, "Cap-walk transversal parameter");
    sub->add_option("--theta", walk.theta, "Cap angular radius (< pi/4)");
    sub->add_option("--r", walk.r, "Return radius");
    sub->add_option("--R", walk.big_r, "Escape radius");
  };
  auto* sim = app.add_subcommand("simulate", "Simulate trajectories (or return statistics with --summary)");
  add_walk(sim);
  sim->add_flag("--summary", walk.summary, "Per-trial return statistics instead of trajectories");
  auto* swp = app.add_subcommand("sweep", "Return experiments over a parameter grid");
  add_walk(swp);
  swp->add_option("--param", walk.parameter, "gamma, eps, theta, horizon, return_radius or escape_radius");
  swp->add_option("--values", walk.values, "Comma-separated grid values");

  std::size_t cap_dim = 3;
  auto* caps = app.add_subcommand("cap-count", "Sphere area over the area of a cap of diameter pi/2");
  caps->add_option("--d", cap_dim, "Dimension (>= 2)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (argc <= 1) {
      err << app.help();
    } else {
      err << "error: " << e.what() << "\n" << "run 'siwalk --help' for usage\n";
    }
    return 2;
  }

  try {
    if (*check) return check_trace(common, trace, out);
    if (*cons) return construct_a(common, construct, out);
    if (*minp) return minimize_psi(common, psi, out);
    if (*srch) return search_a(common, search, out);
    if (*prof) return build_profile(common, profile, out);
    if (*ver) return verify_lyapunov(common, lyap, out);
    if (*sim) return simulate_cmd(common, walk, out);
    if (*swp) return sweep_cmd(common, walk, out);
    if (*caps) return cap_count(common, cap_dim, out);
  } catch (const Failure& f) {
    out << dump_json(f.payload) << '\n';
    return 1;
  } catch (const SearchFailure& e) {
    Json j = e.detail();
    j["error"] = e.what();
    out << dump_json(j) << '\n';
    return 1;
  } catch (const PropertyViolation& e) {
    out << dump_json({{"error", e.what()}, {"property", e.property()}}) << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  err << app.help();
  return 2;
}

}  // namespace siwalk::cli
