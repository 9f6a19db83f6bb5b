// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "siwalk/caps.hpp"
#include "siwalk/cov_transform.hpp"
#include "siwalk/enumerate.hpp"
#include "siwalk/errors.hpp"
#include "siwalk/harness.hpp"
#include "siwalk/lyapunov.hpp"
#include "siwalk/measure.hpp"
#include "siwalk/quadrature.hpp"
#include "siwalk/radial_profile.hpp"
#include "siwalk/rng.hpp"
#include "siwalk/rules.hpp"
#include "siwalk/sequences.hpp"
#include "siwalk_cli/cli.hpp"

using namespace siwalk;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

Matrix gaussian(std::size_t d, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(d);
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.normal();
  return g;
}

SymMatrix random_spd(std::size_t d, Rng& rng) {
  const Matrix g = gaussian(d, rng);
  return SymMatrix::symmetrized(g * g.transpose() + 1e-3 * Matrix::Identity(g.rows(), g.cols()));
}

/// Trace-condition margin recomputed with Eigen, independent of the library's Jacobi solver.
double oracle_margin(const Matrix& a, const SymMatrix& m) {
  const Matrix c = a * m.matrix() * a.transpose();
  const Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (c + c.transpose()));
  return 0.5 * c.trace() - es.eigenvalues().maxCoeff();
}

std::vector<std::pair<SymMatrix, SymMatrix>> criterion1_pairs() {
  Rng rng(20240101);
  std::vector<std::pair<SymMatrix, SymMatrix>> pairs;
  for (int i = 0; i < 1000; ++i) {
    SymMatrix a = random_spd(3, rng);
    SymMatrix b = random_spd(3, rng);
    pairs.emplace_back(std::move(a), std::move(b));
  }
  return pairs;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// 1: explicit 3-D construction on 1000 random pairs.
Outcome criterion1() {
  const auto pairs = criterion1_pairs();
  const auto t0 = Clock::now();
  std::vector<Matrix> transforms;
  transforms.reserve(pairs.size());
  for (const auto& [m1, m2] : pairs) transforms.push_back(construct_joint_transform_3d(m1, m2).transform);
  const double elapsed = seconds_since(t0);
  double worst = 1e300;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    worst = std::min({worst, oracle_margin(transforms[i], pairs[i].first), oracle_margin(transforms[i], pairs[i].second)});
  }
  return {worst > 0.0 && elapsed < 5.0,
          "min margin " + fmt(worst) + ", " + fmt(elapsed) + " s for 1000 pairs"};
}

// 2: commuting families, k = d - 1, d = 4..8.
Outcome criterion2() {
  Rng rng(777);
  double worst_psi = 0.0, slowest = 0.0;
  std::size_t families = 0;
  for (std::size_t d = 4; d <= 8; ++d) {
    for (int f = 0; f < 100; ++f) {
      const Matrix u = Eigen::HouseholderQR<Matrix>(gaussian(d, rng)).householderQ();
      std::vector<SymMatrix> family;
      for (std::size_t j = 0; j + 1 < d; ++j) {
        Vector diag(static_cast<Eigen::Index>(d));
        for (Eigen::Index i = 0; i < diag.size(); ++i) diag(i) = std::exp(4.0 * (rng.uniform() - 0.5));
        family.push_back(SymMatrix::symmetrized(u * diag.asDiagonal() * u.transpose()));
      }
      const auto t0 = Clock::now();
      const Matrix basis = joint_diagonalize(family);
      std::vector<SymMatrix> work;
      for (const auto& m : family) {
        work.push_back(SymMatrix::diagonal((basis.transpose() * m.matrix() * basis).diagonal()));
      }
      double psi = 1.0;
      try {
        const TransformReport r = minimize_psi_diagonal(work);
        const Matrix a = r.transform * basis.transpose();
        psi = 0.0;
        for (const auto& m : family) {
          const Matrix c = a * m.matrix() * a.transpose();
          const Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (c + c.transpose()));
          psi = std::max(psi, es.eigenvalues().maxCoeff() / c.trace());
        }
      } catch (const SearchFailure&) {
      }
      slowest = std::max(slowest, seconds_since(t0));
      worst_psi = std::max(worst_psi, psi);
      ++families;
    }
  }
  return {worst_psi < 0.5 && slowest < 1.0,
          std::to_string(families) + " families, max psi " + fmt(worst_psi) + ", slowest " + fmt(slowest) + " s"};
}

// 3: phi potential on 50 transformed pairs.
Outcome criterion3() {
  const auto pairs = criterion1_pairs();
  double worst = -1e300;
  std::size_t found = 0, points = 0;
  for (std::size_t i = 0; i < 50; ++i) {
    const Matrix a = construct_joint_transform_3d(pairs[i].first, pairs[i].second).transform;
    const std::vector<FiniteMeasure> mus{pushforward(a, measure_with_covariance(pairs[i].first)),
                                         pushforward(a, measure_with_covariance(pairs[i].second))};
    PhiParams p;
    try {
      p = find_phi_params(mus);
    } catch (const Error&) {
      continue;
    }
    ++found;
    const auto adversary = greedy_adversary_rule(mus, [&](const Vector& x) { return -phi_tilde(x, p); });
    const auto& greedy = dynamic_cast<const GreedyAdversaryRule&>(*adversary);
    SphereSequence dirs(3, 1 + i);
    for (int k = 0; k < 10000; ++k) {
      const double radius = p.r0 * std::pow(100.0, (k % 100) / 99.0);
      const Vector x = radius * dirs.next();
      const double d0 = phi_drift(mus[0], x, p), d1 = phi_drift(mus[1], x, p);
      const double chosen = phi_drift(mus[greedy.choose_at(x)], x, p);
      worst = std::max({worst, d0, d1, chosen});
      ++points;
    }
  }
  return {found == 50 && worst <= 1e-12,
          std::to_string(found) + "/50 parameter searches succeeded, " + std::to_string(points) +
              " points, max drift " + fmt(worst)};
}

bool profile_properties(const RadialProfile& p, std::string& why) {
  const double eps0 = p.eps0();
  const auto g = [](double r) { return radial_density(r); };
  const auto& r = p.knots();
  for (double x : r) {
    if (x < 2.0 * eps0) {
      if (p.h(x) < 0.0 || p.h(x) > g(x) + 1e-15) return why = "(i) below 2 eps0", false;
    } else if (std::abs(p.h(x) - g(x)) > 1e-14) {
      return why = "(i) above 2 eps0", false;
    }
  }
  if (p.h(0.0) != 0.0) return why = "(ii) h(0)", false;
  for (std::size_t i = 1; i <= 5; ++i) {
    if (std::abs(p.h(r[i]) / (r[i] * r[i] / (4.0 * eps0 * eps0)) - 1.0) > 0.05) return why = "(ii) parabola", false;
  }
  for (double x : r) {
    if (x <= eps0 && !(g(x) - p.h(x) > 0.5)) return why = "(iii)", false;
  }
  const double b = integrate([&](double x) { return p.h(x); }, 0.0, p.radius(), 1e-12);
  if (std::abs(b - p.b()) > 1e-9 * b || !(b > 0.0 && b < 1.0)) return why = "(iv)", false;
  const double c = p.b() / (3.0 * std::pow(static_cast<double>(p.dim() - 1), 1.5));
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (!(p.H(r[i]) > c * std::pow(r[i], 3))) return why = "(v)", false;
  }
  return true;
}

// 4: quadrature identity, profile properties and the capital-phi bound.
Outcome criterion4() {
  double worst_identity = 0.0;
  for (std::size_t d = 3; d <= 8; ++d) {
    const double s = std::sqrt(static_cast<double>(d - 1));
    const double v = integrate(radial_density, 0.0, s, 1e-13);
    worst_identity = std::max(worst_identity, std::abs(v - s / static_cast<double>(d)));
  }
  const RadialProfile p = build_radial_profile(3, 0.05);
  std::string why;
  const bool props = profile_properties(p, why);
  const double bound = capital_phi_lower_bound(p);
  double min_phi = 1e300;
  for (int i = 0; i < 10000; ++i) min_phi = std::min(min_phi, capital_phi(std::min(p.radius(), p.radius() * i / 9999.0), p));
  const bool ok = worst_identity <= 1e-8 && props && min_phi >= bound - 1e-6;
  return {ok, "identity error " + fmt(worst_identity) + ", properties " + (props ? "hold" : "fail " + why) +
                  ", min capital_phi " + fmt(min_phi) + " vs bound " + fmt(bound)};
}

// 5: gamma-walk certificate on the shell [10, 60] in d = 3.
Outcome criterion5() {
  const auto t0 = Clock::now();
  const RadialProfile profile = build_radial_profile(3, 0.25);
  const Shell shell{10.0, 60.0};
  const std::vector<double> gammas{10.0, 1e2, 1e3, 1e4};
  const std::vector<double> alphas{1e-4, 1e-3, 1e-2, 1e-1};
  GammaAlphaCertificate cert;
  try {
    cert = find_gamma_alpha(profile, gammas, alphas, shell);
  } catch (const SearchFailure& f) {
    return {false, std::string("no certificate: ") + f.what()};
  }
  const DriftScan one = scan_gamma_walk_drift(profile, 1.0, cert.alpha, shell);
  const double elapsed = seconds_since(t0);
  std::string at = "(";
  for (std::size_t i = 0; i < one.worst_point.size(); ++i) at += (i ? "," : "") + std::to_string(one.worst_point[i]);
  at += ")";
  const bool ok = cert.scan.pass() && cert.scan.enumerated && one.worst_drift > 0.0 && elapsed < 600.0;
  return {ok, "gamma " + fmt(cert.gamma) + ", alpha " + fmt(cert.alpha) + ": " + std::to_string(cert.scan.points) +
                  " points, max drift " + fmt(cert.scan.worst_drift) + "; gamma 1 drift " + fmt(one.worst_drift) +
                  " at " + at + "; " + fmt(elapsed) + " s"};
}

// 6: return frequencies, gamma = 1000 against gamma = 1.
Outcome criterion6() {
  ExperimentConfig cfg;
  cfg.walk.kind = WalkKind::gamma;
  cfg.walk.dim = 3;
  cfg.trials = 1000;
  cfg.horizon = 100000;
  cfg.return_radius = 5.0;
  cfg.escape_radius = 50.0;
  cfg.seed = 6;
  cfg.walk.gamma = 1.0;
  const ReturnStats weak = run_return_experiment(cfg);
  cfg.walk.gamma = 1000.0;
  const ReturnStats strong = run_return_experiment(cfg);
  const double se = std::hypot(weak.return_stderr, strong.return_stderr);
  const double diff = strong.return_frequency - weak.return_frequency;
  return {diff >= 5.0 * se, "frequencies " + fmt(weak.return_frequency) + " vs " + fmt(strong.return_frequency) +
                                ", difference " + fmt(diff / se) + " joint SE"};
}

// 7: exact endpoint laws, tree against stream enumeration.
Outcome criterion7() {
  const auto two = [](std::size_t dim, Vector a, Vector b, Rational pa) {
    return FiniteMeasure::with_exact_weights(dim, {std::move(a), std::move(b)}, {pa, 1 - pa});
  };
  const auto v = [](std::initializer_list<double> xs) {
    Vector out(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) out(i++) = x;
    return out;
  };
  const std::vector<std::vector<FiniteMeasure>> families{
      {two(1, v({1}), v({-1}), Rational(1, 2)), two(1, v({2}), v({-2}), Rational(1, 2))},
      {two(1, v({1}), v({-2}), Rational(2, 3)), two(1, v({3}), v({-1}), Rational(1, 4))},
      {two(2, v({1, 0}), v({-1, 0}), Rational(1, 2)), two(2, v({0, 1}), v({0, -1}), Rational(1, 2))},
      {two(2, v({1, 1}), v({-1, 0}), Rational(1, 3)), two(2, v({0, -1}), v({2, 1}), Rational(3, 5))},
  };
  std::size_t cases = 0, mismatches = 0;
  for (const auto& mus : families) {
    std::vector<std::unique_ptr<AdaptedRule>> rules;
    rules.push_back(std::make_unique<ConstantRule>(0));
    rules.push_back(std::make_unique<ConstantRule>(1));
    rules.push_back(std::make_unique<AlternatingRule>(2));
    rules.push_back(first_visit_rule(mus));
    for (const auto& rule : rules) {
      for (std::size_t t = 1; t <= 4; ++t) {
        const auto tree = enumerate_distribution(mus, *rule, t);
        const auto stream = enumerate_stream_distribution(mus, *rule, t);
        ++cases;
        if (total_variation(tree, stream) != 0 || total_mass(tree) != 1) ++mismatches;
      }
    }
  }
  return {mismatches == 0, std::to_string(cases) + " cases, " + std::to_string(mismatches) + " with nonzero TV"};
}

// 8: cap systems, cap drift and cap counting.
Outcome criterion8() {
  std::string detail;
  bool ok = true;
  const double theta = 0.6;
  for (std::size_t d : {3u, 4u}) {
    Rng rng(800 + d);
    const CapSystem caps = build_cap_system(d, theta, rng);
    Rng check(900 + d);
    const CoverCheck cover = verify_cover(caps, 1'000'000, check);
    const std::vector<double> grid{0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
    CapScanOptions opts;
    opts.samples = 10'000;
    std::string eps = "none";
    bool drift_ok = false;
    try {
      const CapDriftScan scan = find_cap_eps(caps, grid, opts);
      drift_ok = scan.pass() && scan.points == 10'000;
      eps = fmt(scan.eps) + " (max " + fmt(scan.worst_drift) + ")";
    } catch (const SearchFailure&) {
    }
    ok = ok && cover.uncovered == 0 && drift_ok && caps.theta < std::numbers::pi / 4;
    detail += "d=" + std::to_string(d) + ": " + std::to_string(caps.caps.size()) + " caps, " +
              std::to_string(cover.uncovered) + " uncovered, eps " + eps + "; ";
  }
  const double c3 = cap_count_lower_bound(3);
  const double expected = 2.0 / (1.0 - std::sqrt(0.5));
  ok = ok && std::abs(c3 - expected) <= 1e-6;
  bool ratios = true;
  for (std::size_t d = 3; d <= 12; ++d) {
    ratios = ratios && cap_count_lower_bound(d) >= std::pow(2.0, d / 2.0 + 1.0);
  }
  ok = ok && ratios;
  detail += "count(3) " + fmt(c3) + ", ratio bound " + (ratios ? "holds" : "fails") + " for d=3..12";
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// 9: repeated CLI invocations produce identical output files.
Outcome criterion9() {
  const fs::path dir = SIWALK_TEST_TMPDIR;
  fs::create_directories(dir);
  const std::vector<std::vector<std::string>> commands{
      {"check-trace", "--matrix", "[[2,1,0],[1,2,0],[0,0,1]]", "--matrix", "diag(1,2,2.5)"},
      {"check-trace", "--matrix", "diag(1,1,10)"},
      {"construct-A", "--matrix", "[[2,1,0],[1,2,0],[0,0,1]]", "--matrix", "diag(4,1,1)"},
      {"minimize-psi", "--matrix", "I5", "--matrix", "diag(1,2,3,4,5)", "--matrix", "diag(9,1,1,1,2)"},
      {"search-A", "--matrix", "I3", "--matrix", "diag(5,1,1)", "--restarts", "4"},
      {"build-profile", "--d", "4"},
      {"verify-lyapunov", "--gamma", "1000", "--alpha", "1e-4", "--R0", "10", "--R1", "20"},
      {"verify-lyapunov", "--d", "4", "--gamma", "10000", "--alpha", "1e-4", "--R0", "10", "--R1", "30", "--samples", "5000"},
      {"simulate", "--type", "gamma", "--d", "3", "--T", "1000", "--trials", "3", "--gamma", "50"},
      {"simulate", "--type", "cap", "--d", "3", "--T", "2000", "--trials", "50", "--summary"},
      {"sweep", "--type", "gamma", "--param", "gamma", "--values", "1,10,100,1000", "--trials", "20", "--T", "500"},
      {"cap-count", "--d", "7"},
  };
  // A failing run (exit 1) reports on stdout instead of the file; compare that.
  std::size_t runs = 0, differ = 0, failed = 0;
  for (const auto& cmd : commands) {
    for (const char* format : {"csv", "json"}) {
      std::string outputs[2];
      int codes[2] = {0, 0};
      for (int rep = 0; rep < 2; ++rep) {
        const fs::path p = dir / ("c9_" + std::to_string(runs) + "_" + std::to_string(rep));
        fs::remove(p);
        std::vector<std::string> args{"siwalk", "--seed", "99", "--threads", rep == 0 ? "1" : "0", "--format", format,
                                      "--out", p.string()};
        args.insert(args.end(), cmd.begin(), cmd.end());
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        codes[rep] = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        outputs[rep] = codes[rep] == 0 ? slurp(p) : out.str();
      }
      if (codes[0] > 1 || codes[0] != codes[1]) ++failed;
      if (outputs[0].empty() || outputs[0] != outputs[1]) ++differ;
      ++runs;
    }
  }
  return {differ == 0 && failed == 0, std::to_string(runs) + " invocations repeated, " + std::to_string(differ) +
                                          " differ, " + std::to_string(failed) + " failed"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 3-D construction margins", criterion1},
      {"2 commuting families psi < 1/2", criterion2},
      {"3 phi potential drift", criterion3},
      {"4 radial profile and capital phi", criterion4},
      {"5 gamma-walk shell certificate", criterion5},
      {"6 return frequency separation", criterion6},
      {"7 exact law equivalence", criterion7},
      {"8 cap systems and counting", criterion8},
      {"9 CLI byte reproducibility", criterion9},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
