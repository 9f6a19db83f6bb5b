#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "siwalk_cli/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "siwalk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = siwalk::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path tmpdir() {
  const fs::path dir = SIWALK_TEST_TMPDIR;
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void expect_failure_json(const Result& r) {
  CHECK(r.code == 1);
  const json j = json::parse(r.out);
  CHECK(j.is_object());
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  const Result unknown = run({"cap-count", "--d", "3", "--bogus"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("--bogus") != std::string::npos);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"cap-count", "--d", "3", "build-profile"}).code == 2);
  CHECK(run({"--format", "xml", "cap-count", "--d", "3"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("check-trace") {
  const Result ok = run({"check-trace", "--matrix", "I3", "--matrix", "diag(1,2,2.5)"});
  CHECK(ok.code == 0);
  const json j = json::parse(ok.out);
  CHECK(j.at("pass") == true);
  CHECK(j.at("margins").size() == 2);
  expect_failure_json(run({"check-trace", "--matrix", "diag(1,1,10)"}));
  expect_failure_json(run({"check-trace", "--matrix", "I2"}));
  CHECK(run({"check-trace", "--matrix", "diag(1,1,10)", "--A", "diag(3,3,1)"}).code == 0);
  CHECK(run({"check-trace", "--matrix", "[[1,2],[3]]"}).code == 2);
  CHECK(run({"check-trace"}).code == 2);
}

TEST_CASE("construct-A") {
  const Result ok = run({"construct-A", "--matrix", "[[2,1,0],[1,2,0],[0,0,1]]", "--matrix", "diag(4,1,1)"});
  CHECK(ok.code == 0);
  const json j = json::parse(ok.out);
  CHECK(j.at("pass") == true);
  CHECK(j.at("A").size() == 3);
  CHECK(run({"construct-A", "--matrix", "I3"}).code == 2);
  CHECK(run({"construct-A", "--matrix", "I3", "--matrix", "I4"}).code == 2);
  CHECK(run({"construct-A", "--matrix", "I3", "--matrix", "diag(1,1,-1)"}).code == 2);
}

TEST_CASE("minimize-psi") {
  const Result ok = run({"minimize-psi", "--matrix", "I4", "--matrix", "diag(1,2,3,4)", "--matrix", "diag(9,1,1,1)"});
  CHECK(ok.code == 0);
  CHECK(json::parse(ok.out).at("psi").get<double>() < 0.5);
  CHECK(run({"minimize-psi", "--matrix", "I3", "--matrix", "[[2,1,0],[1,2,0],[0,0,1]]", "--matrix",
             "[[1,0,0],[0,2,1],[0,1,2]]"})
            .code == 2);
  CHECK(run({"minimize-psi", "--matrix", "I2"}).code == 2);
}

TEST_CASE("search-A") {
  const Result ok = run({"--seed", "3", "search-A", "--matrix", "I3", "--matrix", "diag(4,1,1)"});
  CHECK(ok.code == 0);
  CHECK(json::parse(ok.out).at("pass") == true);
  expect_failure_json(run({"--seed", "3", "search-A", "--matrix", "I2", "--restarts", "2"}));
  CHECK(run({"search-A", "--restarts", "x", "--matrix", "I3"}).code == 2);
}

TEST_CASE("build-profile") {
  const Result csv = run({"build-profile", "--d", "3", "--knots", "64"});
  CHECK(csv.code == 0);
  CHECK(csv.out.rfind("r,h,H,psi,dpsi\n", 0) == 0);
  const Result js = run({"--format", "json", "build-profile", "--d", "4", "--knots", "64"});
  CHECK(js.code == 0);
  CHECK(json::parse(js.out).at("b").get<double>() > 0.0);
  CHECK(run({"build-profile", "--d", "2"}).code == 2);
  expect_failure_json(run({"build-profile", "--d", "3", "--eps0", "0.4"}));
}

TEST_CASE("verify-lyapunov") {
  const Result ok = run({"verify-lyapunov", "--gamma", "1000", "--alpha", "1e-4", "--R0", "10", "--R1", "14"});
  CHECK(ok.code == 0);
  const json j = json::parse(ok.out);
  CHECK(j.at("pass") == true);
  CHECK(j.at("positive") == 0);
  const Result bad = run({"verify-lyapunov", "--gamma", "1", "--alpha", "1e-4", "--R0", "10", "--R1", "14"});
  expect_failure_json(bad);
  CHECK(json::parse(bad.out).at("worst_drift").get<double>() > 0.0);
  CHECK(run({"verify-lyapunov", "--gamma", "1000"}).code == 2);
  CHECK(run({"verify-lyapunov", "--d", "2", "--gamma", "10", "--alpha", "1e-3"}).code == 2);
  expect_failure_json(run({"verify-lyapunov", "--gamma-grid", "1,2", "--alpha-grid", "1e-4", "--R0", "10", "--R1", "12"}));
}

TEST_CASE("simulate") {
  const Result csv = run({"--seed", "4", "simulate", "--type", "gamma", "--d", "3", "--T", "20", "--gamma", "5"});
  CHECK(csv.code == 0);
  CHECK(csv.out.rfind("t,x0,x1,x2,choice\n", 0) == 0);
  const Result multi = run({"--seed", "4", "simulate", "--type", "cap", "--d", "3", "--T", "10", "--trials", "2"});
  CHECK(multi.code == 0);
  CHECK(multi.out.rfind("trial,t,", 0) == 0);
  const Result summary =
      run({"--seed", "4", "simulate", "--type", "gamma", "--T", "200", "--trials", "5", "--summary", "--r", "1", "--R", "4"});
  CHECK(summary.code == 0);
  CHECK(summary.out.rfind("trial,exit_time,returned,return_count,final_norm\n", 0) == 0);
  CHECK(run({"simulate", "--type", "levy"}).code == 2);
  CHECK(run({"simulate", "--type", "gamma", "--r", "5", "--R", "1", "--summary"}).code == 2);
}

TEST_CASE("sweep") {
  const Result ok = run({"--seed", "2", "sweep", "--type", "gamma", "--param", "gamma", "--values", "1,10,100",
                         "--trials", "4", "--T", "100", "--r", "1", "--R", "4"});
  CHECK(ok.code == 0);
  CHECK(std::count(ok.out.begin(), ok.out.end(), '\n') == 4);
  CHECK(run({"sweep", "--param", "colour", "--values", "1"}).code == 2);
  CHECK(run({"sweep", "--param", "gamma"}).code == 2);
}

TEST_CASE("cap-count") {
  const Result r = run({"cap-count", "--d", "3"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("6.828427", 0) == 0);
  CHECK(run({"cap-count", "--d", "1"}).code == 2);
  CHECK(run({"cap-count"}).code == 2);
}

TEST_CASE("config file and thread fallback") {
  const fs::path cfg = tmpdir() / "walk.json";
  {
    std::ofstream f(cfg);
    f << R"({"type":"gamma","dim":3,"gamma":20,"trials":6,"T":150,"r":1,"R":4,"seed":8})";
  }
  const Result a = run({"--config", cfg.string(), "simulate", "--summary"});
  CHECK(a.code == 0);
  CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 7);
  CHECK(run({"--config", (tmpdir() / "missing.json").string(), "simulate", "--summary"}).code == 2);

  ::setenv("SIWALK_THREADS", "2", 1);
  const Result b = run({"--config", cfg.string(), "simulate", "--summary"});
  CHECK(b.out == a.out);
  ::setenv("SIWALK_THREADS", "many", 1);
  CHECK(run({"--config", cfg.string(), "simulate", "--summary"}).code == 2);
  CHECK(run({"--threads", "1", "--config", cfg.string(), "simulate", "--summary"}).code == 0);
  ::unsetenv("SIWALK_THREADS");
}

TEST_CASE("property: repeated invocations write identical bytes") {
  const std::vector<std::vector<std::string>> commands = {
      {"simulate", "--type", "gamma", "--T", "300", "--trials", "3"},
      {"simulate", "--type", "cap", "--d", "4", "--T", "200", "--trials", "20", "--summary"},
      {"sweep", "--type", "gamma", "--param", "gamma", "--values", "1,30", "--trials", "5", "--T", "100"},
      {"search-A", "--matrix", "I3", "--matrix", "diag(5,1,1)", "--restarts", "3"},
      {"build-profile", "--d", "5", "--knots", "128"},
  };
  int index = 0;
  for (const auto& cmd : commands) {
    for (const char* format : {"csv", "json"}) {
      const fs::path p1 = tmpdir() / ("rep_" + std::to_string(index) + "_a");
      const fs::path p2 = tmpdir() / ("rep_" + std::to_string(index) + "_b");
      ++index;
      std::vector<std::string> args1 = {"--seed", "77", "--format", format, "--out", p1.string()};
      std::vector<std::string> args2 = {"--seed", "77", "--format", format, "--out", p2.string()};
      args1.insert(args1.end(), cmd.begin(), cmd.end());
      args2.insert(args2.end(), cmd.begin(), cmd.end());
      const Result r1 = run(args1), r2 = run(args2);
      CAPTURE(cmd[0]);
      CHECK(r1.code == 0);
      CHECK(r2.code == 0);
      const std::string b1 = slurp(p1);
      CHECK(!b1.empty());
      CHECK(b1 == slurp(p2));
    }
  }
  CHECK(run({"--out", "/nonexistent/dir/x.csv", "cap-count", "--d", "3"}).code == 2);
}
