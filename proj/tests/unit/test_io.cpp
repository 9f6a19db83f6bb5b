#include <cmath>
#include <cstdlib>
#include <limits>

#include "siwalk/errors.hpp"
#include "siwalk/io.hpp"
#include "test_support.hpp"

using namespace siwalk;
using siwalk::test::vec;

TEST_CASE("format_double") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("property: format_double round-trips") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double x = std::ldexp(rng.uniform() - 0.5, static_cast<int>(rng.uniform() * 200) - 100);
    CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
  }
}

TEST_CASE("measure json") {
  const FiniteMeasure mu = test::measure(2, {{vec({1, 0}), 0.25}, {vec({-1, 0}), 0.25}, {vec({0, 3}), 0.5}});
  const Json j = measure_to_json(mu);
  CHECK(j.at("dim") == 2);
  const FiniteMeasure back = measure_from_json(j);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.point(i) == mu.point(i));
    CHECK(back.weight(i) == mu.weight(i));
  }
  CHECK(measure_to_json(back) == j);

  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"atoms":[{"point":[1],"weight":0.6}]})")), InvalidArgument);
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"atoms":[{"point":[1]}]})")), InvalidArgument);
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"atoms":[{"point":[1],"weight":1}],"extra":1})")),
                  InvalidArgument);
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"dim":2,"atoms":[{"point":[1],"weight":1}]})")), Error);
  CHECK_THROWS_AS(measure_from_json(Json::parse("[1,2]")), InvalidArgument);
}

TEST_CASE("parse_matrix forms") {
  const Matrix a = parse_matrix("[[2,1],[1,3]]");
  CHECK(a(0, 1) == 1.0);
  CHECK(a(1, 1) == 3.0);
  const Matrix d = parse_matrix(" diag(1, 2.5, 4) ");
  CHECK(d.rows() == 3);
  CHECK(d(1, 1) == 2.5);
  CHECK(d(0, 1) == 0.0);
  CHECK(parse_matrix("I4") == Matrix::Identity(4, 4));
  CHECK(matrix_from_json(matrix_to_json(a)) == a);

  for (const char* bad : {"", "[[1,2],[3]]", "[1,2", "diag()", "diag(1,x)", "I0", "I2.5", "J3", "[]"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_matrix(bad), InvalidArgument);
  }
}

TEST_CASE("walk spec and experiment config") {
  WalkSpec spec;
  spec.kind = WalkKind::cap;
  spec.dim = 4;
  spec.eps = 0.125;
  spec.theta = 0.5;
  spec.cap_seed = 17;
  const Json j = walk_spec_to_json(spec);
  CHECK(walk_spec_to_json(walk_spec_from_json(j)) == j);

  WalkSpec generic;
  generic.kind = WalkKind::generic;
  generic.dim = 1;
  generic.measures = {test::measure(1, {{vec({1}), 0.5}, {vec({-1}), 0.5}})};
  generic.rule = "alternating";
  const Json g = walk_spec_to_json(generic);
  CHECK(walk_spec_to_json(walk_spec_from_json(g)) == g);

  CHECK_THROWS_AS(walk_spec_from_json(Json::parse(R"({"type":"levy"})")), InvalidArgument);
  CHECK_THROWS_AS(walk_spec_from_json(Json::parse(R"({"gamma":1,"colour":2})")), InvalidArgument);

  const ExperimentConfig cfg =
      experiment_from_json(Json::parse(R"({"type":"gamma","dim":3,"gamma":50,"trials":7,"T":100,"r":2,"R":9,"seed":4})"));
  CHECK(cfg.walk.kind == WalkKind::gamma);
  CHECK(cfg.walk.gamma == 50.0);
  CHECK(cfg.trials == 7);
  CHECK(cfg.horizon == 100);
  CHECK(cfg.return_radius == 2.0);
  CHECK(cfg.escape_radius == 9.0);
  CHECK(cfg.seed == 4);
  CHECK_THROWS_AS(experiment_from_json(Json::parse(R"({"trials":-1})")), InvalidArgument);
  CHECK_THROWS_AS(experiment_from_json(Json::parse(R"({"T":"long"})")), InvalidArgument);
  CHECK_THROWS_AS(experiment_from_json(Json::parse(R"({"horizon":10})")), InvalidArgument);
}

TEST_CASE("dump_json layout is fixed") {
  const Json j = {{"b", 0.1}, {"a", Json::array({1, 2})}, {"c", Json::array({Json::object({{"x", true}})})}};
  CHECK(dump_json(j) ==
        "{\n  \"a\": [1, 2],\n  \"b\": 0.10000000000000001,\n  \"c\": [\n    {\n      \"x\": true\n    }\n  ]\n}");
  CHECK(Json::parse(dump_json(j)) == j);
}

TEST_CASE("json files") {
  CHECK_THROWS_AS(read_json_file("/nonexistent/siwalk.json"), InvalidArgument);
}
