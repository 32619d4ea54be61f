#include <doctest.h>

#include "cli/config.hpp"
#include "crackfreq/errors.hpp"

using namespace crackfreq;
using namespace crackfreq::cli;

TEST_CASE("defaults and round trip") {
  const RunConfig cfg = parse_config(R"({"scenario":"fem_constant_potential","mesh":{"levels":6},"k":1})");
  CHECK(cfg.scenario == Scenario::fem_constant_potential);
  CHECK(cfg.mesh.levels == 6);
  CHECK(cfg.mesh.base_resolution == 64);
  const std::string text = config_to_json(cfg).dump();
  const RunConfig back = parse_config(text);
  CHECK(config_to_json(back).dump() == text);
}

TEST_CASE("unknown keys are rejected at every level") {
  for (const char* text : {R"({"scenario":"exact_harmonic","levels":3})",
                           R"({"scenario":"exact_harmonic","mesh":{"level":3}})",
                           R"({"scenario":"exact_harmonic","potential":{"eps":0.5}})",
                           R"({"scenario":"exact_harmonic","radii":{"first":0.5,"step":0.5,"count":12}})",
                           R"({"scenario":"exact_harmonic","tolerances":{"gama":0.1}})"})
    CHECK_THROWS_AS(parse_config(text), ConfigError);
}

TEST_CASE("malformed and out-of-range configs") {
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"k":1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario":"nope"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario":"exact_harmonic","k":"one"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario":"exact_harmonic","potential":{"epsilon":1.0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario":"exact_harmonic","potential":{"epsilon":0.0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario":"exact_harmonic","mesh":{"radius":1.5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario":"exact_harmonic","lambdas":{"first":0.4,"ratio":0.5,"count":5}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario":"exact_harmonic","radii":{"first":0.4,"ratio":0.5,"count":9}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario":"sphere_spectrum","eigen_count":13})"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/run.json"), ConfigError);
}

TEST_CASE("schedules expand geometrically") {
  const Schedule s{0.8, 0.5, 4};
  CHECK(expand(s, false) == std::vector<double>{0.8, 0.4, 0.2, 0.1});
  CHECK(expand(s, true) == std::vector<double>{0.1, 0.2, 0.4, 0.8});
}
