#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "tomomotion/run_config.hpp"

using namespace tomomotion;
using nlohmann::json;

namespace {

std::string error_field(const json& doc) {
  try {
    parse_run_config(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("the reference preset") {
  const RunConfig cfg = parse_run_config(json{{"preset", "paper_sec4"}});
  CHECK(cfg.geometry.n1 == 256);
  CHECK(cfg.geometry.n_frames == 200);
  CHECK(cfg.geometry.dt == 5e-4);
  CHECK(cfg.geometry.spacing == 0.1);
  const double t = 0.05;
  CHECK(cfg.motion.angular.alpha(t) == doctest::Approx(1.0 + 10 * t * t));
  CHECK(cfg.motion.angular.phi(t) == doctest::Approx(kPi / 3 + kPi * t));
  CHECK(cfg.motion.angular.omega3(t) == doctest::Approx(0.5 + std::sqrt(0.5 + 5 * t)));
  CHECK(cfg.motion.translation[0](t) == doctest::Approx(std::cos(6 * t) * std::cos(12 * t)));
  CHECK(cfg.motion.translation[1](t) == doctest::Approx(std::cos(6 * t) * std::sin(12 * t)));
  CHECK(cfg.motion.translation[2](t) == doctest::Approx(std::sin(t)));
}

TEST_CASE("malformed fields are reported by path") {
  CHECK(error_field(json{{"geometry", {{"dt", 0.0}}}}) == "geometry.dt");
  CHECK(error_field(json{{"geometry", {{"dt", -1.0}}}}) == "geometry.dt");
  CHECK(error_field(json{{"geometry", {{"n1", "many"}}}}) == "geometry.n1");
  CHECK(error_field(json{{"geometry", {{"bogus", 1}}}}) == "geometry.bogus");
  CHECK(error_field(json{{"motion", {{"alpha", {{"polynomial", "x"}}}}}}) == "motion.alpha.polynomial");
  CHECK(error_field(json{{"motion", {{"alpha", -1.0}}}}) == "motion.alpha");
  CHECK(error_field(json{{"phantom", {{"type", "cube"}}}}) == "phantom.type");
  CHECK(error_field(json{{"estimator", {{"phi_grid", 0}}}}) == "estimator.phi_grid");
  CHECK(error_field(json{{"motion", {{"preset", "nope"}}}}) == "motion.preset");
  CHECK(error_field(json::array()) != "");
}

TEST_CASE("configuration documents round trip through their normal form") {
  for (const char* preset : {"paper_sec4", "static", "z_spin", "sigma_minus_omega3"}) {
    json doc{{"motion", {{"preset", preset}}},
             {"geometry", {{"n1", 64}, {"n2", 48}, {"n_frames", 9}}},
             {"phantom", {{"type", "gaussian"}, {"widths", {0.5, 0.6, 0.7}}}},
             {"seed", 42}};
    const RunConfig cfg = parse_run_config(doc);
    const json normal = to_json(cfg);
    CHECK(to_json(parse_run_config(normal)) == normal);
  }
}

TEST_CASE("parsing never crashes on mutated documents") {
  // Replace random leaves of a valid document by values of the wrong kind.
  const json base = to_json(reference_config());
  const std::vector<json> junk{json(), json("text"), json(-1.0), json(0), json::array(),
                               json::object(), json(true), json(1e308)};
  std::mt19937_64 rng(5);
  std::vector<json::json_pointer> leaves;
  const json flat = base.flatten();
  for (const auto& item : flat.items()) leaves.emplace_back(item.key());
  for (int i = 0; i < 300; ++i) {
    json doc = base;
    const auto& ptr = leaves[std::uniform_int_distribution<std::size_t>(0, leaves.size() - 1)(rng)];
    doc[ptr] = junk[std::uniform_int_distribution<std::size_t>(0, junk.size() - 1)(rng)];
    try {
      parse_run_config(doc);
    } catch (const ConfigError&) {
    }
  }
}

TEST_CASE("time functions in documents") {
  const TimeFunction f = parse_time_function(
      json{{"polynomial", {1.0, 2.0}}, {"sin", {{0.5, 3.0, 0.0}}}, {"sqrt", {{1.0, 0.5, 5.0}}}}, "f");
  const double t = 0.2;
  CHECK(f(t) == doctest::Approx(1.0 + 2 * t + 0.5 * std::sin(3 * t) + std::sqrt(0.5 + 5 * t)));
  CHECK_THROWS_AS(parse_time_function(json{{"sin", {{1.0, 2.0}}}}, "f"), ConfigError);
  CHECK_THROWS_AS(parse_time_function(json{{"exp", 1}}, "f"), ConfigError);
}

TEST_CASE("closures that leave their domain on the time grid are rejected") {
  json doc{{"motion", {{"omega3", {{"sqrt", {{1.0, 0.01, -1.0}}}}}}}};
  CHECK(error_field(doc).rfind("motion.omega3", 0) == 0);
}
