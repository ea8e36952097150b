#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "tomomotion/commands.hpp"
#include "tomomotion/stack_io.hpp"

using namespace tomomotion;
namespace fs = std::filesystem;

namespace {

fs::path write_config(const fs::path& dir, const nlohmann::json& doc) {
  const fs::path p = dir / "run.json";
  write_file_atomic(p, doc.dump());
  return p;
}

nlohmann::json small_run(std::size_t frames) {
  return {{"phantom", {{"type", "reference"}}},
          {"motion", {{"preset", "paper_sec4"}}},
          {"geometry", {{"n1", 96}, {"n2", 96}, {"spacing", 0.3}, {"n_frames", frames}}},
          {"estimator", {{"phi_grid", 256}}}};
}

bool same_bytes(const fs::path& a, const fs::path& b) { return read_file(a) == read_file(b); }

}  // namespace

TEST_CASE("simulate, estimate and compare") {
  const auto dir = testing::scratch_dir("pipeline");
  std::ostringstream log;
  const fs::path config = write_config(dir, small_run(9));
  REQUIRE(cmd_simulate(config, dir / "sim", log) == kExitOk);
  for (const char* f : {kStackBlob, kStackHeader, kTruthFile, kConfigFile}) CHECK(fs::exists(dir / "sim" / f));

  REQUIRE(cmd_estimate(dir / "sim", dir / "sim" / kTruthFile, dir / "est.csv", std::nullopt, log) == kExitOk);
  REQUIRE(cmd_compare(dir / "est.csv", dir / "sim" / kTruthFile, dir / "cmp.csv", log) == kExitOk);
  const Comparison c = compare_estimate(read_estimate_csv(dir / "est.csv"), read_truth_csv(dir / "sim" / kTruthFile));
  CHECK(c.txy.max < 1e-6);
  CHECK(c.phi.count == 5);
  CHECK(c.phi.max < 1e-2);
}

TEST_CASE("repeated runs produce identical artifacts") {
  const auto dir = testing::scratch_dir("determinism");
  std::ostringstream log;
  const fs::path config = write_config(dir, small_run(8));
  for (const char* run : {"a", "b"}) {
    REQUIRE(cmd_simulate(config, dir / run, log) == kExitOk);
    REQUIRE(cmd_estimate(dir / run, dir / run / kTruthFile, dir / run / "est.csv", std::nullopt, log) == kExitOk);
  }
  for (const char* f : {kStackBlob, kStackHeader, kTruthFile, kConfigFile, "est.csv"}) {
    CAPTURE(f);
    CHECK(same_bytes(dir / "a" / f, dir / "b" / f));
  }
}

TEST_CASE("estimation without a truth table omits the translation") {
  const auto dir = testing::scratch_dir("no_truth");
  std::ostringstream log;
  REQUIRE(cmd_simulate(write_config(dir, small_run(7)), dir / "sim", log) == kExitOk);
  REQUIRE(cmd_estimate(dir / "sim", std::nullopt, dir / "est.csv", std::nullopt, log) == kExitOk);
  CHECK_FALSE(read_estimate_csv(dir / "est.csv").translation_xy);
}

TEST_CASE("command errors") {
  const auto dir = testing::scratch_dir("errors");
  std::ostringstream log;
  auto bad = small_run(9);
  bad["geometry"]["dt"] = 0.0;
  CHECK_THROWS_AS(cmd_simulate(write_config(dir, bad), dir / "sim", log), ConfigError);

  REQUIRE(cmd_simulate(write_config(dir, small_run(5)), dir / "short", log) == kExitOk);
  CHECK_THROWS_AS(cmd_estimate(dir / "short", std::nullopt, dir / "est.csv", std::nullopt, log),
                  EstimationError);
  CHECK_THROWS_AS(cmd_estimate(dir / "missing", std::nullopt, dir / "est.csv", std::nullopt, log), IoError);
}

TEST_CASE("verify exit codes") {
  std::ostringstream log;
  VerifyOptions opts;
  opts.quick = true;
  const auto dir = testing::scratch_dir("verify");
  CHECK(cmd_verify("taylor", dir / "taylor.json", opts, log) == kExitOk);
  CHECK(fs::exists(dir / "taylor.json"));
  CHECK_THROWS_AS(cmd_verify("none", std::nullopt, opts, log), InvalidArgument);
}
