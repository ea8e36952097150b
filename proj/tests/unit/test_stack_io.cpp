#include <doctest.h>

#include <cmath>
#include <fstream>

#include "helpers.hpp"
#include "tomomotion/stack_io.hpp"

using namespace tomomotion;
namespace fs = std::filesystem;

namespace {

ProjectionStack tiny_stack() {
  ProjectionStack s;
  s.geometry = FrameGeometry::centered(5, 3, 0.25);
  s.dt = 1e-3;
  s.t0 = 0.5;
  std::mt19937_64 rng(1);
  for (int l = 0; l < 4; ++l) {
    Frame f(15);
    for (double& v : f) v = testing::uniform(rng, 0.0, 1.0) / 3.0;
    s.frames.push_back(f);
  }
  return s;
}

MotionEstimate estimate_from_truth(const TruthTable& truth) {
  MotionEstimate e;
  e.times = truth.times;
  std::vector<Vec2> t;
  for (std::size_t l = 0; l < truth.size(); ++l) {
    e.c2.push_back(Vec2(0.1, 0.2));
    t.push_back(project(truth.translation[l]));
    e.phi.push_back(truth.phi[l]);
    e.omega3.push_back(truth.omega3[l]);
    e.alpha.push_back(truth.alpha[l]);
    e.phi_objective.push_back(std::nullopt);
    e.omega3_residual.push_back(std::nullopt);
    e.alpha_condition.push_back(std::nullopt);
    e.flags.push_back({});
  }
  e.translation_xy = t;
  return e;
}

}  // namespace

TEST_CASE("stack round trip is bit-exact and checksummed") {
  const auto dir = testing::scratch_dir("stack");
  const ProjectionStack s = tiny_stack();
  write_stack(s, dir);
  const ProjectionStack back = read_stack(dir);
  CHECK(back.frames == s.frames);
  CHECK(back.geometry.n1 == 5);
  CHECK(back.geometry.n2 == 3);
  CHECK(back.dt == s.dt);
  CHECK(back.t0 == s.t0);
  CHECK(stack_checksum(back) == stack_checksum(s));
  CHECK(fs::file_size(dir / kStackBlob) == 4 * 15 * 8);
}

TEST_CASE("corrupted blob fails the checksum") {
  const auto dir = testing::scratch_dir("corrupt");
  write_stack(tiny_stack(), dir);
  {
    std::fstream f(dir / kStackBlob, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(17);
    f.put('\x7f');
  }
  CHECK_THROWS_AS(read_stack(dir), IoError);
  fs::remove(dir / kStackBlob);
  CHECK_THROWS_AS(read_stack(dir), IoError);
}

TEST_CASE("malformed header is a configuration error") {
  const auto dir = testing::scratch_dir("header");
  write_stack(tiny_stack(), dir);
  write_file_atomic(dir / kStackHeader, "{\"format\": \"tomomotion-stack\"}");
  CHECK_THROWS_AS(read_stack(dir), ConfigError);
}

TEST_CASE("truth and estimate tables round trip") {
  const auto dir = testing::scratch_dir("tables");
  const auto r = testing::render(testing::small_reference(3));
  const TruthTable truth = truth_table(r.motion, r.c3);
  write_truth_csv(truth, dir / "truth.csv");
  const TruthTable back = read_truth_csv(dir / "truth.csv");
  REQUIRE(back.c3);
  CHECK(*back.c3 == r.c3);
  CHECK(back.times == truth.times);
  CHECK(back.phi == truth.phi);
  for (std::size_t l = 0; l < truth.size(); ++l) CHECK(back.rotation[l] == truth.rotation[l]);

  MotionEstimate e = estimate_from_truth(truth);
  e.alpha[1] = std::nullopt;
  e.flags[1] = {"edge", "alpha_degenerate"};
  write_estimate_csv(e, dir / "est.csv");
  const MotionEstimate eb = read_estimate_csv(dir / "est.csv");
  CHECK(eb.times == e.times);
  CHECK(eb.phi == e.phi);
  CHECK(eb.alpha == e.alpha);
  CHECK(eb.flags == e.flags);
  REQUIRE(eb.translation_xy);
  CHECK((*eb.translation_xy)[2] == (*e.translation_xy)[2]);
}

TEST_CASE("comparison: exact estimate, pi offsets and mismatched times") {
  const auto r = testing::render(testing::small_reference(4));
  const TruthTable truth = truth_table(r.motion, r.c3);
  MotionEstimate e = estimate_from_truth(truth);
  Comparison c = compare_estimate(e, truth);
  CHECK(c.phi.max == 0.0);
  CHECK(c.alpha.max == 0.0);
  CHECK(c.txy.max == 0.0);

  for (auto& p : e.phi) *p += kPi;
  c = compare_estimate(e, truth);
  CHECK(c.phi.max < 1e-12);

  e.times[2] += 1e-3;
  CHECK_THROWS_AS(compare_estimate(e, truth), InvalidArgument);
}

TEST_CASE("comparison summary reports max and median") {
  const auto dir = testing::scratch_dir("compare");
  const auto r = testing::render(testing::small_reference(3));
  const TruthTable truth = truth_table(r.motion, std::nullopt);
  MotionEstimate e = estimate_from_truth(truth);
  *e.omega3[0] += 0.1;
  *e.omega3[1] += 0.3;
  const Comparison c = compare_estimate(e, truth);
  CHECK(c.omega3.max == doctest::Approx(0.3));
  CHECK(c.omega3.median == doctest::Approx(0.1));
  write_comparison_csv(c, dir / "cmp.csv");
  CHECK(read_file(dir / "cmp.csv").find("# max") != std::string::npos);
}

TEST_CASE("doubles are written with round-trip precision") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}
