#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "tomomotion/estimator.hpp"

using namespace tomomotion;

namespace {

bool has_flag(const std::vector<std::string>& flags, const std::string& f) {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

const testing::Rendered& reference_run() {
  static const testing::Rendered r = testing::render(testing::small_reference(12));
  return r;
}

}  // namespace

TEST_CASE("default mu grid covers n/2 multiples of the spacing") {
  const auto& r = reference_run();
  const auto mus = mu_grid(*r.stack, {});
  REQUIRE(mus.size() == 64);
  CHECK(mus.front() == doctest::Approx(0.2));
  CHECK(mus.back() == doctest::Approx(12.8));
}

TEST_CASE("reference motion is recovered on a small stack") {
  const auto& r = reference_run();
  EstimatorConfig cfg;
  cfg.phi_grid = 512;
  const MotionEstimate est = estimate_motion(r.stack, cfg, r.c3);
  const auto& f = motion_preset("paper_sec4").angular;
  REQUIRE(est.translation_xy);
  for (std::size_t l = 0; l < est.size(); ++l) {
    const double t = est.times[l];
    CHECK(((*est.translation_xy)[l] - project(r.motion.translation[l])).norm() < 1e-6);
    if (l < 2 || l + 2 >= est.size()) {
      CHECK(has_flag(est.flags[l], "edge"));
      CHECK_FALSE(est.phi[l]);
      continue;
    }
    REQUIRE(est.phi[l]);
    CHECK(std::abs(std::remainder(*est.phi[l] - f.phi(t), kPi)) < 1e-3);
    CHECK(*est.omega3[l] == doctest::Approx(f.omega3(t)).epsilon(1e-3));
    REQUIRE(est.alpha[l]);
    CHECK(*est.alpha[l] == doctest::Approx(f.alpha(t)).epsilon(0.02));
  }
}

TEST_CASE("first-order relation at the true direction") {
  const auto& r = reference_run();
  const MomentSpectra spectra(r.stack, {});
  const CylindricalJet jet = r.motion.angular.jet(5);
  const Omega3Fit fit = omega3_given_phi(spectra, 5, jet.phi[0], {});
  CHECK(fit.omega3 == doctest::Approx(jet.omega3[0]).epsilon(1e-4));
  CHECK(fit.residual < 1e-3);
  // The objective is smaller at the true direction than across it.
  CHECK(phi_objective(spectra, 5, jet.phi[0], {}) < phi_objective(spectra, 5, jet.phi[0] + 0.5, {}));
}

TEST_CASE("alpha from the normal equations at the true parameters") {
  const auto& r = reference_run();
  const MomentSpectra spectra(r.stack, {});
  const CylindricalJet jet = r.motion.angular.jet(6);
  const AlphaEstimate a =
      estimate_alpha_at(spectra, 6, jet.phi[0], jet.phi[1], jet.omega3[0], jet.omega3[1], {});
  REQUIRE_FALSE(a.rejected);
  CHECK(a.alpha == doctest::Approx(jet.alpha[0]).epsilon(1e-3));
  CHECK(a.x2 == doctest::Approx(jet.alpha[1] / jet.alpha[0]).epsilon(0.05));
  CHECK(a.condition >= 1.0);
}

TEST_CASE("third-order coefficients vanish identically when sigma = -omega3") {
  const auto& r = reference_run();
  const MomentSpectra spectra(r.stack, {});
  const AlphaCoefficients c = alpha_coefficients(spectra, 5, 1.0, 0.3, -1.5, 1.5, 0.2);
  CHECK(std::abs(c.a0) == 0.0);
  CHECK(std::abs(c.a02) == 0.0);
  CHECK(std::abs(c.a1) == 0.0);
  const AlphaEstimate a = estimate_alpha_at(spectra, 5, 0.3, -1.5, 1.5, 0.2, {});
  REQUIRE(a.rejected);
  CHECK(*a.rejected == EstimationError::Reason::alpha_degenerate);
}

TEST_CASE("frames inside the edge margin are refused") {
  const auto& r = reference_run();
  const MomentSpectra spectra(r.stack, {});
  CHECK_THROWS_AS(estimate_phi(spectra, 1, {}), EstimationError);
  CHECK_THROWS_AS(estimate_phi(spectra, r.stack->size() - 2, {}), EstimationError);
}

TEST_CASE("static stack: constant translation, phi undetermined everywhere") {
  RunConfig cfg = testing::small_reference(9);
  cfg.motion = motion_preset("static");
  const auto r = testing::render(cfg);
  const MotionEstimate est = estimate_motion(r.stack, cfg.estimator, r.c3);
  for (std::size_t l = 0; l < est.size(); ++l) {
    CHECK(((*est.translation_xy)[l] - (*est.translation_xy)[0]).norm() < 1e-12);
    CHECK_FALSE(est.phi[l]);
    CHECK_FALSE(est.alpha[l]);
    if (l >= 2 && l + 2 < est.size()) CHECK(has_flag(est.flags[l], "phi_degenerate"));
  }
}

TEST_CASE("spin about the beam axis leaves phi undetermined") {
  RunConfig cfg = testing::small_reference(9);
  cfg.motion = motion_preset("z_spin");
  const auto r = testing::render(cfg);
  const MotionEstimate est = estimate_motion(r.stack, cfg.estimator, r.c3);
  for (std::size_t l = 2; l + 2 < est.size(); ++l) {
    CHECK_FALSE(est.phi[l]);
    CHECK(has_flag(est.flags[l], "phi_degenerate"));
  }
}

TEST_CASE("too few frames") {
  RunConfig cfg = testing::small_reference(5);
  const auto r = testing::render(cfg);
  try {
    estimate_motion(r.stack, cfg.estimator, r.c3);
    FAIL("expected an estimation error");
  } catch (const EstimationError& e) {
    CHECK(e.reason() == EstimationError::Reason::insufficient_frames);
  }
}

TEST_CASE("a zero-mass frame is flagged and the run completes") {
  auto stack = std::make_shared<ProjectionStack>(*reference_run().stack);
  std::fill(stack->frames[6].begin(), stack->frames[6].end(), 0.0);
  EstimatorConfig cfg;
  cfg.phi_grid = 256;
  const MotionEstimate est = estimate_motion(stack, cfg, reference_run().c3);
  CHECK(has_flag(est.flags[6], "zero_mass"));
  CHECK_FALSE(est.phi[6]);
  CHECK(std::isnan((*est.translation_xy)[6].x()));
  CHECK(est.phi[2]);
  CHECK(est.phi[9]);
}

TEST_CASE("unwrapping modulo pi restores continuity and keeps gaps") {
  std::mt19937_64 rng(21);
  std::vector<std::optional<double>> raw;
  std::vector<double> truth;
  for (int l = 0; l < 60; ++l) {
    const double phi = 1.0 + 0.2 * l;
    truth.push_back(phi);
    raw.push_back(l == 17 ? std::nullopt
                          : std::optional<double>(std::fmod(phi, kPi) +
                                                  kPi * std::uniform_int_distribution<int>(-2, 2)(rng)));
  }
  const auto out = unwrap_mod_pi(raw);
  CHECK_FALSE(out[17]);
  const double offset = *out[0] - truth[0];
  CHECK(std::abs(std::remainder(offset, kPi)) < 1e-12);
  for (std::size_t l = 0; l < out.size(); ++l) {
    if (out[l]) CHECK(*out[l] - truth[l] == doctest::Approx(offset));
  }
}

TEST_CASE("estimator configuration is validated") {
  EstimatorConfig cfg;
  cfg.phi_grid = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.multimodal_ratio = 0.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
