#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "tomomotion/projector.hpp"

using namespace tomomotion;

namespace {

double max_relative_gap(const Frame& a, const Frame& b) {
  const double peak = *std::max_element(a.begin(), a.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]) / peak);
  return worst;
}

}  // namespace

TEST_CASE("centered geometry puts pixel n/2 at the origin") {
  const FrameGeometry g = FrameGeometry::centered(8, 6, 0.5);
  CHECK(g.coordinate(4, 3).norm() == 0.0);
  CHECK(g.coordinate(0, 0).x() == -2.0);
  CHECK(g.pixels() == 48);
  FrameGeometry bad = g;
  bad.spacing = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("projection of a Gaussian matches its closed-form line integral") {
  // Isotropic Gaussian: J(x) = A sqrt(2 pi / q) exp(-q |x - P(C3 - T_rot)|^2 / 2).
  const double q = 3.0;
  const Vec3 c(0.2, -0.3, 0.1);
  const GaussianPhantom g(c, Mat3::Identity() * q, 1.3);
  std::mt19937_64 rng(8);
  const Mat3 r = testing::random_rotation(rng);
  const Vec3 t(0.4, -0.2, 0.7);
  const FrameGeometry geo = FrameGeometry::centered(48, 48, 0.2);
  const Frame frame = render_projection(g, c, r, t, geo, {}, g.mass());
  // The preimage of c is x = c - T.
  const Vec2 centre = project(c - t);
  double worst = 0.0;
  for (std::size_t i2 = 0; i2 < geo.n2; ++i2) {
    for (std::size_t i1 = 0; i1 < geo.n1; ++i1) {
      const Vec2 x = geo.coordinate(i1, i2);
      const double exact = 1.3 * std::sqrt(2 * kPi / q) * std::exp(-0.5 * q * (x - centre).squaredNorm());
      worst = std::max(worst, std::abs(frame[i2 * geo.n1 + i1] - exact));
    }
  }
  CHECK(worst < 1e-12);
  CHECK((center2(frame, geo) - centre).norm() < 1e-10);
}

TEST_CASE("translation along the beam leaves frames unchanged") {
  const PointProductPhantom u = reference_phantom();
  const FrameGeometry geo = FrameGeometry::centered(96, 96, 0.3);
  const PhantomMoments m = phantom_moments(u, 0.3);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 3; ++i) {
    const Mat3 r = testing::random_rotation(rng);
    const Vec3 t(testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1));
    const Frame a = render_projection(u, m.center, r, t, geo, {}, m.mass);
    const Frame b = render_projection(u, m.center, r, t + Vec3(0, 0, 0.37), geo, {}, m.mass);
    CHECK(max_relative_gap(a, b) <= 1e-10);
  }
}

TEST_CASE("frame mass equals the phantom mass") {
  RunConfig cfg = testing::small_reference(3);
  const auto rendered = testing::render(cfg);
  const double mass = phantom_moments(*cfg.phantom.build(), 0.2).mass;
  for (std::size_t l = 0; l < rendered.stack->size(); ++l) {
    CHECK(rendered.stack->mass(l) == doctest::Approx(mass).epsilon(1e-9));
  }
}

TEST_CASE("a detector too small for the support is rejected") {
  const PointProductPhantom u = reference_phantom();
  const PhantomMoments m = phantom_moments(u, 0.1);
  const FrameGeometry geo = FrameGeometry::centered(64, 64, 0.1);
  CHECK_THROWS_AS(render_projection(u, m.center, Mat3::Identity(), Vec3::Zero(), geo, {}, m.mass),
                  RenderError);
}

TEST_CASE("identity motion of a Gaussian gives identical frames") {
  RunConfig cfg;
  cfg.phantom.kind = PhantomSpec::Kind::gaussian;
  cfg.phantom.precision = Mat3::Identity() * 2.0;
  cfg.motion = motion_preset("static");
  cfg.geometry.n1 = cfg.geometry.n2 = 32;
  cfg.geometry.spacing = 0.3;
  cfg.geometry.n_frames = 5;
  const auto rendered = testing::render(cfg);
  for (std::size_t l = 1; l < rendered.stack->size(); ++l) {
    CHECK(max_relative_gap(rendered.stack->frames[0], rendered.stack->frames[l]) <= 1e-12);
  }
}

TEST_CASE("center of a zero frame is rejected") {
  const FrameGeometry geo = FrameGeometry::centered(4, 4, 1.0);
  CHECK_THROWS_AS(center2(Frame(16, 0.0), geo), InvalidArgument);
}

TEST_CASE("ground truth rotation is consistent with its angular parameters") {
  const auto rendered = testing::render(testing::small_reference(8));
  CHECK(rendered.motion.consistency_error() < 1e-12);
  CHECK(rendered.motion.size() == 8);
}
