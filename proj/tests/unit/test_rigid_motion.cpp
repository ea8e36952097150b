#include <doctest.h>

#include <chrono>
#include <cmath>

#include <Eigen/Geometry>

#include "helpers.hpp"
#include "tomomotion/rigid_motion.hpp"

using namespace tomomotion;
using testing::random_rotation;
using testing::uniform;

namespace {

CylindricalFunctions reference_angular() { return motion_preset("paper_sec4").angular; }

std::vector<double> grid(std::size_t n, double dt) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * dt;
  return t;
}

// omega and its first two derivatives from the cylindrical jet.
std::array<Vec3, 3> omega_jet(const CylindricalJet& j) {
  const double c = std::cos(j.phi[0]);
  const double s = std::sin(j.phi[0]);
  const double a = j.alpha[0], a1 = j.alpha[1], a2 = j.alpha[2];
  const double p1 = j.phi[1], p2 = j.phi[2];
  const Vec3 w(a * c, a * s, j.omega3[0]);
  const Vec3 w1(a1 * c - a * p1 * s, a1 * s + a * p1 * c, j.omega3[1]);
  const Vec3 w2(a2 * c - 2 * a1 * p1 * s - a * p2 * s - a * p1 * p1 * c,
                a2 * s + 2 * a1 * p1 * c + a * p2 * c - a * p1 * p1 * s, j.omega3[2]);
  return {w, w1, w2};
}

}  // namespace

TEST_CASE("integrated rotations stay in SO(3) over 1000 steps") {
  const auto start = std::chrono::steady_clock::now();
  const auto params = AngularParams::from_functions(reference_angular(), grid(1001, 5e-4));
  const RotationTrajectory traj = integrate_rotation(params, Mat3::Identity(), params.times());
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  double orth = 0.0;
  double det = 0.0;
  for (const Mat3& r : traj.matrices()) {
    orth = std::max(orth, orthogonality_error(r));
    det = std::max(det, determinant_error(r));
  }
  CHECK(orth <= 1e-10);
  CHECK(det <= 1e-10);
  CHECK(seconds < 1.0);
}

TEST_CASE("constant alpha and omega3 with sigma = -omega3 has a closed-form rotation") {
  // R(t) = exp(alpha t [e1]x) exp(omega3 t [e3]x) solves R' = R [omega]x for
  // omega = (alpha cos phi, alpha sin phi, omega3) with phi = -omega3 t.
  const double alpha = 0.8;
  const double omega3 = 1.7;
  CylindricalFunctions f{TimeFunction::constant(alpha), TimeFunction::polynomial({0.0, -omega3}),
                         TimeFunction::constant(omega3)};
  const auto params = AngularParams::from_functions(f, grid(1001, 1e-3));
  const RotationTrajectory traj = integrate_rotation(params, Mat3::Identity(), params.times());
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times()[i];
    const Mat3 exact = (Eigen::AngleAxisd(alpha * t, Vec3::UnitX()) *
                        Eigen::AngleAxisd(omega3 * t, Vec3::UnitZ()))
                           .toRotationMatrix();
    worst = std::max(worst, (traj[i] - exact).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-8);

  // Common line direction: sin(alpha (t - s)) / (t - s) (cos omega3 s, -sin omega3 s).
  const double s = traj.times()[100];
  const double t = traj.times()[300];
  const Vec2 cl = common_line_direction(traj[100], traj[300], s, t);
  const double scale = std::sin(alpha * (t - s)) / (t - s);
  CHECK(cl.x() == doctest::Approx(scale * std::cos(omega3 * s)).epsilon(1e-7));
  CHECK(cl.y() == doctest::Approx(-scale * std::sin(omega3 * s)).epsilon(1e-7));
}

TEST_CASE("common line directions of swapped arguments") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    const Mat3 rs = random_rotation(rng);
    const Mat3 rt = random_rotation(rng);
    const double s = uniform(rng, 0, 1);
    const double t = s + uniform(rng, 0.1, 1);
    // (Rt e3) x (Rs e3) = -(Rs e3) x (Rt e3), both seen from their own frames.
    const Vec3 lhs = Vec3::UnitZ().cross(rs.transpose() * rt * Vec3::UnitZ());
    const Vec3 rhs = -(rs.transpose() * rt) * Vec3::UnitZ().cross(rt.transpose() * rs * Vec3::UnitZ());
    CHECK((lhs - rhs).norm() < 1e-12);
    const Vec2 a = common_line_direction(rs, rt, s, t);
    CHECK((a - project(lhs) / (t - s)).norm() < 1e-12);
    // Invariance under a common rotation of both frames.
    const Mat3 g = random_rotation(rng);
    CHECK((common_line_direction(g * rs, g * rt, s, t) - a).norm() < 1e-12);
  }
}

TEST_CASE("expansion coefficients follow from derivatives of R") {
  std::mt19937_64 rng(11);
  for (int draw = 0; draw < 10; ++draw) {
    CylindricalFunctions f;
    f.alpha = TimeFunction::polynomial({uniform(rng, 0.5, 1.5), uniform(rng, -1, 1), uniform(rng, -1, 1)});
    f.phi = TimeFunction::polynomial({uniform(rng, 0, 6), uniform(rng, -3, 3), uniform(rng, -1, 1)});
    f.phi.add_sin(0.3, 2.0, 0.1);
    f.omega3 = TimeFunction::polynomial({uniform(rng, -2, 2), uniform(rng, -1, 1)});
    f.omega3.add_cos(0.2, 3.0);
    const auto params = AngularParams::from_functions(f, {0.2, 0.21});
    const CylindricalJet jet = params.jet(0);
    const CommonLineExpansion ex = taylor_coefficients(jet);
    const auto [w, w1, w2] = omega_jet(jet);
    const Mat3 W = cross_matrix(w);
    const Mat3 W1 = cross_matrix(w1);
    const Mat3 W2 = cross_matrix(w2);
    // R^(n) = R Q_n with Q_1 = W and Q_(n+1) = W Q_n + Q_n'.
    const Mat3 q1 = W;
    const Mat3 q2 = W * W + W1;
    const Mat3 q3 = W * W * W + 2 * W * W1 + W1 * W + W2;
    const Vec3 e3 = Vec3::UnitZ();
    const auto a_exact = [&](const Mat3& q, double fact) {
      return Vec2(project(e3.cross(q * e3)) / fact);
    };
    const auto b_exact = [&](const Mat3& q, double fact) {
      return Vec2(-project(e3.cross(q.transpose() * e3)) / fact);
    };
    CHECK((ex.a[0] - a_exact(q1, 1)).norm() < 1e-12);
    CHECK((ex.a[1] - a_exact(q2, 2)).norm() < 1e-12);
    CHECK((ex.a[2] - a_exact(q3, 6)).norm() < 1e-11);
    CHECK((ex.b[0] - b_exact(q1, 1)).norm() < 1e-12);
    CHECK((ex.b[1] - b_exact(q2, 2)).norm() < 1e-12);
    CHECK((ex.b[2] - b_exact(q3, 6)).norm() < 1e-11);
  }
}

TEST_CASE("reflection by Sigma is an involution on SO(3)") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const Mat3 r = random_rotation(rng);
    const Mat3 rr = reflect_rotation(r);
    CHECK(orthogonality_error(rr) < 1e-14);
    CHECK(determinant_error(rr) < 1e-14);
    CHECK((reflect_rotation(rr) - r).norm() < 1e-15);
  }
}

TEST_CASE("nearest rotation recovers a perturbed rotation") {
  std::mt19937_64 rng(5);
  const Mat3 r = random_rotation(rng);
  Mat3 noisy = r;
  noisy(0, 1) += 1e-6;
  const Mat3 fixed = nearest_rotation(noisy);
  CHECK(orthogonality_error(fixed) < 1e-14);
  CHECK((fixed - r).norm() < 1e-6);
}

TEST_CASE("cross matrix realizes the cross product") {
  const Vec3 a(0.3, -1.2, 2.0);
  const Vec3 b(-0.7, 0.4, 1.1);
  CHECK((cross_matrix(a) * b - a.cross(b)).norm() < 1e-15);
}

TEST_CASE("angular parameters reject a negative radius") {
  CylindricalFunctions f{TimeFunction::constant(-0.1), TimeFunction::constant(0.0),
                         TimeFunction::constant(0.0)};
  CHECK_THROWS_AS(AngularParams::from_functions(f, {0.0, 0.1}), InvalidArgument);
}

TEST_CASE("sampled parameters give second-order derivative estimates") {
  const CylindricalFunctions f = reference_angular();
  const auto times = grid(50, 1e-3);
  std::vector<double> a, p, w;
  for (double t : times) {
    a.push_back(f.alpha(t));
    p.push_back(f.phi(t));
    w.push_back(f.omega3(t));
  }
  const auto sampled = AngularParams::from_samples(times, a, p, w);
  const CylindricalJet jet = sampled.jet(25);
  const double t = times[25];
  CHECK(jet.alpha[1] == doctest::Approx(f.alpha.derivative(t, 1)).epsilon(1e-5));
  CHECK(jet.phi[1] == doctest::Approx(f.phi.derivative(t, 1)).epsilon(1e-9));
  CHECK(jet.omega3[1] == doctest::Approx(f.omega3.derivative(t, 1)).epsilon(1e-4));
}
