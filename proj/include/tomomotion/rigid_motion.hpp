#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "tomomotion/time_function.hpp"
#include "tomomotion/types.hpp"

namespace tomomotion {

/// Closed-form description of the angular velocity in cylindrical form
/// omega = (alpha cos phi, alpha sin phi, omega3).
struct CylindricalFunctions {
  TimeFunction alpha;
  TimeFunction phi;
  TimeFunction omega3;
};

/// Derivatives of order 0..3 of alpha, phi and omega3 at one instant.
struct CylindricalJet {
  std::array<double, 4> alpha{};
  std::array<double, 4> phi{};
  std::array<double, 4> omega3{};
};

/// Sampled cylindrical angular-velocity parameters on a uniform time grid,
/// optionally backed by the closed-form functions they were sampled from.
///
/// phi is stored unwrapped. Derivatives come from the closed forms when
/// present, otherwise from second-order finite differences of the samples.
class AngularParams {
 public:
  static AngularParams from_functions(CylindricalFunctions functions, std::vector<double> times);
  static AngularParams from_samples(std::vector<double> times, std::vector<double> alpha,
                                    std::vector<double> phi, std::vector<double> omega3);

  std::size_t size() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& alpha() const { return alpha_; }
  const std::vector<double>& phi() const { return phi_; }
  const std::vector<double>& omega3() const { return omega3_; }
  double dt() const { return dt_; }
  const std::optional<CylindricalFunctions>& functions() const { return functions_; }

  /// Angular velocity at an arbitrary time. Between samples (no closed form)
  /// the parameters are interpolated with four-point Lagrange polynomials.
  Vec3 omega(double t) const;

  /// Derivatives at sample `index`.
  CylindricalJet jet(std::size_t index) const;

 private:
  AngularParams() = default;
  void validate() const;
  double interpolate(const std::vector<double>& samples, double t) const;

  std::vector<double> times_;
  std::vector<double> alpha_;
  std::vector<double> phi_;
  std::vector<double> omega3_;
  double dt_ = 0.0;
  std::optional<CylindricalFunctions> functions_;
};

/// Time-stamped rotations; every matrix is orthogonal with unit determinant
/// to 1e-10 (checked on construction).
class RotationTrajectory {
 public:
  static constexpr double kTolerance = 1e-10;

  RotationTrajectory() = default;
  RotationTrajectory(std::vector<double> times, std::vector<Mat3> matrices);

  std::size_t size() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Mat3>& matrices() const { return matrices_; }
  const Mat3& operator[](std::size_t i) const { return matrices_[i]; }

 private:
  std::vector<double> times_;
  std::vector<Mat3> matrices_;
};

/// Coefficients of the cubic expansions in (t - s) of the two common-line
/// directions around t = s.
struct CommonLineExpansion {
  std::array<Vec2, 4> a;
  std::array<Vec2, 4> b;

  Vec2 eval_a(double h) const;
  Vec2 eval_b(double h) const;
};

/// [w]x, the matrix with [w]x y = w x y.
Mat3 cross_matrix(const Vec3& w);

/// Nearest orthogonal matrix with determinant +1 (polar factor via SVD).
Mat3 nearest_rotation(const Mat3& m);

/// max |R^T R - I| entrywise and |det R - 1|.
double orthogonality_error(const Mat3& r);
double determinant_error(const Mat3& r);

Vec3 omega_from_cylindrical(const AngularParams& params, std::size_t index);

/// Solves R' = R [omega]x from R(times[0]) = r0 with the classical
/// fourth-order Runge-Kutta method, projecting back onto SO(3) after each
/// step. `substeps` steps are taken between consecutive output times.
RotationTrajectory integrate_rotation(const AngularParams& params, const Mat3& r0,
                                      const std::vector<double>& times, int substeps = 1);
RotationTrajectory integrate_rotation(const std::function<Vec3(double)>& omega, const Mat3& r0,
                                      const std::vector<double>& times, int substeps = 1);

/// (1 / (t - s)) P(e3 x (Rs^T Rt e3)).
Vec2 common_line_direction(const Mat3& rs, const Mat3& rt, double s, double t);

CommonLineExpansion taylor_coefficients(const CylindricalJet& jet);

/// Conjugation by Sigma = diag(1, 1, -1).
Mat3 reflect_rotation(const Mat3& r);
RotationTrajectory reflect_trajectory(const RotationTrajectory& trajectory);

}  // namespace tomomotion
