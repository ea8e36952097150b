#include "tomomotion/rigid_motion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "tomomotion/finite_difference.hpp"

namespace tomomotion {

namespace {

void check_uniform(const std::vector<double>& times) {
  if (times.empty()) throw InvalidArgument("AngularParams: empty time grid");
  if (times.size() == 1) return;
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) throw InvalidArgument("AngularParams: times must be strictly increasing");
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double step = times[i] - times[i - 1];
    if (!(step > 0.0) || std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
      throw InvalidArgument("AngularParams: times must be uniformly spaced");
    }
  }
}

}  // namespace

AngularParams AngularParams::from_functions(CylindricalFunctions functions,
                                            std::vector<double> times) {
  AngularParams p;
  p.times_ = std::move(times);
  check_uniform(p.times_);
  for (double t : p.times_) {
    p.alpha_.push_back(functions.alpha(t));
    p.phi_.push_back(functions.phi(t));
    p.omega3_.push_back(functions.omega3(t));
  }
  p.dt_ = p.times_.size() > 1 ? p.times_[1] - p.times_[0] : 0.0;
  p.functions_ = std::move(functions);
  p.validate();
  return p;
}

AngularParams AngularParams::from_samples(std::vector<double> times, std::vector<double> alpha,
                                          std::vector<double> phi, std::vector<double> omega3) {
  if (alpha.size() != times.size() || phi.size() != times.size() ||
      omega3.size() != times.size()) {
    throw InvalidArgument("AngularParams: sample series lengths differ");
  }
  AngularParams p;
  p.times_ = std::move(times);
  check_uniform(p.times_);
  p.alpha_ = std::move(alpha);
  p.phi_ = std::move(phi);
  p.omega3_ = std::move(omega3);
  p.dt_ = p.times_.size() > 1 ? p.times_[1] - p.times_[0] : 0.0;
  p.validate();
  return p;
}

void AngularParams::validate() const {
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    if (!(alpha_[i] >= 0.0)) {
      throw InvalidArgument("AngularParams: cylindrical radius negative at sample " +
                            std::to_string(i));
    }
  }
}

double AngularParams::interpolate(const std::vector<double>& samples, double t) const {
  const std::size_t n = samples.size();
  if (n == 1) return samples[0];
  const double u = (t - times_[0]) / dt_;
  if (n < 4) {
    const long i = std::clamp(static_cast<long>(std::floor(u)), 0L, static_cast<long>(n) - 2);
    const double f = u - i;
    return (1.0 - f) * samples[i] + f * samples[i + 1];
  }
  const long start =
      std::clamp(static_cast<long>(std::floor(u)) - 1, 0L, static_cast<long>(n) - 4);
  double value = 0.0;
  for (long j = 0; j < 4; ++j) {
    double w = 1.0;
    for (long m = 0; m < 4; ++m) {
      if (m != j) w *= (u - (start + m)) / static_cast<double>(j - m);
    }
    value += w * samples[start + j];
  }
  return value;
}

Vec3 AngularParams::omega(double t) const {
  double a = 0.0;
  double ph = 0.0;
  double w3 = 0.0;
  if (functions_) {
    a = functions_->alpha(t);
    ph = functions_->phi(t);
    w3 = functions_->omega3(t);
  } else {
    a = interpolate(alpha_, t);
    ph = interpolate(phi_, t);
    w3 = interpolate(omega3_, t);
  }
  return Vec3(a * std::cos(ph), a * std::sin(ph), w3);
}

CylindricalJet AngularParams::jet(std::size_t index) const {
  if (index >= size()) throw InvalidArgument("AngularParams::jet: index out of range");
  CylindricalJet jet;
  if (functions_) {
    const double t = times_[index];
    for (int m = 0; m < 4; ++m) {
      jet.alpha[m] = functions_->alpha.derivative(t, m);
      jet.phi[m] = functions_->phi.derivative(t, m);
      jet.omega3[m] = functions_->omega3.derivative(t, m);
    }
    return jet;
  }
  for (int m = 0; m < 4; ++m) {
    jet.alpha[m] = fd::derivative(alpha_, dt_, index, m);
    jet.phi[m] = fd::derivative(phi_, dt_, index, m);
    jet.omega3[m] = fd::derivative(omega3_, dt_, index, m);
  }
  return jet;
}

RotationTrajectory::RotationTrajectory(std::vector<double> times, std::vector<Mat3> matrices)
    : times_(std::move(times)), matrices_(std::move(matrices)) {
  if (times_.size() != matrices_.size()) {
    throw InvalidArgument("RotationTrajectory: times and matrices differ in length");
  }
  for (std::size_t i = 0; i < matrices_.size(); ++i) {
    if (orthogonality_error(matrices_[i]) > kTolerance ||
        determinant_error(matrices_[i]) > kTolerance) {
      throw InvalidArgument("RotationTrajectory: matrix " + std::to_string(i) +
                            " is not a rotation");
    }
  }
}

Vec2 CommonLineExpansion::eval_a(double h) const {
  return a[0] + h * (a[1] + h * (a[2] + h * a[3]));
}

Vec2 CommonLineExpansion::eval_b(double h) const {
  return b[0] + h * (b[1] + h * (b[2] + h * b[3]));
}

Mat3 cross_matrix(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) = -u.col(2);
  return u * v.transpose();
}

double orthogonality_error(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

double determinant_error(const Mat3& r) { return std::abs(r.determinant() - 1.0); }

Vec3 omega_from_cylindrical(const AngularParams& params, std::size_t index) {
  if (index >= params.size()) throw InvalidArgument("omega_from_cylindrical: index out of range");
  const double a = params.alpha()[index];
  const double ph = params.phi()[index];
  return Vec3(a * std::cos(ph), a * std::sin(ph), params.omega3()[index]);
}

RotationTrajectory integrate_rotation(const std::function<Vec3(double)>& omega, const Mat3& r0,
                                      const std::vector<double>& times, int substeps) {
  if (orthogonality_error(r0) > 1e-8 || determinant_error(r0) > 1e-8) {
    throw InvalidArgument("integrate_rotation: initial matrix is not a rotation");
  }
  if (substeps < 1) throw InvalidArgument("integrate_rotation: substeps must be positive");
  if (times.empty()) return {};

  auto rhs = [&](double t, const Mat3& r) -> Mat3 { return r * cross_matrix(omega(t)); };

  std::vector<Mat3> out;
  out.reserve(times.size());
  Mat3 r = nearest_rotation(r0);
  out.push_back(r);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double h = (times[i] - times[i - 1]) / substeps;
    double t = times[i - 1];
    for (int k = 0; k < substeps; ++k) {
      const Mat3 k1 = rhs(t, r);
      const Mat3 k2 = rhs(t + 0.5 * h, r + 0.5 * h * k1);
      const Mat3 k3 = rhs(t + 0.5 * h, r + 0.5 * h * k2);
      const Mat3 k4 = rhs(t + h, r + h * k3);
      r = nearest_rotation(r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
      t = times[i - 1] + (k + 1) * h;
    }
    out.push_back(r);
  }
  return RotationTrajectory(times, std::move(out));
}

RotationTrajectory integrate_rotation(const AngularParams& params, const Mat3& r0,
                                      const std::vector<double>& times, int substeps) {
  return integrate_rotation([&](double t) { return params.omega(t); }, r0, times, substeps);
}

Vec2 common_line_direction(const Mat3& rs, const Mat3& rt, double s, double t) {
  if (s == t) throw InvalidArgument("common_line_direction: s and t coincide");
  const Vec3 w = rs.transpose() * (rt * Vec3::UnitZ());
  return e3_cross_projected(w) / (t - s);
}

CommonLineExpansion taylor_coefficients(const CylindricalJet& jet) {
  // alpha v is handled as the complex number alpha e^{i phi}; alpha v_perp is i alpha e^{i phi}.
  const auto& p = jet.phi;
  const Complex i(0.0, 1.0);
  const Complex e = std::polar(1.0, p[0]);
  const std::array<Complex, 4> de = {
      e,
      i * p[1] * e,
      (i * p[2] - p[1] * p[1]) * e,
      (i * p[3] - 3.0 * p[1] * p[2] - i * p[1] * p[1] * p[1]) * e,
  };
  static constexpr double binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
  std::array<Complex, 4> av{};
  for (int n = 0; n < 4; ++n) {
    for (int k = 0; k <= n; ++k) av[n] += binom[n][k] * jet.alpha[n - k] * de[k];
  }
  std::array<Complex, 4> avp{};
  for (int n = 0; n < 4; ++n) avp[n] = i * av[n];

  const double a = jet.alpha[0];
  const double da = jet.alpha[1];
  const double w = jet.omega3[0];
  const double dw = jet.omega3[1];
  const double ddw = jet.omega3[2];
  const double norm2 = a * a + w * w;

  std::array<Complex, 4> ca = {
      av[0],
      (w * avp[0] + av[1]) / 2.0,
      (-norm2 * av[0] + 2.0 * w * avp[1] + dw * avp[0] + av[2]) / 6.0,
      (-norm2 * w * avp[0] + 2.0 * w * dw * av[0] - 2.0 * w * w * av[1] -
       5.0 * (a * da + w * dw) * av[0] + 3.0 * w * avp[2] - norm2 * av[1] + 3.0 * dw * avp[1] +
       ddw * avp[0] + av[3]) / 24.0,
  };
  std::array<Complex, 4> cb = {
      av[0],
      (-w * avp[0] + av[1]) / 2.0,
      (-norm2 * av[0] - w * avp[1] - 2.0 * dw * avp[0] + av[2]) / 6.0,
      (norm2 * w * avp[0] - 2.0 * w * dw * av[0] + 2.0 * w * w * av[1] -
       3.0 * (a * da + w * dw) * av[0] - w * avp[2] - 3.0 * norm2 * av[1] - 3.0 * dw * avp[1] -
       3.0 * ddw * avp[0] + av[3]) / 24.0,
  };

  CommonLineExpansion out;
  for (int j = 0; j < 4; ++j) {
    out.a[j] = Vec2(ca[j].real(), ca[j].imag());
    out.b[j] = Vec2(cb[j].real(), cb[j].imag());
  }
  return out;
}

Mat3 reflect_rotation(const Mat3& r) {
  Mat3 out = r;
  out(0, 2) = -out(0, 2);
  out(1, 2) = -out(1, 2);
  out(2, 0) = -out(2, 0);
  out(2, 1) = -out(2, 1);
  return out;
}

RotationTrajectory reflect_trajectory(const RotationTrajectory& trajectory) {
  std::vector<Mat3> out;
  out.reserve(trajectory.size());
  for (const auto& r : trajectory.matrices()) out.push_back(reflect_rotation(r));
  return RotationTrajectory(trajectory.times(), std::move(out));
}

}  // namespace tomomotion
