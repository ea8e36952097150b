#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace tomomotion {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Base class of all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by the caller (bad index, non-orthogonal matrix, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The forward model could not produce a faithful projection.
class RenderError : public Error {
 public:
  using Error::Error;
};

/// A reconstruction step could not produce an estimate for a frame.
class EstimationError : public Error {
 public:
  enum class Reason {
    zero_mass,
    insufficient_margin,
    no_first_order_signal,
    phi_degenerate,
    alpha_degenerate,
    alpha_inconsistent,
    alpha_below_floor,
    insufficient_frames,
  };

  EstimationError(Reason reason, const std::string& what) : Error(what), reason_(reason) {}

  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

/// Malformed configuration or artifact; `field` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// e3 x w, projected onto the x1x2-plane.
inline Vec2 e3_cross_projected(const Vec3& w) { return Vec2(-w.y(), w.x()); }

inline Vec3 lift(const Vec2& k) { return Vec3(k.x(), k.y(), 0.0); }

inline Vec2 project(const Vec3& x) { return Vec2(x.x(), x.y()); }

}  // namespace tomomotion
