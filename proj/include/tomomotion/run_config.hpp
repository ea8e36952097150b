#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tomomotion/estimator.hpp"
#include "tomomotion/phantom.hpp"
#include "tomomotion/projector.hpp"
#include "tomomotion/time_function.hpp"

namespace tomomotion {

struct PhantomSpec {
  enum class Kind { reference, gaussian, points };
  Kind kind = Kind::reference;
  // gaussian
  Vec3 center = Vec3::Zero();
  Mat3 precision = Mat3::Identity();
  double amplitude = 1.0;
  // points
  std::vector<Vec3> points;
  Vec3 diagonal = Vec3::Ones();
  /// Reflect the phantom in the x1x2-plane.
  bool reflected = false;

  std::shared_ptr<const Phantom> build() const;
};

struct MotionSpec {
  CylindricalFunctions angular{TimeFunction::constant(0.0), TimeFunction::constant(0.0),
                               TimeFunction::constant(0.0)};
  std::array<TimeFunction, 3> translation{TimeFunction::constant(0.0), TimeFunction::constant(0.0),
                                          TimeFunction::constant(0.0)};
  Mat3 r0 = Mat3::Identity();
};

struct GeometrySpec {
  std::size_t n1 = 256;
  std::size_t n2 = 256;
  double spacing = 0.1;
  std::size_t n_frames = 200;
  double dt = 5e-4;
  double t0 = 0.0;
  /// Ray quadrature step; 0 uses the pixel spacing.
  double ray_step = 0.0;
  std::optional<double> ray_half_extent;
  /// RK4 steps per frame interval for the rotation.
  int substeps = 4;

  FrameGeometry frame_geometry() const { return FrameGeometry::centered(n1, n2, spacing); }
  std::vector<double> times() const;
};

struct RunConfig {
  PhantomSpec phantom;
  MotionSpec motion;
  GeometrySpec geometry;
  EstimatorConfig estimator;
  std::uint64_t seed = 0;
};

/// The reference experiment at desk scale: three-point phantom, the reference
/// motion, 256 x 256 frames at spacing 0.1, 200 frames at dt = 5e-4.
RunConfig reference_config();

/// Motion presets: "paper_sec4", "static", "z_spin", "sigma_minus_omega3".
MotionSpec motion_preset(const std::string& name);

/// Parses a configuration document. Every malformed entry raises ConfigError
/// naming its dotted path (e.g. "geometry.dt").
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

/// Parses only an estimator section (same rules as inside a run config).
EstimatorConfig parse_estimator_config(const nlohmann::json& doc, const std::string& path);

/// Normalized document of a configuration (closures expanded to term lists).
nlohmann::json to_json(const RunConfig& cfg);

/// Closure spec: a number, or {"polynomial": [c0, c1, ...], "sin": [[A, w, c], ...],
/// "cos": [[A, w, c], ...], "sqrt": [[s, a, b], ...]} for
/// sum c_i t^i + sum A sin(w t + c) + sum A cos(w t + c) + sum s sqrt(a + b t).
TimeFunction parse_time_function(const nlohmann::json& doc, const std::string& path);
nlohmann::json to_json(const TimeFunction& f);

/// Ground-truth motion sampled on the configured time grid.
MotionGroundTruth build_motion(const RunConfig& cfg);

}  // namespace tomomotion
