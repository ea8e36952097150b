#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "tomomotion/phantom.hpp"
#include "tomomotion/rigid_motion.hpp"
#include "tomomotion/types.hpp"

namespace tomomotion {

/// Detector geometry: pixel (i1, i2) sits at origin2 + spacing * (i1, i2) and
/// is stored at i2 * n1 + i1.
struct FrameGeometry {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double spacing = 0.0;
  Vec2 origin2 = Vec2::Zero();

  /// n1 x n2 pixels at (j - n/2) * spacing, j = 0..n-1.
  static FrameGeometry centered(std::size_t n1, std::size_t n2, double spacing);

  std::size_t pixels() const { return n1 * n2; }
  Vec2 coordinate(std::size_t i1, std::size_t i2) const {
    return origin2 + spacing * Vec2(static_cast<double>(i1), static_cast<double>(i2));
  }
  void validate() const;
};

using Frame = std::vector<double>;

struct ProjectionStack {
  FrameGeometry geometry;
  double dt = 0.0;
  double t0 = 0.0;
  std::vector<Frame> frames;

  std::size_t size() const { return frames.size(); }
  double time(std::size_t frame) const { return t0 + static_cast<double>(frame) * dt; }
  /// spacing^2 * sum of the frame.
  double mass(std::size_t frame) const;
  /// Throws InvalidArgument on shape mismatch or negative values.
  void validate() const;
};

/// Sampled rigid motion x -> C3 + R(t)(x - C3 + T(t)).
struct MotionGroundTruth {
  std::vector<double> times;
  std::vector<Vec3> translation;
  RotationTrajectory rotation;
  AngularParams angular;

  std::size_t size() const { return times.size(); }

  /// Rotation integrated from `angular` starting at r0; translation sampled from `translation_fn`.
  static MotionGroundTruth from_angular(AngularParams angular,
                                        const std::function<Vec3(double)>& translation_fn,
                                        const Mat3& r0 = Mat3::Identity(), int substeps = 4);

  /// Max entrywise deviation between `rotation` and a fresh integration of `angular`.
  double consistency_error(int substeps = 4) const;
};

/// C3 + R(t)(x - C3 + T(t)) at frame `frame`.
Vec3 affine_point(std::size_t frame, const Vec3& x, const MotionGroundTruth& motion,
                  const Vec3& c3);

struct RenderOptions {
  /// Quadrature step along x3; 0 selects the detector spacing.
  double ray_step = 0.0;
  /// Fixed x3 half-extent of every ray about x3 = 0. When unset, each ray is
  /// clipped to the transformed support ball of the phantom.
  std::optional<double> ray_half_extent;
  /// Largest tolerated relative mass deficit of a frame.
  double mass_tolerance = 1e-6;
};

/// J(x1, x2) = step * sum_m u(A(t, (x1, x2, (m + 1/2) step))), one frame.
/// Throws RenderError when the frame misses more than mass_tolerance of
/// `phantom_mass` (pass a nonpositive value to skip the check).
Frame render_projection(const Phantom& phantom, const Vec3& c3, const Mat3& r, const Vec3& t,
                        const FrameGeometry& geometry, const RenderOptions& options = {},
                        double phantom_mass = 0.0);

/// Every frame of `motion`, rendered in parallel. C3 and the reference mass
/// default to midpoint quadrature of the phantom at the ray step.
ProjectionStack render_stack(const Phantom& phantom, const MotionGroundTruth& motion,
                             const FrameGeometry& geometry, const RenderOptions& options = {},
                             const std::optional<PhantomMoments>& moments = std::nullopt);

/// Mass-weighted mean of the pixel coordinates. Throws InvalidArgument for zero mass.
Vec2 center2(const Frame& frame, const FrameGeometry& geometry);

}  // namespace tomomotion
