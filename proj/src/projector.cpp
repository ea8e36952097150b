#include "tomomotion/projector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tomomotion/parallel.hpp"

namespace tomomotion {

FrameGeometry FrameGeometry::centered(std::size_t n1, std::size_t n2, double spacing) {
  FrameGeometry g;
  g.n1 = n1;
  g.n2 = n2;
  g.spacing = spacing;
  g.origin2 = -spacing * Vec2(static_cast<double>(n1 / 2), static_cast<double>(n2 / 2));
  return g;
}

void FrameGeometry::validate() const {
  if (n1 == 0 || n2 == 0) throw InvalidArgument("FrameGeometry: empty frame");
  if (!(spacing > 0.0)) throw InvalidArgument("FrameGeometry: spacing must be positive");
}

double ProjectionStack::mass(std::size_t frame) const {
  double sum = 0.0;
  for (double v : frames.at(frame)) sum += v;
  return sum * geometry.spacing * geometry.spacing;
}

void ProjectionStack::validate() const {
  geometry.validate();
  if (!(dt > 0.0)) throw InvalidArgument("ProjectionStack: dt must be positive");
  for (std::size_t l = 0; l < frames.size(); ++l) {
    if (frames[l].size() != geometry.pixels()) {
      throw InvalidArgument("ProjectionStack: frame " + std::to_string(l) + " has wrong size");
    }
    for (double v : frames[l]) {
      if (!(v >= 0.0)) {
        throw InvalidArgument("ProjectionStack: negative value in frame " + std::to_string(l));
      }
    }
  }
}

MotionGroundTruth MotionGroundTruth::from_angular(AngularParams angular,
                                                  const std::function<Vec3(double)>& translation_fn,
                                                  const Mat3& r0, int substeps) {
  const std::vector<double> times = angular.times();
  RotationTrajectory rotation = integrate_rotation(angular, r0, times, substeps);
  std::vector<Vec3> translation;
  translation.reserve(times.size());
  for (double t : times) translation.push_back(translation_fn(t));
  return MotionGroundTruth{times, std::move(translation), std::move(rotation), std::move(angular)};
}

double MotionGroundTruth::consistency_error(int substeps) const {
  if (rotation.size() == 0) return 0.0;
  const RotationTrajectory fresh = integrate_rotation(angular, rotation[0], times, substeps);
  double err = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    err = std::max(err, (fresh[i] - rotation[i]).cwiseAbs().maxCoeff());
  }
  return err;
}

Vec3 affine_point(std::size_t frame, const Vec3& x, const MotionGroundTruth& motion,
                  const Vec3& c3) {
  if (frame >= motion.size() || frame >= motion.rotation.size() ||
      frame >= motion.translation.size()) {
    throw InvalidArgument("affine_point: frame out of range");
  }
  return c3 + motion.rotation[frame] * (x - c3 + motion.translation[frame]);
}

Frame render_projection(const Phantom& phantom, const Vec3& c3, const Mat3& r, const Vec3& t,
                        const FrameGeometry& geometry, const RenderOptions& options,
                        double phantom_mass) {
  geometry.validate();
  const double step = options.ray_step > 0.0 ? options.ray_step : geometry.spacing;

  // A(x) = b + R x with b = C3 + R(T - C3).
  const Vec3 b = c3 + r * (t - c3);
  const Vec3 col1 = r.col(0);
  const Vec3 col2 = r.col(1);
  const Vec3 dir = r.col(2);

  // Support ball in pre-motion coordinates: |x - q| <= rho.
  const Vec3 q = r.transpose() * (phantom.support_center() - b);
  const double rho = phantom.support_radius();

  long fixed_first = 0;
  long fixed_count = 0;
  if (options.ray_half_extent) {
    const long m = static_cast<long>(std::ceil(*options.ray_half_extent / step));
    fixed_first = -m;
    fixed_count = 2 * m;
  }

  Frame frame(geometry.pixels(), 0.0);
  for (std::size_t i2 = 0; i2 < geometry.n2; ++i2) {
    for (std::size_t i1 = 0; i1 < geometry.n1; ++i1) {
      const Vec2 x = geometry.coordinate(i1, i2);
      long first = fixed_first;
      long count = fixed_count;
      if (!options.ray_half_extent) {
        const double lateral = (x - Vec2(q.x(), q.y())).squaredNorm();
        if (lateral >= rho * rho) continue;
        const double half = std::sqrt(rho * rho - lateral);
        first = static_cast<long>(std::ceil((q.z() - half) / step - 0.5));
        const long last = static_cast<long>(std::floor((q.z() + half) / step - 0.5));
        count = last - first + 1;
        if (count <= 0) continue;
      }
      const Vec3 origin = b + x.x() * col1 + x.y() * col2;
      frame[i2 * geometry.n1 + i1] = step * phantom.line_sum(origin, dir, first, count, step);
    }
  }

  if (phantom_mass > 0.0) {
    double sum = 0.0;
    for (double v : frame) sum += v;
    const double deficit = (phantom_mass - sum * geometry.spacing * geometry.spacing) / phantom_mass;
    if (deficit > options.mass_tolerance) {
      throw RenderError("render_projection: frame misses a fraction " + std::to_string(deficit) +
                        " of the phantom mass; enlarge the ray extent or the detector");
    }
  }
  return frame;
}

ProjectionStack render_stack(const Phantom& phantom, const MotionGroundTruth& motion,
                             const FrameGeometry& geometry, const RenderOptions& options,
                             const std::optional<PhantomMoments>& given) {
  geometry.validate();
  if (motion.size() < 2) throw InvalidArgument("render_stack: need at least two frames");
  if (motion.translation.size() != motion.size() || motion.rotation.size() != motion.size()) {
    throw InvalidArgument("render_stack: motion series lengths differ");
  }
  const double step = options.ray_step > 0.0 ? options.ray_step : geometry.spacing;
  const PhantomMoments moments = given ? *given : phantom_moments(phantom, step);

  ProjectionStack stack;
  stack.geometry = geometry;
  stack.t0 = motion.times.front();
  stack.dt = motion.times[1] - motion.times[0];
  stack.frames.resize(motion.size());
  parallel_for(motion.size(), [&](std::size_t l) {
    stack.frames[l] = render_projection(phantom, moments.center, motion.rotation[l],
                                        motion.translation[l], geometry, options, moments.mass);
  });
  return stack;
}

Vec2 center2(const Frame& frame, const FrameGeometry& geometry) {
  if (frame.size() != geometry.pixels()) throw InvalidArgument("center2: frame has wrong size");
  double mass = 0.0;
  Vec2 first = Vec2::Zero();
  for (std::size_t i2 = 0; i2 < geometry.n2; ++i2) {
    for (std::size_t i1 = 0; i1 < geometry.n1; ++i1) {
      const double v = frame[i2 * geometry.n1 + i1];
      mass += v;
      first += v * geometry.coordinate(i1, i2);
    }
  }
  if (!(mass > 0.0)) throw InvalidArgument("center2: frame has zero mass");
  return first / mass;
}

}  // namespace tomomotion
