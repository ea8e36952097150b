#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include <Eigen/Geometry>

#include "tomomotion/estimator.hpp"
#include "tomomotion/run_config.hpp"

namespace testing {

using namespace tomomotion;

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Reference phantom and motion on 128 x 128 frames at spacing 0.2.
inline RunConfig small_reference(std::size_t frames) {
  RunConfig cfg = reference_config();
  cfg.geometry.n1 = cfg.geometry.n2 = 128;
  cfg.geometry.spacing = 0.2;
  cfg.geometry.n_frames = frames;
  cfg.estimator.phi_grid = 512;
  return cfg;
}

struct Rendered {
  MotionGroundTruth motion;
  std::shared_ptr<const ProjectionStack> stack;
  Vec3 c3;
};

inline Rendered render(const RunConfig& cfg) {
  const auto phantom = cfg.phantom.build();
  MotionGroundTruth motion = build_motion(cfg);
  const PhantomMoments m = phantom_moments(*phantom, cfg.geometry.spacing);
  auto stack = std::make_shared<const ProjectionStack>(
      render_stack(*phantom, motion, cfg.geometry.frame_geometry(), {}, m));
  return {std::move(motion), std::move(stack), m.center};
}

/// Fresh empty directory under the system temp directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tomomotion_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
