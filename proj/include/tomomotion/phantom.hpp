#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "tomomotion/types.hpp"

namespace tomomotion {

/// Admissible attenuation coefficient u >= 0, evaluated pointwise.
class Phantom {
 public:
  virtual ~Phantom() = default;

  virtual double operator()(const Vec3& x) const = 0;

  /// Ball outside of which u stays below 1e-14 of its peak.
  virtual Vec3 support_center() const = 0;
  virtual double support_radius() const = 0;

  /// Sum of u(origin + (m + 1/2) step direction) over m in [first, first + count).
  virtual double line_sum(const Vec3& origin, const Vec3& direction, long first, long count,
                          double step) const;
};

/// u(x) = prod_i |x - P_i|^2 exp(-|D x|^2 / 4) with D diagonal.
class PointProductPhantom final : public Phantom {
 public:
  PointProductPhantom(std::vector<Vec3> points, Vec3 diagonal);

  double operator()(const Vec3& x) const override;
  Vec3 support_center() const override { return Vec3::Zero(); }
  double support_radius() const override { return radius_; }
  double line_sum(const Vec3& origin, const Vec3& direction, long first, long count,
                  double step) const override;

  const std::vector<Vec3>& points() const { return points_; }
  const Vec3& diagonal() const { return diagonal_; }

 private:
  std::vector<Vec3> points_;
  Vec3 diagonal_;
  double radius_ = 0.0;
};

/// The three-point phantom used throughout the reference experiment:
/// P1 = (1, 1/2, -1), P2 = (-1/2, 1, 1), P3 = (0, -1, 1/2), D = diag(sqrt 2, 1, 1).
PointProductPhantom reference_phantom();

/// Value of reference_phantom() at x.
double eval_phantom(const Vec3& x);

/// u(x) = amplitude exp(-(x - c)^T Q (x - c) / 2) with Q symmetric positive definite.
/// Its center of mass is c and its Fourier transform is known in closed form.
class GaussianPhantom final : public Phantom {
 public:
  GaussianPhantom(Vec3 center, Mat3 precision, double amplitude = 1.0);

  double operator()(const Vec3& x) const override;
  Vec3 support_center() const override { return center_; }
  double support_radius() const override { return radius_; }

  const Vec3& center() const { return center_; }
  const Mat3& precision() const { return precision_; }
  double amplitude() const { return amplitude_; }
  double mass() const;

  /// F3[u](xi) = (2 pi)^{-3/2} int u(x) exp(-i <xi, x>) dx.
  Complex fourier(const Vec3& xi) const;

 private:
  Vec3 center_;
  Mat3 precision_;
  Mat3 covariance_;
  double amplitude_;
  double radius_ = 0.0;
};

/// u(Sigma x) with Sigma = diag(1, 1, -1): the reflection of another phantom
/// in the x1x2-plane through the origin.
class ReflectedPhantom final : public Phantom {
 public:
  explicit ReflectedPhantom(std::shared_ptr<const Phantom> inner) : inner_(std::move(inner)) {}

  double operator()(const Vec3& x) const override;
  Vec3 support_center() const override;
  double support_radius() const override { return inner_->support_radius(); }

 private:
  std::shared_ptr<const Phantom> inner_;
};

/// Attenuation coefficient sampled on a regular grid; index (i1, i2, i3) sits at
/// origin + spacing * (i1, i2, i3) and is stored at (i3 * n2 + i2) * n1 + i1.
class VolumeGrid {
 public:
  VolumeGrid(std::array<std::size_t, 3> dims, double spacing, Vec3 origin,
             std::vector<double> values);

  static VolumeGrid sample(const Phantom& phantom, std::array<std::size_t, 3> dims,
                           double spacing, Vec3 origin);
  /// Grid of n^3 points centered on the origin (coordinates (j - n/2) * spacing).
  static VolumeGrid sample_centered(const Phantom& phantom, std::size_t n, double spacing);

  const std::array<std::size_t, 3>& dims() const { return dims_; }
  double spacing() const { return spacing_; }
  const Vec3& origin() const { return origin_; }
  const std::vector<double>& values() const { return values_; }
  const Vec3& c3() const { return c3_; }

  std::size_t index(std::size_t i1, std::size_t i2, std::size_t i3) const {
    return (i3 * dims_[1] + i2) * dims_[0] + i1;
  }
  Vec3 coordinate(std::size_t i1, std::size_t i2, std::size_t i3) const {
    return origin_ + spacing_ * Vec3(static_cast<double>(i1), static_cast<double>(i2),
                                     static_cast<double>(i3));
  }

  /// Midpoint-rule integral of u.
  double mass() const;

 private:
  std::array<std::size_t, 3> dims_;
  double spacing_;
  Vec3 origin_;
  std::vector<double> values_;
  Vec3 c3_;
};

/// Trilinear interpolation of a VolumeGrid, zero outside the grid.
class VolumePhantom final : public Phantom {
 public:
  explicit VolumePhantom(std::shared_ptr<const VolumeGrid> grid);

  double operator()(const Vec3& x) const override;
  Vec3 support_center() const override { return center_; }
  double support_radius() const override { return radius_; }

 private:
  std::shared_ptr<const VolumeGrid> grid_;
  Vec3 center_;
  double radius_;
};

/// Mass-weighted mean of the grid coordinates. Throws InvalidArgument for zero mass.
Vec3 center3(const VolumeGrid& grid);

/// Values re-indexed with x3 -> -x3 about the plane x3 = 0. Mass is preserved up to rounding.
VolumeGrid reflect_volume(const VolumeGrid& grid);

struct PhantomMoments {
  double mass = 0.0;
  Vec3 center = Vec3::Zero();
};

/// Mass and center of a phantom by midpoint quadrature on a cube covering its support.
PhantomMoments phantom_moments(const Phantom& phantom, double spacing);

}  // namespace tomomotion
