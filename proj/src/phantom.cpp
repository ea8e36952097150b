#include "tomomotion/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

namespace tomomotion {

namespace {

constexpr double kSupportTolerance = 1e-14;

}  // namespace

double Phantom::line_sum(const Vec3& origin, const Vec3& direction, long first, long count,
                         double step) const {
  double sum = 0.0;
  for (long m = first; m < first + count; ++m) {
    sum += (*this)(origin + ((m + 0.5) * step) * direction);
  }
  return sum;
}

PointProductPhantom::PointProductPhantom(std::vector<Vec3> points, Vec3 diagonal)
    : points_(std::move(points)), diagonal_(std::move(diagonal)) {
  const double dmin = diagonal_.cwiseAbs().minCoeff();
  if (!(dmin > 0.0)) throw InvalidArgument("PointProductPhantom: diagonal must be nonzero");

  // Lower bound of the peak from a coarse scan around the origin.
  double peak = 0.0;
  const double reach = 3.0 / dmin;
  for (double x = -reach; x <= reach; x += 0.25) {
    for (double y = -reach; y <= reach; y += 0.25) {
      for (double z = -reach; z <= reach; z += 0.25) {
        peak = std::max(peak, (*this)(Vec3(x, y, z)));
      }
    }
  }
  if (!(peak > 0.0)) throw InvalidArgument("PointProductPhantom: phantom vanishes identically");

  // u(x) <= prod (|x| + |P_i|)^2 exp(-dmin^2 |x|^2 / 4); march until the bound
  // has peaked and fallen below the tolerance.
  auto bound = [&](double r) {
    double log_b = -dmin * dmin * r * r / 4.0;
    for (const auto& p : points_) log_b += 2.0 * std::log(r + p.norm() + 1e-300);
    return log_b;
  };
  const double log_target = std::log(kSupportTolerance * peak);
  double r = 0.0;
  double prev = bound(0.0);
  bool decreasing = false;
  while (true) {
    r += 0.01;
    const double b = bound(r);
    if (b < prev) decreasing = true;
    if (decreasing && b < log_target) break;
    prev = b;
  }
  radius_ = r;
}

double PointProductPhantom::operator()(const Vec3& x) const {
  double value = 1.0;
  for (const auto& p : points_) value *= (x - p).squaredNorm();
  return value * std::exp(-0.25 * diagonal_.cwiseProduct(x).squaredNorm());
}

double PointProductPhantom::line_sum(const Vec3& origin, const Vec3& direction, long first,
                                     long count, double step) const {
  // Along the line every factor is a quadratic in s; the Gaussian factor is
  // advanced by a multiplicative recurrence, re-anchored periodically.
  constexpr long kAnchor = 32;
  const std::size_t np = points_.size();
  std::vector<double> c0(np), c1(np);
  const double c2 = direction.squaredNorm();
  for (std::size_t i = 0; i < np; ++i) {
    const Vec3 d = origin - points_[i];
    c0[i] = d.squaredNorm();
    c1[i] = 2.0 * d.dot(direction);
  }
  const Vec3 dosq = diagonal_.cwiseProduct(origin);
  const Vec3 ddir = diagonal_.cwiseProduct(direction);
  const double q0 = -0.25 * dosq.squaredNorm();
  const double q1 = -0.5 * dosq.dot(ddir);
  const double q2 = -0.25 * ddir.squaredNorm();
  const double ratio_step = std::exp(2.0 * q2 * step * step);

  double sum = 0.0;
  double gauss = 0.0;
  double ratio = 0.0;
  for (long j = 0; j < count; ++j) {
    const double s = (first + j + 0.5) * step;
    if (j % kAnchor == 0) {
      gauss = std::exp(q0 + s * (q1 + s * q2));
      ratio = std::exp(q1 * step + q2 * step * (2.0 * s + step));
    }
    double value = gauss;
    for (std::size_t i = 0; i < np; ++i) value *= c0[i] + s * (c1[i] + s * c2);
    sum += value;
    gauss *= ratio;
    ratio *= ratio_step;
  }
  return sum;
}

PointProductPhantom reference_phantom() {
  return PointProductPhantom({Vec3(1.0, 0.5, -1.0), Vec3(-0.5, 1.0, 1.0), Vec3(0.0, -1.0, 0.5)},
                             Vec3(std::sqrt(2.0), 1.0, 1.0));
}

double eval_phantom(const Vec3& x) {
  static const PointProductPhantom phantom = reference_phantom();
  return phantom(x);
}

GaussianPhantom::GaussianPhantom(Vec3 center, Mat3 precision, double amplitude)
    : center_(std::move(center)), precision_(std::move(precision)), amplitude_(amplitude) {
  if (!(amplitude_ > 0.0)) throw InvalidArgument("GaussianPhantom: amplitude must be positive");
  Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (precision_ + precision_.transpose()));
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmin > 0.0)) throw InvalidArgument("GaussianPhantom: precision must be positive definite");
  covariance_ = precision_.inverse();
  radius_ = std::sqrt(-2.0 * std::log(kSupportTolerance) / lmin);
}

double GaussianPhantom::operator()(const Vec3& x) const {
  const Vec3 d = x - center_;
  return amplitude_ * std::exp(-0.5 * d.dot(precision_ * d));
}

double GaussianPhantom::mass() const {
  return amplitude_ * std::pow(2.0 * kPi, 1.5) / std::sqrt(precision_.determinant());
}

Complex GaussianPhantom::fourier(const Vec3& xi) const {
  const double envelope =
      amplitude_ / std::sqrt(precision_.determinant()) * std::exp(-0.5 * xi.dot(covariance_ * xi));
  return envelope * std::polar(1.0, -xi.dot(center_));
}

double ReflectedPhantom::operator()(const Vec3& x) const {
  return (*inner_)(Vec3(x.x(), x.y(), -x.z()));
}

Vec3 ReflectedPhantom::support_center() const {
  const Vec3 c = inner_->support_center();
  return Vec3(c.x(), c.y(), -c.z());
}

VolumeGrid::VolumeGrid(std::array<std::size_t, 3> dims, double spacing, Vec3 origin,
                       std::vector<double> values)
    : dims_(dims), spacing_(spacing), origin_(std::move(origin)), values_(std::move(values)) {
  if (!(spacing_ > 0.0)) throw InvalidArgument("VolumeGrid: spacing must be positive");
  if (values_.size() != dims_[0] * dims_[1] * dims_[2]) {
    throw InvalidArgument("VolumeGrid: value count does not match dims");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0)) {
      throw InvalidArgument("VolumeGrid: negative attenuation at voxel " + std::to_string(i));
    }
  }
  c3_ = center3(*this);
}

VolumeGrid VolumeGrid::sample(const Phantom& phantom, std::array<std::size_t, 3> dims,
                              double spacing, Vec3 origin) {
  std::vector<double> values(dims[0] * dims[1] * dims[2]);
  for (std::size_t i3 = 0; i3 < dims[2]; ++i3) {
    for (std::size_t i2 = 0; i2 < dims[1]; ++i2) {
      for (std::size_t i1 = 0; i1 < dims[0]; ++i1) {
        const Vec3 x = origin + spacing * Vec3(static_cast<double>(i1), static_cast<double>(i2),
                                               static_cast<double>(i3));
        values[(i3 * dims[1] + i2) * dims[0] + i1] = phantom(x);
      }
    }
  }
  return VolumeGrid(dims, spacing, std::move(origin), std::move(values));
}

VolumeGrid VolumeGrid::sample_centered(const Phantom& phantom, std::size_t n, double spacing) {
  const double o = -static_cast<double>(n / 2) * spacing;
  return sample(phantom, {n, n, n}, spacing, Vec3(o, o, o));
}

double VolumeGrid::mass() const {
  double sum = 0.0;
  for (double v : values_) sum += v;
  return sum * spacing_ * spacing_ * spacing_;
}

VolumePhantom::VolumePhantom(std::shared_ptr<const VolumeGrid> grid) : grid_(std::move(grid)) {
  const auto& d = grid_->dims();
  const Vec3 extent = grid_->spacing() *
                      Vec3(static_cast<double>(d[0] - 1), static_cast<double>(d[1] - 1),
                           static_cast<double>(d[2] - 1));
  center_ = grid_->origin() + 0.5 * extent;
  radius_ = 0.5 * extent.norm() + grid_->spacing();
}

double VolumePhantom::operator()(const Vec3& x) const {
  const auto& d = grid_->dims();
  const Vec3 u = (x - grid_->origin()) / grid_->spacing();
  std::array<long, 3> base{};
  std::array<double, 3> frac{};
  for (int a = 0; a < 3; ++a) {
    const double f = std::floor(u[a]);
    base[a] = static_cast<long>(f);
    frac[a] = u[a] - f;
    if (base[a] < -1 || base[a] >= static_cast<long>(d[a])) return 0.0;
  }
  double value = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    double w = 1.0;
    std::array<long, 3> idx{};
    bool inside = true;
    for (int a = 0; a < 3; ++a) {
      const int bit = (corner >> a) & 1;
      idx[a] = base[a] + bit;
      w *= bit ? frac[a] : 1.0 - frac[a];
      if (idx[a] < 0 || idx[a] >= static_cast<long>(d[a])) inside = false;
    }
    if (inside && w != 0.0) {
      value += w * grid_->values()[grid_->index(idx[0], idx[1], idx[2])];
    }
  }
  return value;
}

Vec3 center3(const VolumeGrid& grid) {
  const auto& d = grid.dims();
  double mass = 0.0;
  Vec3 first = Vec3::Zero();
  for (std::size_t i3 = 0; i3 < d[2]; ++i3) {
    for (std::size_t i2 = 0; i2 < d[1]; ++i2) {
      for (std::size_t i1 = 0; i1 < d[0]; ++i1) {
        const double v = grid.values()[grid.index(i1, i2, i3)];
        if (v == 0.0) continue;
        mass += v;
        first += v * grid.coordinate(i1, i2, i3);
      }
    }
  }
  if (!(mass > 0.0)) throw InvalidArgument("center3: volume has zero mass");
  return first / mass;
}

VolumeGrid reflect_volume(const VolumeGrid& grid) {
  const auto& d = grid.dims();
  std::vector<double> values(grid.values().size());
  for (std::size_t i3 = 0; i3 < d[2]; ++i3) {
    for (std::size_t i2 = 0; i2 < d[1]; ++i2) {
      for (std::size_t i1 = 0; i1 < d[0]; ++i1) {
        values[grid.index(i1, i2, d[2] - 1 - i3)] = grid.values()[grid.index(i1, i2, i3)];
      }
    }
  }
  Vec3 origin = grid.origin();
  origin.z() = -(origin.z() + grid.spacing() * static_cast<double>(d[2] - 1));
  return VolumeGrid(d, grid.spacing(), origin, std::move(values));
}

PhantomMoments phantom_moments(const Phantom& phantom, double spacing) {
  if (!(spacing > 0.0)) throw InvalidArgument("phantom_moments: spacing must be positive");
  const Vec3 c = phantom.support_center();
  const long m = static_cast<long>(std::ceil(phantom.support_radius() / spacing));
  PhantomMoments out;
  Vec3 first = Vec3::Zero();
  double mass = 0.0;
  for (long k = -m; k < m; ++k) {
    for (long j = -m; j < m; ++j) {
      for (long i = -m; i < m; ++i) {
        const Vec3 x = c + spacing * Vec3(i + 0.5, j + 0.5, k + 0.5);
        const double v = phantom(x);
        mass += v;
        first += v * x;
      }
    }
  }
  if (!(mass > 0.0)) throw InvalidArgument("phantom_moments: phantom has zero mass");
  out.mass = mass * spacing * spacing * spacing;
  out.center = first / mass;
  return out;
}

}  // namespace tomomotion
