#include "tomomotion/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <fftw3.h>

namespace tomomotion {

namespace {

// FFTW planning is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr unsigned kAllMoments = (1u << kMomentCount) - 1;

unsigned order_mask(int order) {
  unsigned mask = 0;
  for (int p = 0; p <= order; ++p) mask |= 1u << moment_index(p, order - p);
  return mask;
}

// Coefficients c[p] of y1^p y2^(n-p) in prod_j <v_j, y>.
std::array<double, 4> contraction(std::span<const Vec2> dirs) {
  std::array<double, 4> c{1.0, 0.0, 0.0, 0.0};
  int n = 0;
  for (const Vec2& v : dirs) {
    std::array<double, 4> next{};
    for (int p = 0; p <= n; ++p) {
      next[p + 1] += c[p] * v.x();
      next[p] += c[p] * v.y();
    }
    c = next;
    ++n;
  }
  return c;
}

Complex contract(const MomentSet& m, std::span<const Vec2> dirs) {
  const int n = static_cast<int>(dirs.size());
  const auto c = contraction(dirs);
  Complex sum = 0.0;
  for (int p = 0; p <= n; ++p) sum += c[p] * m[moment_index(p, n - p)];
  static const Complex minus_i_pow[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  return minus_i_pow[n] * sum;
}

struct KernelTaps {
  std::array<std::size_t, 32> index{};
  std::array<double, 32> weight{};
};

// Windowed-sinc weights for the periodic grid of length `period` at position u.
void kernel_taps(double u, std::size_t period, int taps, double beta, KernelTaps& out) {
  const double base = std::floor(u);
  const double frac = u - base;
  const long first = static_cast<long>(base) - taps / 2 + 1;
  const double half = 0.5 * taps;
  const double sin_frac = std::sin(kPi * frac);
  const long n = static_cast<long>(period);
  for (int t = 0; t < taps; ++t) {
    const long m = first + t;
    const double d = u - static_cast<double>(m);
    double sinc = 1.0;
    if (d != 0.0) {
      // sin(pi d) = sin(pi frac) (-1)^(floor(u) - m)
      const long parity = static_cast<long>(base) - m;
      const double s = (parity % 2 == 0) ? sin_frac : -sin_frac;
      sinc = s / (kPi * d);
    }
    const double z = d / half;
    const double window = std::exp(beta * (std::sqrt(std::max(0.0, 1.0 - z * z)) - 1.0));
    out.weight[t] = sinc * window;
    out.index[t] = static_cast<std::size_t>(((m % n) + n) % n);
  }
}

}  // namespace

double fourier2_scale(double spacing) { return spacing * spacing / (2.0 * kPi); }

Complex fourier2(const Frame& frame, const FrameGeometry& geometry, const Vec2& k) {
  if (frame.size() != geometry.pixels()) throw InvalidArgument("fourier2: frame has wrong size");
  std::vector<Complex> e1(geometry.n1);
  for (std::size_t i1 = 0; i1 < geometry.n1; ++i1) {
    e1[i1] = std::polar(1.0, -k.x() * geometry.coordinate(i1, 0).x());
  }
  Complex sum = 0.0;
  for (std::size_t i2 = 0; i2 < geometry.n2; ++i2) {
    Complex row = 0.0;
    const double* f = frame.data() + i2 * geometry.n1;
    for (std::size_t i1 = 0; i1 < geometry.n1; ++i1) row += f[i1] * e1[i1];
    sum += row * std::polar(1.0, -k.y() * geometry.coordinate(0, i2).y());
  }
  return fourier2_scale(geometry.spacing) * sum;
}

std::size_t time_margin(int t_order) {
  switch (t_order) {
    case 0: return 0;
    case 1:
    case 2: return 1;
    case 3: return 2;
    default: throw InvalidArgument("time_margin: time order must be in 0..3");
  }
}

TimeStencil time_stencil(int t_order) {
  switch (t_order) {
    case 0: return {{0}, {1.0}};
    case 1: return {{-1, 1}, {-0.5, 0.5}};
    case 2: return {{-1, 0, 1}, {1.0, -2.0, 1.0}};
    case 3: return {{-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}};
    default: throw InvalidArgument("time_stencil: time order must be in 0..3");
  }
}

struct MomentSpectra::FrameSpectra {
  std::array<std::once_flag, kMomentCount> once;
  std::array<std::vector<Complex>, kMomentCount> grids;
};

MomentSpectra::MomentSpectra(std::shared_ptr<const ProjectionStack> stack, SpectralOptions options)
    : stack_(std::move(stack)), options_(options) {
  if (!stack_) throw InvalidArgument("MomentSpectra: null stack");
  const FrameGeometry& g = stack_->geometry;
  g.validate();
  if (options_.padding < 1) throw InvalidArgument("MomentSpectra: padding must be at least 1");
  if (options_.taps < 2 || options_.taps > 32 || options_.taps % 2 != 0) {
    throw InvalidArgument("MomentSpectra: taps must be even and in 2..32");
  }
  if (options_.cache_frames < 1) options_.cache_frames = 1;

  centers_.reserve(stack_->size());
  for (std::size_t l = 0; l < stack_->size(); ++l) {
    if (stack_->frames[l].size() != g.pixels()) {
      throw InvalidArgument("MomentSpectra: frame " + std::to_string(l) + " has wrong size");
    }
    const bool empty = !(stack_->mass(l) > 0.0);
    centers_.push_back(empty ? Vec2::Constant(std::numeric_limits<double>::quiet_NaN())
                             : center2(stack_->frames[l], g));
  }

  if (options_.mode == SpectralMode::grid) {
    big1_ = g.n1 * static_cast<std::size_t>(options_.padding);
    big2_ = g.n2 * static_cast<std::size_t>(options_.padding);
    reference_ = g.coordinate(g.n1 / 2, g.n2 / 2);
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto* buffer = fftw_alloc_complex(big1_ * big2_);
    plan_ = fftw_plan_dft_2d(static_cast<int>(big2_), static_cast<int>(big1_), buffer, buffer,
                             FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buffer);
    if (!plan_) throw Error("MomentSpectra: FFT planning failed");
  }
}

MomentSpectra::~MomentSpectra() {
  if (plan_) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  }
}

std::shared_ptr<MomentSpectra::FrameSpectra> MomentSpectra::frame_spectra(std::size_t frame) const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto it = cache_.find(frame);
  if (it != cache_.end()) {
    lru_.remove(frame);
    lru_.push_front(frame);
    return it->second;
  }
  auto fs = std::make_shared<FrameSpectra>();
  cache_.emplace(frame, fs);
  lru_.push_front(frame);
  while (lru_.size() > options_.cache_frames) {
    cache_.erase(lru_.back());
    lru_.pop_back();
  }
  return fs;
}

const std::vector<Complex>& MomentSpectra::grid_spectrum(FrameSpectra& fs, std::size_t frame,
                                                         std::size_t beta) const {
  std::call_once(fs.once[beta], [&] {
    const FrameGeometry& g = stack_->geometry;
    const Frame& f = stack_->frames[frame];
    const Vec2 c = centers_[frame];
    int p = 0;
    int q = 0;
    for (int n = 0, idx = 0; n <= 3; ++n) {
      for (int qq = 0; qq <= n; ++qq, ++idx) {
        if (static_cast<std::size_t>(idx) == beta) {
          p = n - qq;
          q = qq;
        }
      }
    }
    std::vector<Complex> grid(big1_ * big2_, Complex(0.0, 0.0));
    for (std::size_t i2 = 0; i2 < g.n2; ++i2) {
      const double y = g.coordinate(0, i2).y() - c.y();
      const double wy = std::pow(y, q);
      const std::size_t r2 = (i2 + big2_ - g.n2 / 2) % big2_;
      for (std::size_t i1 = 0; i1 < g.n1; ++i1) {
        const double x = g.coordinate(i1, 0).x() - c.x();
        const std::size_t r1 = (i1 + big1_ - g.n1 / 2) % big1_;
        grid[r2 * big1_ + r1] = f[i2 * g.n1 + i1] * std::pow(x, p) * wy;
      }
    }
    auto* data = reinterpret_cast<fftw_complex*>(grid.data());
    fftw_execute_dft(static_cast<fftw_plan>(plan_), data, data);
    fs.grids[beta] = std::move(grid);
  });
  return fs.grids[beta];
}

void MomentSpectra::direct_moments(std::size_t frame, const Vec2& k, unsigned mask,
                                   MomentSet& out) const {
  const FrameGeometry& g = stack_->geometry;
  const Frame& f = stack_->frames[frame];
  const Vec2 c = centers_[frame];
  int max_p = 0;
  for (int n = 0; n <= 3; ++n) {
    for (int q = 0; q <= n; ++q) {
      if (mask & (1u << moment_index(n - q, q))) max_p = std::max(max_p, n - q);
    }
  }
  std::vector<std::array<Complex, 4>> e1(g.n1);
  for (std::size_t i1 = 0; i1 < g.n1; ++i1) {
    const double x = g.coordinate(i1, 0).x() - c.x();
    const Complex e = std::polar(1.0, -k.x() * x);
    e1[i1] = {e, e * x, e * x * x, e * x * x * x};
  }
  MomentSet acc{};
  for (std::size_t i2 = 0; i2 < g.n2; ++i2) {
    std::array<Complex, 4> row{};
    const double* fr = f.data() + i2 * g.n1;
    for (std::size_t i1 = 0; i1 < g.n1; ++i1) {
      const double v = fr[i1];
      if (v == 0.0) continue;
      for (int p = 0; p <= max_p; ++p) row[p] += v * e1[i1][p];
    }
    const double y = g.coordinate(0, i2).y() - c.y();
    const Complex e = std::polar(1.0, -k.y() * y);
    const std::array<Complex, 4> e2 = {e, e * y, e * y * y, e * y * y * y};
    for (int n = 0; n <= 3; ++n) {
      for (int q = 0; q <= n; ++q) {
        const std::size_t idx = moment_index(n - q, q);
        if (mask & (1u << idx)) acc[idx] += row[n - q] * e2[q];
      }
    }
  }
  const double scale = fourier2_scale(g.spacing);
  for (std::size_t i = 0; i < kMomentCount; ++i) out[i] = scale * acc[i];
}

void MomentSpectra::moments(std::span<const std::size_t> frames, const Vec2& k, unsigned mask,
                            std::span<MomentSet> out) const {
  if (out.size() < frames.size()) throw InvalidArgument("MomentSpectra::moments: output too small");
  mask &= kAllMoments;
  for (std::size_t f : frames) {
    if (f >= size()) throw InvalidArgument("MomentSpectra: frame out of range");
    if (std::isnan(centers_[f].x())) {
      throw EstimationError(EstimationError::Reason::zero_mass,
                            "frame " + std::to_string(f) + " has zero mass");
    }
  }
  if (options_.mode == SpectralMode::direct) {
    for (std::size_t i = 0; i < frames.size(); ++i) {
      out[i] = MomentSet{};
      direct_moments(frames[i], k, mask, out[i]);
    }
    return;
  }

  const FrameGeometry& g = stack_->geometry;
  const double per_unit1 = static_cast<double>(big1_) * g.spacing / (2.0 * kPi);
  const double per_unit2 = static_cast<double>(big2_) * g.spacing / (2.0 * kPi);
  KernelTaps t1;
  KernelTaps t2;
  kernel_taps(k.x() * per_unit1, big1_, options_.taps, options_.window_beta, t1);
  kernel_taps(k.y() * per_unit2, big2_, options_.taps, options_.window_beta, t2);
  const int taps = options_.taps;
  const double scale = fourier2_scale(g.spacing);

  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::size_t frame = frames[i];
    auto fs = frame_spectra(frame);
    const Complex phase = scale * std::polar(1.0, k.dot(centers_[frame] - reference_));
    out[i] = MomentSet{};
    for (std::size_t beta = 0; beta < kMomentCount; ++beta) {
      if (!(mask & (1u << beta))) continue;
      const Complex* grid = grid_spectrum(*fs, frame, beta).data();
      Complex sum = 0.0;
      for (int a = 0; a < taps; ++a) {
        const Complex* row = grid + t2.index[a] * big1_;
        double re = 0.0;
        double im = 0.0;
        for (int b = 0; b < taps; ++b) {
          const Complex v = row[t1.index[b]];
          re += t1.weight[b] * v.real();
          im += t1.weight[b] * v.imag();
        }
        sum += t2.weight[a] * Complex(re, im);
      }
      out[i][beta] = phase * sum;
    }
  }
}

Complex MomentSpectra::reduced(std::size_t frame, const Vec2& k) const {
  MomentSet m;
  const std::size_t frames[1] = {frame};
  moments(frames, k, 1u, std::span<MomentSet>(&m, 1));
  return m[0];
}

Complex MomentSpectra::dk_tensor(std::size_t frame, const Vec2& k,
                                 std::span<const Vec2> directions) const {
  if (directions.size() > 3) throw InvalidArgument("dk_tensor: k order must be at most 3");
  MomentSet m;
  const std::size_t frames[1] = {frame};
  moments(frames, k, order_mask(static_cast<int>(directions.size())),
          std::span<MomentSet>(&m, 1));
  return contract(m, directions);
}

Complex MomentSpectra::evaluate(const DerivativeQuery& query) const {
  TensorSpec spec;
  spec.t_order = query.t_order;
  spec.k_order = query.k_order;
  spec.directions = query.directions;
  Complex out;
  evaluate(query.frame, query.k, std::span<const TensorSpec>(&spec, 1), std::span<Complex>(&out, 1));
  return out;
}

void MomentSpectra::evaluate(std::size_t frame, const Vec2& k, std::span<const TensorSpec> specs,
                             std::span<Complex> out) const {
  if (out.size() < specs.size()) throw InvalidArgument("MomentSpectra::evaluate: output too small");
  // Union of frame offsets and moment masks over all specs.
  std::array<unsigned, 5> masks{};
  std::size_t margin = 0;
  for (const auto& s : specs) {
    if (s.k_order < 0 || s.k_order > 3) throw InvalidArgument("evaluate: k order must be in 0..3");
    margin = std::max(margin, time_margin(s.t_order));
    for (int o : time_stencil(s.t_order).offsets) masks[o + 2] |= order_mask(s.k_order);
  }
  const std::size_t needed = margin > 0 ? std::max<std::size_t>(margin, 2) : 0;
  if (frame >= size() || frame < needed || frame + needed >= size()) {
    throw InvalidArgument("evaluate: frame " + std::to_string(frame) +
                          " lacks the margin for the requested time derivative");
  }

  std::array<MomentSet, 5> m{};
  for (int o = -2; o <= 2; ++o) {
    if (!masks[o + 2]) continue;
    const std::size_t frames[1] = {static_cast<std::size_t>(static_cast<long>(frame) + o)};
    moments(frames, k, masks[o + 2], std::span<MomentSet>(&m[o + 2], 1));
  }

  const double dt = stack_->dt;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    const auto stencil = time_stencil(s.t_order);
    const std::span<const Vec2> dirs(s.directions.data(), static_cast<std::size_t>(s.k_order));
    Complex value = 0.0;
    for (std::size_t j = 0; j < stencil.offsets.size(); ++j) {
      value += stencil.weights[j] * contract(m[stencil.offsets[j] + 2], dirs);
    }
    out[i] = value / std::pow(dt, s.t_order);
  }
}

Complex reduced_spectrum(const ProjectionStack& stack, std::span<const Vec2> centers,
                         const Vec2& k, std::size_t frame) {
  if (frame >= stack.size() || frame >= centers.size()) {
    throw InvalidArgument("reduced_spectrum: frame out of range");
  }
  if (!(stack.mass(frame) > 0.0)) {
    throw EstimationError(EstimationError::Reason::zero_mass,
                          "frame " + std::to_string(frame) + " has zero mass");
  }
  return std::polar(1.0, k.dot(centers[frame])) *
         fourier2(stack.frames[frame], stack.geometry, k);
}

}  // namespace tomomotion
