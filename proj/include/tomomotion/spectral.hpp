#pragma once

#include <array>
#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "tomomotion/projector.hpp"
#include "tomomotion/types.hpp"

namespace tomomotion {

/// Multi-indices beta = (p, q) with p + q <= 3, in the order
/// (0,0) (1,0) (0,1) (2,0) (1,1) (0,2) (3,0) (2,1) (1,2) (0,3).
inline constexpr std::size_t kMomentCount = 10;
constexpr std::size_t moment_index(int p, int q) {
  const int n = p + q;
  return static_cast<std::size_t>(n * (n + 1) / 2 + q);
}
using MomentSet = std::array<Complex, kMomentCount>;

/// Discrete continuum-convention scaling of the 2D transform: dx^2 / (2 pi).
double fourier2_scale(double spacing);

/// F2[J](k) = (dx^2 / 2 pi) sum_j J(x_j) exp(-i <k, x_j>), by direct summation.
Complex fourier2(const Frame& frame, const FrameGeometry& geometry, const Vec2& k);

enum class SpectralMode {
  /// Direct summation over all pixels for every query.
  direct,
  /// Zero-padded FFT per frame and moment, interpolated with a windowed sinc.
  grid,
};

struct SpectralOptions {
  SpectralMode mode = SpectralMode::grid;
  /// Padded transform size as a multiple of the frame size.
  int padding = 2;
  /// Interpolation kernel taps per axis (even).
  int taps = 16;
  /// Shape of the exp(beta (sqrt(1 - z^2) - 1)) window.
  double window_beta = 19.5;
  /// Frames whose grid spectra are kept in memory at once.
  std::size_t cache_frames = 8;
};

/// One contracted derivative d_k^i d_t^m J~ at a frame and frequency set by the caller.
struct TensorSpec {
  int t_order = 0;
  int k_order = 0;
  std::array<Vec2, 3> directions{};
};

struct DerivativeQuery {
  std::size_t frame = 0;
  Vec2 k = Vec2::Zero();
  int k_order = 0;
  std::array<Vec2, 3> directions{};
  int t_order = 0;
};

/// Frames needed on each side of a frame for a time derivative of `t_order`.
std::size_t time_margin(int t_order);

/// Second-order central stencil (offsets and weights before division by dt^m).
struct TimeStencil {
  std::vector<int> offsets;
  std::vector<double> weights;
};
TimeStencil time_stencil(int t_order);

/// Moment-weighted spectra of a projection stack,
///   M_beta(l, k) = (dx^2 / 2 pi) sum_j (x_j - C2(l))^beta J_l(x_j) exp(-i <k, x_j - C2(l)>),
/// from which the reduced map J~ = M_(0,0) and its k-derivatives
/// d^beta J~ = (-i)^|beta| M_beta follow.
///
/// Queries are thread-safe. In grid mode spectra are computed on first use.
/// Frames of zero mass get NaN centers; queries touching them throw
/// EstimationError(zero_mass).
class MomentSpectra {
 public:
  MomentSpectra(std::shared_ptr<const ProjectionStack> stack, SpectralOptions options = {});
  ~MomentSpectra();
  MomentSpectra(const MomentSpectra&) = delete;
  MomentSpectra& operator=(const MomentSpectra&) = delete;

  const ProjectionStack& stack() const { return *stack_; }
  const SpectralOptions& options() const { return options_; }
  std::size_t size() const { return stack_->size(); }
  const std::vector<Vec2>& centers() const { return centers_; }

  /// M_beta at `k` for every beta whose bit is set in `mask`, at each frame.
  void moments(std::span<const std::size_t> frames, const Vec2& k, unsigned mask,
               std::span<MomentSet> out) const;

  Complex reduced(std::size_t frame, const Vec2& k) const;

  /// d_k^i J~(frame, k) contracted with `directions` (i = directions.size() <= 3).
  Complex dk_tensor(std::size_t frame, const Vec2& k, std::span<const Vec2> directions) const;

  Complex evaluate(const DerivativeQuery& query) const;

  /// Several contracted derivatives sharing one frame and one frequency;
  /// interpolation weights and frame spectra are shared between them.
  void evaluate(std::size_t frame, const Vec2& k, std::span<const TensorSpec> specs,
                std::span<Complex> out) const;

 private:
  struct FrameSpectra;
  std::shared_ptr<FrameSpectra> frame_spectra(std::size_t frame) const;
  const std::vector<Complex>& grid_spectrum(FrameSpectra& fs, std::size_t frame,
                                            std::size_t beta) const;
  void direct_moments(std::size_t frame, const Vec2& k, unsigned mask, MomentSet& out) const;

  std::shared_ptr<const ProjectionStack> stack_;
  SpectralOptions options_;
  std::vector<Vec2> centers_;
  std::size_t big1_ = 0;
  std::size_t big2_ = 0;
  Vec2 reference_ = Vec2::Zero();
  void* plan_ = nullptr;

  mutable std::mutex cache_mutex_;
  mutable std::list<std::size_t> lru_;
  mutable std::unordered_map<std::size_t, std::shared_ptr<FrameSpectra>> cache_;
};

/// Convenience wrapper for a single reduced-map value by direct summation.
Complex reduced_spectrum(const ProjectionStack& stack, std::span<const Vec2> centers,
                         const Vec2& k, std::size_t frame);

}  // namespace tomomotion
