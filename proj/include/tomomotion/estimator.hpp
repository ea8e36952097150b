#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tomomotion/spectral.hpp"
#include "tomomotion/types.hpp"

namespace tomomotion {

struct EstimatorConfig {
  /// mu_j = j * mu_spacing for j = 1..mu_count; 0 selects n/2 and the pixel spacing.
  /// Negative j are covered by conjugate symmetry.
  std::size_t mu_count = 0;
  double mu_spacing = 0.0;
  /// Samples of phi on [0, pi).
  std::size_t phi_grid = 2048;
  /// Regularizer of the phi objective relative to (frame mass / 2 pi)^2.
  double epsilon = 1e-12;
  /// Largest accepted condition number of the equilibrated alpha normal equations.
  double degenerate_condition_threshold = 1e6;
  /// alpha below this is reported absent.
  double alpha_floor = 1e-3;
  /// Frames with |omega3 + sigma| < tol * max(|omega3|, |sigma|, 1) carry no alpha.
  double sigma_degeneracy_tolerance = 1e-3;
  /// The phi objective is considered uninformative when its maximum over the
  /// grid stays below this value.
  double phi_flat_floor = 1e-6;
  /// Local minima within this factor of the global one count as competing modes.
  double multimodal_ratio = 1.1;
  SpectralOptions spectral{};

  void validate() const;
};

struct Omega3Fit {
  double omega3 = 0.0;
  /// sqrt(sum |E - omega3 D|^2 / sum |E|^2), 0 when E vanishes.
  double residual = 0.0;
};

struct PhiEstimate {
  double phi = 0.0;
  double omega3 = 0.0;
  double objective = 0.0;
  double omega3_residual = 0.0;
  /// Local minima of the objective within multimodal_ratio of the global one.
  std::size_t modes = 1;
};

struct AlphaCoefficients {
  Complex a0;
  Complex a02;
  Complex a1;
};

struct AlphaEstimate {
  double alpha = 0.0;
  /// Unknowns of the normal equations: alpha^2 and alpha' / alpha.
  double x1 = 0.0;
  double x2 = 0.0;
  double x1_stderr = 0.0;
  double condition = 0.0;
  /// Set when the frame yields no alpha: alpha_degenerate (sigma = -omega3 or
  /// ill-conditioned), alpha_inconsistent (alpha^2 significantly negative) or
  /// alpha_below_floor. `alpha` is meaningful only when unset.
  std::optional<EstimationError::Reason> rejected;
};

/// Per-frame estimates of the reconstruction. Absent values are empty optionals.
struct MotionEstimate {
  std::vector<double> times;
  std::vector<Vec2> c2;
  std::optional<std::vector<Vec2>> translation_xy;
  std::vector<std::optional<double>> phi;
  std::vector<std::optional<double>> phi_unwrapped;
  std::vector<std::optional<double>> omega3;
  std::vector<std::optional<double>> alpha;
  std::vector<std::optional<double>> phi_objective;
  std::vector<std::optional<double>> omega3_residual;
  std::vector<std::optional<double>> alpha_condition;
  std::vector<std::vector<std::string>> flags;

  std::size_t size() const { return times.size(); }
};

/// Centers of every frame and, when C3 is known, P(C3) - c2. Frames of zero
/// mass get NaN entries.
struct TranslationEstimate {
  std::vector<Vec2> c2;
  std::optional<std::vector<Vec2>> translation_xy;
};
TranslationEstimate recover_translation(const ProjectionStack& stack,
                                        const std::optional<Vec3>& c3 = std::nullopt);

/// mu values used by the estimator for this stack.
std::vector<double> mu_grid(const ProjectionStack& stack, const EstimatorConfig& cfg);

/// E = d_t J~(mu v) and D = d_k J~(mu v)[[mu v_perp]] on the mu grid; the
/// first-order relation reads E = omega3 D.
struct FirstOrderSamples {
  std::vector<double> mu;
  std::vector<Complex> e;
  std::vector<Complex> d;
};
FirstOrderSamples first_order_relation(const MomentSpectra& spectra, std::size_t frame,
                                       double phi, const EstimatorConfig& cfg);

/// Least-squares omega3 of the first-order relation along direction phi.
/// Throws EstimationError(no_first_order_signal) when sum |D|^2 is below the epsilon level.
Omega3Fit omega3_given_phi(const MomentSpectra& spectra, std::size_t frame, double phi,
                           const EstimatorConfig& cfg);

/// Objective value at one phi (with its own least-squares omega3).
double phi_objective(const MomentSpectra& spectra, std::size_t frame, double phi,
                     const EstimatorConfig& cfg);

/// Grid search of the phi objective on [0, pi) with parabolic refinement.
/// Throws EstimationError(phi_degenerate) when no direction is informative.
PhiEstimate estimate_phi(const MomentSpectra& spectra, std::size_t frame,
                         const EstimatorConfig& cfg);

/// Coefficients of A0 + A02 alpha^2 + A1 mu alpha'/alpha = 0 at k = mu v(phi).
AlphaCoefficients alpha_coefficients(const MomentSpectra& spectra, std::size_t frame, double mu,
                                     double phi, double sigma, double omega3,
                                     double omega3_prime);

/// The coefficient A12 of the same expansion, which vanishes identically.
Complex a12_coefficient(const MomentSpectra& spectra, std::size_t frame, double mu, double phi,
                        double omega3);

/// alpha from the normal equations at `frame`, with sigma and omega3' taken
/// from finite differences of the (unwrapped) phi and omega3 series. Series
/// entries may be absent; throws EstimationError(insufficient_margin) when
/// fewer than three consecutive samples surround `frame`.
AlphaEstimate estimate_alpha(const MomentSpectra& spectra, std::size_t frame,
                             const std::vector<std::optional<double>>& phi_series,
                             const std::vector<std::optional<double>>& omega3_series,
                             const EstimatorConfig& cfg);

/// Same, with sigma and omega3' given.
AlphaEstimate estimate_alpha_at(const MomentSpectra& spectra, std::size_t frame, double phi,
                                double sigma, double omega3, double omega3_prime,
                                const EstimatorConfig& cfg);

/// Chooses the representative of phi mod pi closest to the previous value.
std::vector<std::optional<double>> unwrap_mod_pi(const std::vector<std::optional<double>>& phi);

/// Full pipeline: centers, phi and omega3 per frame, unwrapping, alpha.
MotionEstimate estimate_motion(std::shared_ptr<const ProjectionStack> stack,
                               const EstimatorConfig& cfg = {},
                               const std::optional<Vec3>& c3 = std::nullopt);

}  // namespace tomomotion
