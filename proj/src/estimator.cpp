#include "tomomotion/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "tomomotion/finite_difference.hpp"
#include "tomomotion/parallel.hpp"

namespace tomomotion {

namespace {

using Reason = EstimationError::Reason;

// E = d_t J~(mu v) and D = d_k J~(mu v)[[mu v_perp]] for every mu.
void first_order_samples(const MomentSpectra& spectra, std::size_t frame, double phi,
                         const std::vector<double>& mus, std::vector<Complex>& e,
                         std::vector<Complex>& d) {
  const Vec2 v(std::cos(phi), std::sin(phi));
  const Vec2 vp(-v.y(), v.x());
  e.resize(mus.size());
  d.resize(mus.size());
  std::array<TensorSpec, 2> specs{};
  specs[0].t_order = 1;
  specs[1].k_order = 1;
  std::array<Complex, 2> out{};
  for (std::size_t j = 0; j < mus.size(); ++j) {
    specs[1].directions[0] = mus[j] * vp;
    spectra.evaluate(frame, mus[j] * v, specs, out);
    e[j] = out[0];
    d[j] = out[1];
  }
}

struct FirstOrderFit {
  bool informative = false;
  double omega3 = 0.0;
  double residual = 0.0;
  double objective = 0.0;
};

FirstOrderFit fit_first_order(const std::vector<Complex>& e, const std::vector<Complex>& d,
                              double eps) {
  FirstOrderFit fit;
  double num = 0.0;
  double den = 0.0;
  double energy = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    num += (std::conj(d[j]) * e[j]).real();
    den += std::norm(d[j]);
    energy += std::norm(e[j]);
  }
  if (!(den > eps)) return fit;
  fit.informative = true;
  fit.omega3 = num / den;
  double rss = 0.0;
  double worst = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    const Complex model = fit.omega3 * d[j];
    const double r = std::norm(e[j] - model);
    rss += r;
    worst = std::max(worst, r / (std::norm(model) + eps));
  }
  fit.residual = energy > 0.0 ? std::sqrt(rss / energy) : 0.0;
  fit.objective = worst;
  return fit;
}

double epsilon_level(const MomentSpectra& spectra, std::size_t frame, const EstimatorConfig& cfg) {
  const double scale = spectra.stack().mass(frame) / (2.0 * kPi);
  return cfg.epsilon * scale * scale;
}

void check_margin(const MomentSpectra& spectra, std::size_t frame) {
  if (frame < 2 || frame + 2 >= spectra.size()) {
    throw EstimationError(Reason::insufficient_margin,
                          "frame " + std::to_string(frame) + " lies within the edge margin");
  }
}

double wrap_pi(double phi) {
  double r = std::fmod(phi, kPi);
  if (r < 0.0) r += kPi;
  if (r >= kPi) r -= kPi;
  return r;
}

// Derivative of a series with absent entries at `index`, using the run of
// present samples around it.
std::optional<double> series_derivative(const std::vector<std::optional<double>>& series,
                                        double step, std::size_t index) {
  if (index >= series.size() || !series[index]) return std::nullopt;
  std::size_t lo = index;
  std::size_t hi = index;
  while (lo > 0 && series[lo - 1]) --lo;
  while (hi + 1 < series.size() && series[hi + 1]) ++hi;
  if (hi - lo + 1 < 3) return std::nullopt;
  std::vector<double> run;
  run.reserve(hi - lo + 1);
  for (std::size_t i = lo; i <= hi; ++i) run.push_back(*series[i]);
  return fd::derivative(run, step, index - lo, 1);
}

}  // namespace

void EstimatorConfig::validate() const {
  if (phi_grid < 3) throw ConfigError("phi_grid", "must be at least 3");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon", "must be positive");
  if (!(degenerate_condition_threshold > 0.0)) {
    throw ConfigError("degenerate_condition_threshold", "must be positive");
  }
  if (!(alpha_floor > 0.0)) throw ConfigError("alpha_floor", "must be positive");
  if (mu_spacing < 0.0) throw ConfigError("mu_spacing", "must be positive");
  if (!(sigma_degeneracy_tolerance > 0.0)) {
    throw ConfigError("sigma_degeneracy_tolerance", "must be positive");
  }
  if (!(phi_flat_floor > 0.0)) throw ConfigError("phi_flat_floor", "must be positive");
  if (!(multimodal_ratio >= 1.0)) throw ConfigError("multimodal_ratio", "must be at least 1");
}

TranslationEstimate recover_translation(const ProjectionStack& stack,
                                        const std::optional<Vec3>& c3) {
  TranslationEstimate out;
  out.c2.reserve(stack.size());
  for (std::size_t l = 0; l < stack.size(); ++l) {
    out.c2.push_back(stack.mass(l) > 0.0 ? center2(stack.frames[l], stack.geometry)
                                         : Vec2::Constant(std::numeric_limits<double>::quiet_NaN()));
  }
  if (c3) {
    std::vector<Vec2> t;
    t.reserve(out.c2.size());
    for (const Vec2& c : out.c2) t.push_back(project(*c3) - c);
    out.translation_xy = std::move(t);
  }
  return out;
}

std::vector<double> mu_grid(const ProjectionStack& stack, const EstimatorConfig& cfg) {
  const std::size_t count =
      cfg.mu_count > 0 ? cfg.mu_count : std::max(stack.geometry.n1, stack.geometry.n2) / 2;
  const double spacing = cfg.mu_spacing > 0.0 ? cfg.mu_spacing : stack.geometry.spacing;
  std::vector<double> mus(count);
  for (std::size_t j = 0; j < count; ++j) mus[j] = static_cast<double>(j + 1) * spacing;
  return mus;
}

FirstOrderSamples first_order_relation(const MomentSpectra& spectra, std::size_t frame,
                                       double phi, const EstimatorConfig& cfg) {
  check_margin(spectra, frame);
  FirstOrderSamples out;
  out.mu = mu_grid(spectra.stack(), cfg);
  first_order_samples(spectra, frame, phi, out.mu, out.e, out.d);
  return out;
}

Omega3Fit omega3_given_phi(const MomentSpectra& spectra, std::size_t frame, double phi,
                           const EstimatorConfig& cfg) {
  check_margin(spectra, frame);
  std::vector<Complex> e;
  std::vector<Complex> d;
  first_order_samples(spectra, frame, phi, mu_grid(spectra.stack(), cfg), e, d);
  const FirstOrderFit fit = fit_first_order(e, d, epsilon_level(spectra, frame, cfg));
  if (!fit.informative) {
    throw EstimationError(Reason::no_first_order_signal,
                          "direction carries no first-derivative signal");
  }
  return {fit.omega3, fit.residual};
}

double phi_objective(const MomentSpectra& spectra, std::size_t frame, double phi,
                     const EstimatorConfig& cfg) {
  check_margin(spectra, frame);
  std::vector<Complex> e;
  std::vector<Complex> d;
  first_order_samples(spectra, frame, phi, mu_grid(spectra.stack(), cfg), e, d);
  const FirstOrderFit fit = fit_first_order(e, d, epsilon_level(spectra, frame, cfg));
  return fit.informative ? fit.objective : std::numeric_limits<double>::infinity();
}

PhiEstimate estimate_phi(const MomentSpectra& spectra, std::size_t frame,
                         const EstimatorConfig& cfg) {
  check_margin(spectra, frame);
  const std::vector<double> mus = mu_grid(spectra.stack(), cfg);
  const double eps = epsilon_level(spectra, frame, cfg);
  const std::size_t n = cfg.phi_grid;
  const double h = kPi / static_cast<double>(n);

  std::vector<Complex> e;
  std::vector<Complex> d;
  std::vector<FirstOrderFit> fits(n);
  for (std::size_t i = 0; i < n; ++i) {
    first_order_samples(spectra, frame, static_cast<double>(i) * h, mus, e, d);
    fits[i] = fit_first_order(e, d, eps);
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> obj(n);
  double best = inf;
  double worst = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    obj[i] = fits[i].informative ? fits[i].objective : inf;
    if (obj[i] < best) {
      best = obj[i];
      arg = i;
    }
    if (fits[i].informative) worst = std::max(worst, obj[i]);
  }
  if (best == inf) {
    throw EstimationError(Reason::phi_degenerate, "no direction carries first-derivative signal");
  }
  if (worst < cfg.phi_flat_floor) {
    throw EstimationError(Reason::phi_degenerate,
                          "first-order relation holds in every direction; phi is undetermined");
  }

  PhiEstimate out;
  out.modes = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double prev = obj[(i + n - 1) % n];
    const double next = obj[(i + 1) % n];
    if (obj[i] <= prev && obj[i] <= next && obj[i] <= cfg.multimodal_ratio * best) ++out.modes;
  }
  out.modes = std::max<std::size_t>(out.modes, 1);

  out.phi = static_cast<double>(arg) * h;
  out.omega3 = fits[arg].omega3;
  out.objective = best;
  out.omega3_residual = fits[arg].residual;

  // Brent's method inside the bracket of the best grid point.
  const auto objective_at = [&](double phi) {
    first_order_samples(spectra, frame, phi, mus, e, d);
    const FirstOrderFit fit = fit_first_order(e, d, eps);
    return fit.informative ? fit.objective : inf;
  };
  const double centre = static_cast<double>(arg) * h;
  boost::uintmax_t iterations = 100;
  const auto [phi, value] = boost::math::tools::brent_find_minima(
      objective_at, centre - h, centre + h, std::numeric_limits<double>::digits / 2, iterations);
  if (std::isfinite(value) && value <= best) {
    first_order_samples(spectra, frame, phi, mus, e, d);
    const FirstOrderFit refined = fit_first_order(e, d, eps);
    out.phi = wrap_pi(phi);
    out.omega3 = refined.omega3;
    out.objective = refined.objective;
    out.omega3_residual = refined.residual;
  }
  return out;
}

AlphaCoefficients alpha_coefficients(const MomentSpectra& spectra, std::size_t frame, double mu,
                                     double phi, double sigma, double omega3,
                                     double omega3_prime) {
  const Vec2 v(std::cos(phi), std::sin(phi));
  const Vec2 vp(-v.y(), v.x());
  std::array<TensorSpec, 8> specs{};
  auto set = [&](std::size_t i, int t_order, std::initializer_list<Vec2> dirs) {
    specs[i].t_order = t_order;
    specs[i].k_order = static_cast<int>(dirs.size());
    std::size_t j = 0;
    for (const Vec2& w : dirs) specs[i].directions[j++] = w;
  };
  set(0, 0, {vp});          // d1[vp]
  set(1, 0, {v});           // d1[v]
  set(2, 0, {vp, vp});      // d2[vp, vp]
  set(3, 0, {vp, v});       // d2[vp, v]
  set(4, 0, {vp, vp, vp});  // d3[vp, vp, vp]
  set(5, 1, {vp, vp});      // dt d2[vp, vp]
  set(6, 2, {vp});          // dtt d1[vp]
  set(7, 1, {vp});          // dt d1[vp]
  std::array<Complex, 8> r{};
  spectra.evaluate(frame, mu * v, specs, r);

  const double w = omega3;
  const double s = sigma;
  const double wp = omega3_prime;
  AlphaCoefficients c;
  c.a0 = 0.25 * mu * (w + s) *
         (mu * mu * w * (w - s) * r[4] + 2.0 * mu * (w * s * r[3] - wp * r[2]) +
          2.0 * (w * w * r[0] + wp * r[1]) - mu * (3.0 * w - s) * r[5] + 2.0 * r[6]);
  c.a02 = 0.5 * mu * (w + s) * r[0];
  c.a1 = 0.5 * (w + s) * (mu * w * r[2] - w * r[1] - r[7]);
  return c;
}

Complex a12_coefficient(const MomentSpectra& spectra, std::size_t frame, double mu, double phi,
                        double omega3) {
  const Vec2 v(std::cos(phi), std::sin(phi));
  const Vec2 vp(-v.y(), v.x());
  std::array<TensorSpec, 3> specs{};
  specs[0].k_order = 3;
  specs[0].directions = {vp, v, v};
  specs[1].k_order = 2;
  specs[1].directions = {v, vp, Vec2::Zero()};
  specs[2].t_order = 1;
  specs[2].k_order = 2;
  specs[2].directions = {v, v, Vec2::Zero()};
  std::array<Complex, 3> r{};
  spectra.evaluate(frame, mu * v, specs, r);
  return -0.25 * mu * omega3 * r[0] - 0.5 * omega3 * r[1] + 0.25 * r[2];
}

AlphaEstimate estimate_alpha_at(const MomentSpectra& spectra, std::size_t frame, double phi,
                                double sigma, double omega3, double omega3_prime,
                                const EstimatorConfig& cfg) {
  check_margin(spectra, frame);
  AlphaEstimate out;
  if (std::abs(omega3 + sigma) <
      cfg.sigma_degeneracy_tolerance * std::max({std::abs(omega3), std::abs(sigma), 1.0})) {
    out.rejected = Reason::alpha_degenerate;
    out.condition = std::numeric_limits<double>::infinity();
    return out;
  }
  const std::vector<double> mus = mu_grid(spectra.stack(), cfg);
  std::vector<AlphaCoefficients> rows(mus.size());
  for (std::size_t j = 0; j < mus.size(); ++j) {
    rows[j] = alpha_coefficients(spectra, frame, mus[j], phi, sigma, omega3, omega3_prime);
  }

  // min sum_j |a02 X1 + mu a1 X2 + a0|^2 over real X1, X2.
  double n11 = 0.0, n12 = 0.0, n22 = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t j = 0; j < mus.size(); ++j) {
    const Complex a = rows[j].a02;
    const Complex b = mus[j] * rows[j].a1;
    const Complex c = -rows[j].a0;
    n11 += std::norm(a);
    n12 += (std::conj(a) * b).real();
    n22 += std::norm(b);
    b1 += (std::conj(a) * c).real();
    b2 += (std::conj(b) * c).real();
  }
  if (!(n11 > 0.0) || !(n22 > 0.0)) {
    out.rejected = Reason::alpha_degenerate;
    out.condition = std::numeric_limits<double>::infinity();
    return out;
  }
  // Condition number of the unit-diagonal (equilibrated) normal matrix.
  const double r12 = std::abs(n12) / std::sqrt(n11 * n22);
  out.condition = r12 < 1.0 ? (1.0 + r12) / (1.0 - r12) : std::numeric_limits<double>::infinity();
  const double det = n11 * n22 - n12 * n12;
  if (out.condition > cfg.degenerate_condition_threshold || !(det > 0.0)) {
    out.rejected = Reason::alpha_degenerate;
    return out;
  }
  out.x1 = (n22 * b1 - n12 * b2) / det;
  out.x2 = (n11 * b2 - n12 * b1) / det;

  double rss = 0.0;
  for (std::size_t j = 0; j < mus.size(); ++j) {
    rss += std::norm(rows[j].a02 * out.x1 + mus[j] * rows[j].a1 * out.x2 + rows[j].a0);
  }
  const double dof = std::max(1.0, 2.0 * static_cast<double>(mus.size()) - 2.0);
  out.x1_stderr = std::sqrt(rss / dof * n22 / det);

  if (out.x1 < -3.0 * out.x1_stderr) {
    out.rejected = Reason::alpha_inconsistent;
    return out;
  }
  out.alpha = std::sqrt(std::max(out.x1, 0.0));
  if (out.alpha < cfg.alpha_floor) out.rejected = Reason::alpha_below_floor;
  return out;
}

AlphaEstimate estimate_alpha(const MomentSpectra& spectra, std::size_t frame,
                             const std::vector<std::optional<double>>& phi_series,
                             const std::vector<std::optional<double>>& omega3_series,
                             const EstimatorConfig& cfg) {
  const double dt = spectra.stack().dt;
  const auto sigma = series_derivative(phi_series, dt, frame);
  const auto omega3_prime = series_derivative(omega3_series, dt, frame);
  if (!sigma || !omega3_prime || !omega3_series[frame]) {
    throw EstimationError(Reason::insufficient_margin,
                          "phi or omega3 series too short around frame " + std::to_string(frame));
  }
  return estimate_alpha_at(spectra, frame, *phi_series[frame], *sigma, *omega3_series[frame],
                           *omega3_prime, cfg);
}

std::vector<std::optional<double>> unwrap_mod_pi(const std::vector<std::optional<double>>& phi) {
  std::vector<std::optional<double>> out(phi.size());
  std::optional<double> prev;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (!phi[i]) continue;
    double value = *phi[i];
    if (prev) value += kPi * std::round((*prev - value) / kPi);
    out[i] = value;
    prev = value;
  }
  return out;
}

namespace {

const char* reason_flag(Reason r) {
  switch (r) {
    case Reason::zero_mass: return "zero_mass";
    case Reason::insufficient_margin: return "insufficient_margin";
    case Reason::no_first_order_signal: return "no_first_order_signal";
    case Reason::phi_degenerate: return "phi_degenerate";
    case Reason::alpha_degenerate: return "alpha_degenerate";
    case Reason::alpha_inconsistent: return "alpha_inconsistent";
    case Reason::alpha_below_floor: return "alpha_below_floor";
    case Reason::insufficient_frames: return "insufficient_frames";
  }
  return "unknown";
}

}  // namespace

MotionEstimate estimate_motion(std::shared_ptr<const ProjectionStack> stack,
                               const EstimatorConfig& cfg, const std::optional<Vec3>& c3) {
  cfg.validate();
  if (!stack) throw InvalidArgument("estimate_motion: null stack");
  stack->validate();
  const std::size_t n = stack->size();
  if (n < 7) {
    throw EstimationError(Reason::insufficient_frames,
                          "at least 7 frames are needed, got " + std::to_string(n));
  }

  SpectralOptions so = cfg.spectral;
  so.cache_frames = std::max(so.cache_frames, 6 * worker_count());
  const MomentSpectra spectra(stack, so);

  MotionEstimate est;
  est.times.resize(n);
  for (std::size_t l = 0; l < n; ++l) est.times[l] = stack->time(l);
  TranslationEstimate tr = recover_translation(*stack, c3);
  est.c2 = std::move(tr.c2);
  est.translation_xy = std::move(tr.translation_xy);
  est.phi.assign(n, std::nullopt);
  est.omega3.assign(n, std::nullopt);
  est.alpha.assign(n, std::nullopt);
  est.phi_objective.assign(n, std::nullopt);
  est.omega3_residual.assign(n, std::nullopt);
  est.alpha_condition.assign(n, std::nullopt);
  est.flags.assign(n, {});
  for (std::size_t l = 0; l < n; ++l) {
    if (l < 2 || l + 2 >= n) est.flags[l].push_back("edge");
  }

  parallel_for(n - 4, [&](std::size_t i) {
    const std::size_t l = i + 2;
    try {
      const PhiEstimate p = estimate_phi(spectra, l, cfg);
      est.phi[l] = p.phi;
      est.omega3[l] = p.omega3;
      est.phi_objective[l] = p.objective;
      est.omega3_residual[l] = p.omega3_residual;
      if (p.modes > 1) est.flags[l].push_back("phi_multimodal");
    } catch (const EstimationError& e) {
      est.flags[l].push_back(reason_flag(e.reason()));
    }
  });

  est.phi_unwrapped = unwrap_mod_pi(est.phi);

  parallel_for(n - 4, [&](std::size_t i) {
    const std::size_t l = i + 2;
    if (!est.phi[l]) return;
    try {
      const AlphaEstimate a = estimate_alpha(spectra, l, est.phi_unwrapped, est.omega3, cfg);
      if (std::isfinite(a.condition)) est.alpha_condition[l] = a.condition;
      if (a.rejected) {
        est.flags[l].push_back(reason_flag(*a.rejected));
      } else {
        est.alpha[l] = a.alpha;
      }
    } catch (const EstimationError& e) {
      est.flags[l].push_back(reason_flag(e.reason()));
    }
  });
  return est;
}

}  // namespace tomomotion
