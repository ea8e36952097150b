#pragma once

#include <vector>

namespace tomomotion {

/// Scalar function of time given as a sum of closed-form terms, with exact
/// derivatives of any order:
///
///   f(t) = sum_i p_i t^i + sum_j A_j sin(w_j t + c_j) + sum_k s_k sqrt(a_k + b_k t)
///
/// Cosines are sinusoids with phase pi/2. This covers every motion used by the
/// simulator (polynomial radii, linear angles, square-root heights, products
/// of trigonometric translations after expansion into sums).
class TimeFunction {
 public:
  struct Sinusoid {
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
  };
  struct SqrtTerm {
    double scale = 0.0;
    double offset = 0.0;
    double slope = 0.0;
  };

  TimeFunction() = default;

  static TimeFunction constant(double c);
  static TimeFunction polynomial(std::vector<double> coefficients);

  TimeFunction& add_polynomial(const std::vector<double>& coefficients);
  TimeFunction& add_sin(double amplitude, double frequency, double phase = 0.0);
  TimeFunction& add_cos(double amplitude, double frequency, double phase = 0.0);
  TimeFunction& add_sqrt(double scale, double offset, double slope);

  double operator()(double t) const { return derivative(t, 0); }

  /// d^order f / dt^order at t. Throws InvalidArgument when a square-root
  /// term is evaluated outside its domain.
  double derivative(double t, int order) const;

  const std::vector<double>& polynomial_coefficients() const { return poly_; }
  const std::vector<Sinusoid>& sinusoids() const { return sins_; }
  const std::vector<SqrtTerm>& sqrt_terms() const { return sqrts_; }

 private:
  std::vector<double> poly_;
  std::vector<Sinusoid> sins_;
  std::vector<SqrtTerm> sqrts_;
};

}  // namespace tomomotion
