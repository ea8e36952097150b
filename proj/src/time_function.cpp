#include "tomomotion/time_function.hpp"

#include <cmath>

#include "tomomotion/types.hpp"

namespace tomomotion {

TimeFunction TimeFunction::constant(double c) { return polynomial({c}); }

TimeFunction TimeFunction::polynomial(std::vector<double> coefficients) {
  TimeFunction f;
  f.poly_ = std::move(coefficients);
  return f;
}

TimeFunction& TimeFunction::add_polynomial(const std::vector<double>& coefficients) {
  if (poly_.size() < coefficients.size()) poly_.resize(coefficients.size(), 0.0);
  for (std::size_t i = 0; i < coefficients.size(); ++i) poly_[i] += coefficients[i];
  return *this;
}

TimeFunction& TimeFunction::add_sin(double amplitude, double frequency, double phase) {
  sins_.push_back({amplitude, frequency, phase});
  return *this;
}

TimeFunction& TimeFunction::add_cos(double amplitude, double frequency, double phase) {
  return add_sin(amplitude, frequency, phase + kPi / 2);
}

TimeFunction& TimeFunction::add_sqrt(double scale, double offset, double slope) {
  sqrts_.push_back({scale, offset, slope});
  return *this;
}

double TimeFunction::derivative(double t, int order) const {
  if (order < 0) throw InvalidArgument("TimeFunction::derivative: negative order");
  double value = 0.0;

  // Horner on the differentiated coefficients.
  const int degree = static_cast<int>(poly_.size()) - 1;
  for (int i = degree; i >= order; --i) {
    double c = poly_[i];
    for (int m = 0; m < order; ++m) c *= static_cast<double>(i - m);
    value = value * t + c;
  }

  for (const auto& s : sins_) {
    value += s.amplitude * std::pow(s.frequency, order) *
             std::sin(s.frequency * t + s.phase + order * kPi / 2);
  }

  for (const auto& q : sqrts_) {
    const double arg = q.offset + q.slope * t;
    if (arg <= 0.0) throw InvalidArgument("TimeFunction: sqrt term evaluated outside its domain");
    // d^n/dt^n sqrt(a + b t) = b^n (1/2)(1/2 - 1)...(1/2 - n + 1) (a + b t)^(1/2 - n)
    double falling = 1.0;
    for (int m = 0; m < order; ++m) falling *= 0.5 - m;
    value += q.scale * std::pow(q.slope, order) * falling * std::pow(arg, 0.5 - order);
  }
  return value;
}

}  // namespace tomomotion
