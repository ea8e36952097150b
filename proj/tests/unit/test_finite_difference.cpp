#include <doctest.h>

#include <cmath>
#include <vector>

#include "tomomotion/finite_difference.hpp"

using namespace tomomotion;

TEST_CASE("central stencils have the textbook weights") {
  const std::vector<int> three{-1, 0, 1};
  const auto d1 = fd::stencil_weights(three, 1);
  CHECK(d1[0] == doctest::Approx(-0.5));
  CHECK(d1[1] == doctest::Approx(0.0));
  CHECK(d1[2] == doctest::Approx(0.5));
  const auto d2 = fd::stencil_weights(three, 2);
  CHECK(d2[0] == doctest::Approx(1.0));
  CHECK(d2[1] == doctest::Approx(-2.0));
  CHECK(d2[2] == doctest::Approx(1.0));
  const std::vector<int> four{-2, -1, 1, 2};
  const auto d3 = fd::stencil_weights(four, 3);
  CHECK(d3[0] == doctest::Approx(-0.5));
  CHECK(d3[1] == doctest::Approx(1.0));
  CHECK(d3[2] == doctest::Approx(-1.0));
  CHECK(d3[3] == doctest::Approx(0.5));
}

TEST_CASE("second-order stencils are exact for quadratics everywhere and cubics in the interior") {
  const std::size_t n = 9;
  const double h = 0.1;
  std::vector<double> quad(n);
  std::vector<double> cube(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * h;
    quad[i] = 3.0 * t * t - t + 2.0;
    cube[i] = t * t * t;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * h;
    CHECK(fd::derivative(quad, h, i, 1) == doctest::Approx(6.0 * t - 1.0).epsilon(1e-10));
    CHECK(fd::derivative(quad, h, i, 2) == doctest::Approx(6.0).epsilon(1e-10));
  }
  // The five-point third derivative of t^3 is 6 exactly.
  CHECK(fd::derivative(cube, h, 4, 3) == doctest::Approx(6.0).epsilon(1e-10));
}

TEST_CASE("one-sided offsets near the ends stay inside the series") {
  for (int order = 1; order <= 3; ++order) {
    for (std::size_t i = 0; i < 8; ++i) {
      for (int o : fd::second_order_offsets(order, i, 8)) {
        const long j = static_cast<long>(i) + o;
        CHECK(j >= 0);
        CHECK(j < 8);
      }
    }
  }
}

TEST_CASE("second-order convergence on a smooth series") {
  double previous = 0.0;
  for (int level = 0; level < 3; ++level) {
    // Derivative of sin at t = 0.5, sampled on [0, 1].
    const std::size_t half = 10u << level;
    const double h = 0.5 / static_cast<double>(half);
    std::vector<double> s(2 * half + 1);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(static_cast<double>(i) * h);
    const double err = std::abs(fd::derivative(s, h, half, 1) - std::cos(0.5));
    if (level > 0) CHECK(previous / err == doctest::Approx(4.0).epsilon(0.05));
    previous = err;
  }
}
