#include "tomomotion/finite_difference.hpp"

#include <algorithm>

#include "tomomotion/types.hpp"

namespace tomomotion::fd {

std::vector<double> stencil_weights(std::span<const int> offsets, int order) {
  const int n = static_cast<int>(offsets.size());
  if (order < 0 || order >= n) {
    throw InvalidArgument("stencil_weights: need more points than the derivative order");
  }
  // c[i][m]: weight of point i for derivative m, expanded about 0.
  std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
  c[0][0] = 1.0;
  double c1 = 1.0;
  double c4 = offsets[0];
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = offsets[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = static_cast<double>(offsets[i]) - offsets[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int m = mn; m >= 1; --m) {
          c[i][m] = c1 * (m * c[i - 1][m - 1] - c5 * c[i - 1][m]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int m = mn; m >= 1; --m) {
        c[j][m] = (c4 * c[j][m] - m * c[j][m - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][order];
  return w;
}

std::vector<int> second_order_offsets(int order, std::size_t index, std::size_t size) {
  if (order < 1 || order > 3) throw InvalidArgument("second_order_offsets: order must be 1..3");
  const long half = order == 3 ? 2 : 1;
  const long i = static_cast<long>(index);
  const long len = static_cast<long>(size);
  std::vector<int> offsets;
  if (i - half >= 0 && i + half < len) {
    for (long o = -half; o <= half; ++o) offsets.push_back(static_cast<int>(o));
    return offsets;
  }
  const long n = order + 2;
  if (len < n) throw InvalidArgument("second_order_offsets: series too short for the stencil");
  const long start = std::clamp(i - n / 2, 0L, len - n);
  for (long j = start; j < start + n; ++j) offsets.push_back(static_cast<int>(j - i));
  return offsets;
}

double derivative(std::span<const double> samples, double step, std::size_t index, int order) {
  if (index >= samples.size()) throw InvalidArgument("fd::derivative: index out of range");
  if (order == 0) return samples[index];
  const auto offsets = second_order_offsets(order, index, samples.size());
  const auto w = stencil_weights(offsets, order);
  double acc = 0.0;
  for (std::size_t j = 0; j < offsets.size(); ++j) {
    acc += w[j] * samples[static_cast<long>(index) + offsets[j]];
  }
  double scale = 1.0;
  for (int m = 0; m < order; ++m) scale *= step;
  return acc / scale;
}

}  // namespace tomomotion::fd
