#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tomomotion::fd {

// Weights w such that f^(order)(0) ~ sum_i w[i] f(offsets[i] * h) / h^order
// (Fornberg's recursion). Offsets are in units of the step.
std::vector<double> stencil_weights(std::span<const int> offsets, int order);

// Offsets of a second-order accurate stencil for derivative `order` (1..3)
// at position `index` of a series of length `size`. Central when the series
// allows it, one-sided near the ends.
std::vector<int> second_order_offsets(int order, std::size_t index, std::size_t size);

// Derivative of a uniformly sampled series at `index` with a second-order
// stencil (central in the interior, one-sided near the ends).
double derivative(std::span<const double> samples, double step, std::size_t index, int order);

}  // namespace tomomotion::fd
