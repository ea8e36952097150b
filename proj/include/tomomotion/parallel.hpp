#pragma once

#include <cstddef>
#include <functional>

namespace tomomotion {

/// Worker count: hardware concurrency, capped by TOMOMOTION_THREADS when set.
std::size_t worker_count();

/// Calls body(i) for every i in [0, n). Work is split into contiguous blocks,
/// so results written per index do not depend on the number of workers. The
/// first exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace tomomotion
