#pragma once

#include <cstddef>
#include <functional>

namespace xc1d {

/// Caps worker parallelism for kernels and data loading. 0 selects the
/// hardware concurrency. Results never depend on this value.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Runs fn(i) for i in [0, n) over contiguous static chunks. The first
/// exception (by chunk order) is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace xc1d
