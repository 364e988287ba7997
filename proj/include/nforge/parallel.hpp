#pragma once

#include <cstddef>
#include <functional>

namespace nforge {

/// Worker count: hardware concurrency, capped by NFORGE_THREADS when set.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs fn(lo, hi) over a static partition of [0, n). Partitions write
/// disjoint outputs, so results never depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                  std::size_t min_chunk = 1);

}  // namespace nforge
