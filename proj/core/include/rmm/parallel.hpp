#pragma once

#include <cstddef>
#include <functional>

namespace rmm {

/// Upper bound on worker threads used by the library (≥ 1). Defaults to the
/// hardware concurrency.
void set_max_jobs(int jobs);
int max_jobs();

/// Runs fn(i) for i in [0, n) on at most max_jobs() threads. The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace rmm
