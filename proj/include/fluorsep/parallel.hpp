#pragma once

#include <cstddef>
#include <functional>

namespace fluorsep {

/// Hardware concurrency, capped by FLUORSEP_THREADS when set.
int worker_count();

/// Runs body(0..count-1) on a share-nothing worker pool. Callers write
/// results into pre-sized slots by index so the outcome does not depend on
/// scheduling. The first exception thrown by any task is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)> &body);

} // namespace fluorsep
