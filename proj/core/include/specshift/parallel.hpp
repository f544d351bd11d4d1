#pragma once

#include <cstddef>
#include <functional>

namespace specshift {

// Worker count from SPECSHIFT_THREADS (0 or unset = hardware concurrency).
unsigned worker_count();

// Runs body(i) for i in [0, n). Each index is handled by exactly one worker,
// so bodies that write only to slot i produce results independent of the
// thread count. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace specshift
