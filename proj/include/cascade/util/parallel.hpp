#pragma once

#include <functional>

namespace cascade {

// Worker count for parallel_for: the CASCADE_THREADS environment variable
// when set to a positive integer, otherwise the hardware concurrency
// (at least 1).
int worker_count();

// Runs body(i) for every i in [begin, end), spreading indices across
// workers. Blocks until all indices finish; the first exception thrown by
// any body is rethrown after the join. body must not touch state shared
// with other indices unless it synchronizes that itself.
void parallel_for(int begin, int end, const std::function<void(int)>& body);

}  // namespace cascade
