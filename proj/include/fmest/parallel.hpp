#pragma once

#include <cstddef>
#include <functional>

namespace fmest {

// Worker count: FMEST_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
unsigned thread_count();

// Runs fn(i) for i in [0, n). Tasks write only to their own slot, so results
// do not depend on the schedule. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace fmest
