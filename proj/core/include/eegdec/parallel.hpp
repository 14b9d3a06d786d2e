#pragma once

#include <functional>

namespace eegdec::util {

// Runs fn(0..n_tasks-1) on up to n_threads workers pulling from a shared
// atomic counter. Tasks must be independent; any task exception is rethrown
// on the calling thread. n_threads <= 1 runs inline. Results must not depend
// on scheduling: callers write to disjoint, preallocated slots.
void parallel_for(int n_tasks, int n_threads, const std::function<void(int)>& fn);

// Hardware concurrency with a sane floor of 1.
int default_threads();

}  // namespace eegdec::util
