#pragma once

#include <cstddef>
#include <functional>

namespace debayes {

// Worker count resolution: explicit request > DEBAYES_THREADS > hardware
// concurrency.  A request of 0 means "resolve from environment/hardware".
int resolve_threads(int requested = 0);

// Runs fn(i) for i in [0, count) on up to `threads` workers.  Tasks must be
// independent; results keyed by i stay deterministic whatever the worker
// count.  Exceptions are captured and the first one rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  int threads = 0);

}  // namespace debayes
