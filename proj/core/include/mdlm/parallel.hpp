#pragma once

#include <cstddef>
#include <functional>

namespace mdlm {

// Worker count resolution: explicit request > MDLM_WORKERS env var >
// hardware concurrency.  Always at least 1.
int resolve_workers(int requested = 0);

// Runs fn(i) for i in [0, n) on `workers` threads, splitting the range into
// contiguous chunks.  Results must not depend on the split: every work item
// draws randomness from its own keyed stream, never from a shared one.  The
// first exception thrown by any worker is rethrown after all workers join.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace mdlm
