// Static block partitioning over an index range. Workers get contiguous
// disjoint blocks, so any computation whose per-index result does not
// depend on the partition produces identical output for every worker
// count.

#pragma once

#include <cstddef>
#include <functional>

namespace mspline {

// Number of workers to use: explicit request wins, otherwise the
// MSPLINE_WORKERS environment variable, otherwise the hardware count.
// Always at least 1.
int resolve_workers(int requested);

// Calls fn(begin, end) for each of at most `workers` contiguous blocks
// covering [0, count). Runs inline when a single block suffices.
void parallel_for_blocks(std::size_t count, int workers,
                         const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace mspline
