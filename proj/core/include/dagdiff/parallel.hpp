#pragma once

#include <functional>

namespace dagdiff {

/// Worker count: min(hardware, DAGDIFF_THREADS if set, `requested` if > 0).
int worker_count(int requested = 0);

/// Runs fn(chunk_index, begin, end) over [0, n) split into fixed-size
/// chunks. Chunk boundaries do not depend on the worker count, so callers
/// that write per-chunk outputs and reduce them in chunk order stay
/// deterministic under any parallelism.
void parallel_chunks(int n, int chunk_size,
                     const std::function<void(int, int, int)>& fn);

}  // namespace dagdiff
