// Process-wide worker count and a static-partition parallel loop.
//
// ParallelFor splits [0, n) into contiguous chunks, one per worker. Callers
// write results into per-index slots and reduce afterwards in index order, so
// outputs never depend on the number of workers.

#ifndef SHARC_PARALLEL_H_
#define SHARC_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace sharc {

// n <= 0 selects the number of available cores.
void SetNumThreads(int n);
int NumThreads();

void ParallelFor(std::size_t n, const std::function<void(std::size_t)> &fn);

}  // namespace sharc

#endif  // SHARC_PARALLEL_H_
