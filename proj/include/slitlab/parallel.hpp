#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace slitlab {

// Worker count from SLITLAB_WORKERS, falling back to hardware concurrency.
int worker_count();
void set_worker_count(int workers);

// Runs body(begin, end) over fixed-size chunks of [0, n). Chunk boundaries do
// not depend on the worker count, so per-index writes are schedule-independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t chunk = 4096);

// Fixed binary-tree summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

}  // namespace slitlab
