#pragma once

#include <cstddef>
#include <functional>

namespace conefreq {

// Worker cap for intra-stage parallelism; 0 means hardware concurrency.
void set_max_threads(unsigned n);
unsigned max_threads();

// Runs body(i) for i in [0, n) over contiguous static chunks. Callers write
// results into per-index slots, so output never depends on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace conefreq
