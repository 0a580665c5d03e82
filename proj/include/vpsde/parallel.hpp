#pragma once

#include <cstddef>
#include <functional>

namespace vpsde {

/// Worker count used by Monte-Carlo batches. 0 means hardware concurrency.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Runs body(i) for i in [0, count) across the configured workers. Each index
/// is visited exactly once; callers write results into per-index slots and
/// reduce serially afterwards so output never depends on the worker count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace vpsde
