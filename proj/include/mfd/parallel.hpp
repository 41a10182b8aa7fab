#pragma once

#include <cstddef>
#include <functional>

namespace mfd {

// Worker cap from MFD_THREADS (0 or unset = hardware concurrency).
std::size_t worker_count();

// Runs body(i) for i in [0, n). Each index is processed exactly once; callers
// write results into per-index slots so output never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mfd
