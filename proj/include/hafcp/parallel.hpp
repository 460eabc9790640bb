#pragma once

#include <cstddef>
#include <functional>

namespace hafcp {

/// Worker cap: HAFCP_THREADS if set to a positive integer, otherwise the
/// machine's hardware concurrency (at least 1).
std::size_t thread_limit();

/// Runs body(i) for i in [0, n). Each index runs exactly once; callers write
/// results into per-index slots so the outcome does not depend on scheduling.
/// The first exception thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hafcp
