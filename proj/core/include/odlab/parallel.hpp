#ifndef ODLAB_PARALLEL_HPP
#define ODLAB_PARALLEL_HPP

#include <cstdint>
#include <functional>

namespace odlab {

/// Requested thread count; 0 means hardware concurrency.
int resolve_threads(int requested);

/// Run body(i) for i in [0, n) on a bounded worker pool. Work items must be
/// independent; results should be written to per-index slots so the outcome
/// does not depend on scheduling. Exceptions are captured and rethrown on the
/// calling thread.
void parallel_for(std::uint64_t n, int threads,
                  const std::function<void(std::uint64_t)>& body);

}  // namespace odlab

#endif
