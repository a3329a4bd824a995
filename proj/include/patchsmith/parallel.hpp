#pragma once

#include <cstddef>
#include <functional>

namespace patchsmith {

/// Worker count: hardware concurrency, capped by PATCHSMITH_THREADS.
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Each index is visited exactly once; the
/// caller must make iterations independent. The first exception thrown by
/// any iteration is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace patchsmith
