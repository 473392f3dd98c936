#pragma once

#include <cstddef>
#include <functional>

namespace gridmh {

/// Thread count used when a caller passes 0. Defaults to hardware concurrency.
int default_threads();
void set_default_threads(int threads);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index must
/// be independent of the others; results therefore never depend on the thread
/// count. The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace gridmh
