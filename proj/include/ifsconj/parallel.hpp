#pragma once

#include <cstddef>
#include <functional>

namespace ifsconj {

/// Worker cap: IFS_CONJ_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Splits [0, n) into contiguous chunks and runs body(begin, end) on up to
/// worker_count() threads.  An exception from the lowest-indexed failing chunk
/// is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace ifsconj
