#pragma once

// Fixed-partition parallel loops.  The partition depends only on the problem
// size, so chunk-wise partial results reduced in chunk order are identical for
// any worker count.

#include <cstddef>
#include <functional>

namespace wgf {

/// Worker cap: WGF_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

/// Number of chunks used for a range of n items.
std::size_t chunk_count(std::size_t n);

/// Calls body(chunk, begin, end) once for every chunk of [0, n), possibly
/// concurrently.  Exceptions from workers are rethrown on the caller.
void for_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

}  // namespace wgf
