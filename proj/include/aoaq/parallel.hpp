#pragma once

#include <cstddef>
#include <functional>

namespace aoaq {

// 0 means "one worker per hardware thread".
unsigned resolve_threads(unsigned requested) noexcept;

// Calls body(chunk) once for every chunk in [0, chunks) on up to `threads`
// workers. Which worker runs which chunk is unspecified, so callers store
// per-chunk results by index and reduce them in index order afterwards.
// The first exception thrown by any chunk is rethrown on the caller.
void parallel_chunks(std::size_t chunks, unsigned threads,
                     const std::function<void(std::size_t)>& body);

}  // namespace aoaq
