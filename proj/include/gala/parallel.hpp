#pragma once

#include <cstdint>
#include <functional>

namespace gala {

// 0 or negative -> all hardware threads.
int resolve_threads(int requested);

// Runs fn(begin, end) over [0, n) in contiguous blocks of block_size.
// Block boundaries depend only on (n, block_size), never on the thread
// count, so work that reduces per-block stays deterministic.
void parallel_for_blocks(std::int64_t n, std::int64_t block_size,
                         const std::function<void(std::int64_t, std::int64_t)>& fn,
                         int threads = 0);

// Element-wise convenience wrapper.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn,
                  int threads = 0);

} // namespace gala
