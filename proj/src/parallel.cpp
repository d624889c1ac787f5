#include "gala/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gala {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for_blocks(std::int64_t n, std::int64_t block_size,
                         const std::function<void(std::int64_t, std::int64_t)>& fn,
                         int threads) {
    if (n <= 0) return;
    block_size = std::max<std::int64_t>(1, block_size);
    const std::int64_t blocks = (n + block_size - 1) / block_size;
    const int workers =
        static_cast<int>(std::min<std::int64_t>(resolve_threads(threads), blocks));

    if (workers <= 1) {
        for (std::int64_t b = 0; b < blocks; ++b)
            fn(b * block_size, std::min(n, (b + 1) * block_size));
        return;
    }

    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::int64_t b = next.fetch_add(1, std::memory_order_relaxed);
            if (b >= blocks) return;
            try {
                fn(b * block_size, std::min(n, (b + 1) * block_size));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    if (error) std::rethrow_exception(error);
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn,
                  int threads) {
    // Block size keeps dispatch overhead negligible for fine-grained bodies.
    const std::int64_t block = std::max<std::int64_t>(1, n / (8 * resolve_threads(threads)));
    parallel_for_blocks(
        n, block,
        [&fn](std::int64_t begin, std::int64_t end) {
            for (std::int64_t i = begin; i < end; ++i) fn(i);
        },
        threads);
}

} // namespace gala
