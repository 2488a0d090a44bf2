#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gsrc {

// Splits [0, n) into a fixed number of chunks that does not depend on the
// worker count, so chunk-local accumulation merged in chunk order gives
// bitwise-identical results at any thread count.
constexpr std::size_t kParallelChunks = 16;

inline std::size_t chunk_count(std::size_t n) { return std::min(n, kParallelChunks); }

// fn(chunk, begin, end) is invoked once per chunk; chunks run concurrently
// on up to `threads` workers, items within a chunk sequentially.
inline void parallel_chunks(std::size_t n, int threads,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0)
        return;
    const std::size_t chunks = chunk_count(n);
    const std::size_t base = n / chunks;
    const std::size_t extra = n % chunks;

    const auto chunk_range = [&](std::size_t c) {
        const std::size_t begin = c * base + std::min(c, extra);
        const std::size_t end = begin + base + (c < extra ? 1 : 0);
        return std::pair<std::size_t, std::size_t>(begin, end);
    };

    const int workers = std::max(1, threads);
    if (workers == 1 || chunks == 1) {
        for (std::size_t c = 0; c < chunks; ++c) {
            const auto [begin, end] = chunk_range(c);
            fn(c, begin, end);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;

    const auto worker = [&]() {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= chunks)
                return;
            try {
                const auto [begin, end] = chunk_range(c);
                fn(c, begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    const std::size_t spawn = std::min<std::size_t>(static_cast<std::size_t>(workers), chunks);
    pool.reserve(spawn);
    for (std::size_t i = 0; i < spawn; ++i)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace gsrc
