#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dynkit {

/// Worker count: explicit value if positive, else DYNKIT_THREADS, else the
/// number of logical cores.
inline int resolve_threads(int requested)
{
    if (const char* env = std::getenv("DYNKIT_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    if (requested > 0) return requested;
    return std::max(1U, std::thread::hardware_concurrency());
}

/// Splits [0, n) into contiguous chunks, one per worker, and runs
/// body(begin, end, chunk) on each. Chunk boundaries depend only on n and
/// the worker count, so per-chunk outputs can be merged deterministically.
template <class Body>
void parallel_chunks(std::size_t n, int threads, Body&& body)
{
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(threads), n));
    if (workers <= 1) {
        body(std::size_t{0}, n, std::size_t{0});
        return;
    }
    const std::size_t step = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t c = 0; c < workers; ++c) {
        const std::size_t begin = c * step;
        const std::size_t end = std::min(n, begin + step);
        pool.emplace_back([&, begin, end, c] {
            try {
                if (begin < end) body(begin, end, c);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

inline std::size_t chunk_count(std::size_t n, int threads)
{
    return std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), n));
}

}  // namespace dynkit
