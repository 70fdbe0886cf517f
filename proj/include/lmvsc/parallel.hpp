#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace lmvsc {

/// Number of worker threads to use when the caller passes 0.
inline int default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(begin, end) over contiguous chunks of [0, count).
///
/// Chunk boundaries depend only on `count` and `threads`, and every index is
/// visited exactly once, so callers that write per-index results get output
/// independent of the thread count. The first exception thrown by any chunk
/// (lowest chunk index) is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    if (threads <= 0) threads = default_threads();
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    if (workers <= 1) {
        if (count > 0) fn(std::size_t{0}, count);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
            try {
                if (begin < end) fn(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace lmvsc
