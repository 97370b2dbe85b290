#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace speclp {

namespace detail {
inline std::atomic<unsigned>& worker_cap()
{
    static std::atomic<unsigned> cap{0};
    return cap;
}
} // namespace detail

// Global cap on worker threads; 0 means "use hardware concurrency".
inline void set_worker_count(unsigned workers) { detail::worker_cap().store(workers); }

inline unsigned worker_count()
{
    unsigned cap = detail::worker_cap().load();
    if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
    return cap;
}

// Runs body(i) for i in [0, count). Work is split into contiguous blocks, so
// any per-index output is independent of the worker count. The first
// exception thrown by a worker is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t count, Body&& body)
{
    const std::size_t workers = std::min<std::size_t>(worker_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = count * w / workers;
        const std::size_t end = count * (w + 1) / workers;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace speclp
