#ifndef LYAPCHI_DETAIL_PARALLEL_HPP
#define LYAPCHI_DETAIL_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace lyapchi {

namespace detail {

inline std::atomic<unsigned>& worker_count_slot() {
    static std::atomic<unsigned> count{0};
    return count;
}

} // namespace detail

// Worker count used by internally parallel operations. 0 = hardware default.
// Intended to be set once at startup; results are bitwise independent of it.
inline void set_worker_count(unsigned n) {
    detail::worker_count_slot().store(n, std::memory_order_relaxed);
}

inline unsigned worker_count() {
    unsigned n = detail::worker_count_slot().load(std::memory_order_relaxed);
    if (n == 0) {
        n = std::thread::hardware_concurrency();
        if (n == 0) n = 1;
    }
    return n;
}

namespace detail {

// Runs body(begin, end) over contiguous chunks of [0, count). Each chunk is a
// fixed function of count and the worker count only through its index range,
// and bodies may only write to disjoint slots, so outputs never depend on
// scheduling. The first exception thrown by any worker is rethrown.
template <class Body>
inline void parallel_for(std::size_t count, Body&& body) {
    if (count == 0) return;
    const std::size_t workers =
        std::min<std::size_t>(worker_count(), count);
    if (workers <= 1 || count < 256) {
        body(std::size_t{0}, count);
        return;
    }
    const std::size_t chunk = (count + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    auto run = [&](std::size_t begin, std::size_t end) noexcept {
        try {
            body(begin, end);
        } catch (...) {
            bool expected = false;
            if (failed.compare_exchange_strong(expected, true))
                first_error = std::current_exception();
        }
    };
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(run, begin, end);
    }
    run(0, std::min(count, chunk));
    for (auto& t : pool) t.join();
    if (failed.load()) std::rethrow_exception(first_error);
}

} // namespace detail
} // namespace lyapchi

#endif // LYAPCHI_DETAIL_PARALLEL_HPP
