#ifndef VAPAL_PARALLEL_HPP
#define VAPAL_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace vapal {

/// Worker count used by parallel_for. 0 means hardware_concurrency.
void set_thread_count(std::size_t n);
std::size_t thread_count();

namespace detail {
// true on threads spawned by parallel_for; nested calls run inline
extern thread_local bool in_parallel_region;
}

/// Calls fn(i) for every i in [0, n) using contiguous chunks on a few
/// threads. fn must only write to slots owned by i; results are therefore
/// independent of scheduling. The first exception thrown is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = detail::in_parallel_region ? 1 : std::min(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) {
            break;
        }
        pool.emplace_back([&, begin, end] {
            detail::in_parallel_region = true;
            try {
                for (std::size_t i = begin; i < end; ++i) {
                    fn(i);
                }
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (error) {
        std::rethrow_exception(error);
    }
}

}  // namespace vapal

#endif  // VAPAL_PARALLEL_HPP
