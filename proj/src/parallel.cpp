#include "vapal/parallel.hpp"

#include <atomic>

namespace vapal {

namespace detail {
thread_local bool in_parallel_region = false;
}

namespace {
std::atomic<std::size_t> g_threads{0};
}

void set_thread_count(std::size_t n) { g_threads.store(n); }

std::size_t thread_count() {
    const std::size_t n = g_threads.load();
    if (n != 0) {
        return n;
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace vapal
