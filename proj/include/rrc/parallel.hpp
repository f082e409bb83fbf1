#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace rrc {

/// Worker count from RRC_THREADS (0 or unset = hardware concurrency).
inline int worker_count() {
    const char* env = std::getenv("RRC_THREADS");
    long n = 0;
    if (env && *env) n = std::strtol(env, nullptr, 10);
    if (n <= 0) n = static_cast<long>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    return static_cast<int>(n);
}

/// Runs fn(i) for i in [0, n). Tasks must write to disjoint slots; results are
/// then independent of the thread count and of scheduling order.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const int workers = worker_count();
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto body = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int spawn = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(workers)));
    pool.reserve(spawn);
    for (int t = 0; t < spawn; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace rrc
