#pragma once

// Index-parallel loops. Results are written by index, so output never depends on scheduling.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace frtm {

namespace detail {
inline std::atomic<int>& job_limit() {
    static std::atomic<int> jobs{0};
    return jobs;
}
}  // namespace detail

/// Caps worker threads; 0 means hardware concurrency.
inline void set_jobs(int jobs) { detail::job_limit() = std::max(0, jobs); }

inline int jobs() {
    const int j = detail::job_limit();
    if (j > 0) return j;
    return std::max(1u, std::thread::hardware_concurrency());
}

template <typename F>
void parallel_for(std::size_t n, F&& f) {
    const std::size_t workers = std::min<std::size_t>(n, std::size_t(jobs()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace frtm
