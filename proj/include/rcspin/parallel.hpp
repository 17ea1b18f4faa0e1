#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rcspin {

/// Run fn(i) for i in [0, n_tasks) on up to `workers` threads.
///
/// Tasks are claimed from a shared atomic counter, so scheduling is
/// work-stealing over a fixed task list; callers must write results into
/// per-index slots, which keeps every aggregate independent of the worker
/// count and of completion order. The first exception thrown by any task is
/// rethrown after all workers finish.
template <typename Fn>
void parallel_for_indexed(std::size_t n_tasks, unsigned workers, Fn&& fn) {
    if (workers <= 1 || n_tasks <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_tasks) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned n_threads = static_cast<unsigned>(
        std::min<std::size_t>(workers, n_tasks));
    pool.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

[[nodiscard]] inline unsigned default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

} // namespace rcspin
