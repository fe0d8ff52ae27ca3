#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ex2sm {

// Runs the tasks to completion on up to `workers` threads, pulling in the
// given order. With one worker (or one task) everything runs inline. The
// first exception is rethrown after all threads join.
inline void parallel_run(std::vector<std::function<void()>>& tasks, unsigned workers) {
    if (tasks.empty()) return;
    unsigned n = std::min<unsigned>(workers == 0 ? 1 : workers,
                                    static_cast<unsigned>(tasks.size()));
    if (n <= 1) {
        for (auto& t : tasks) t();
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                tasks[i]();
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(n);
    for (unsigned i = 0; i < n; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ex2sm
