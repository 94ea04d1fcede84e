#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ridgekit {

/// Number of workers to use when the caller passes 0: honours RIDGEKIT_THREADS,
/// then falls back to hardware concurrency.
std::size_t default_thread_count();

/// Resolve a requested worker count. RIDGEKIT_THREADS, when set, wins.
std::size_t resolve_thread_count(std::size_t requested);

/// Run body(i) for i in [0, n) on up to `threads` workers. Work items must be
/// independent; results are written by index so output order never depends on
/// scheduling. The first exception thrown by any item is rethrown here.
template <typename Body>
void parallel_for(std::size_t n, std::size_t threads, Body&& body) {
    if (threads == 0) threads = default_thread_count();
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace ridgekit
