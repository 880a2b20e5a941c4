#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace hord {

// Runs fn(block) for block = 0..n_blocks-1 on `workers` threads.
// Blocks are fixed work units independent of the worker count, so any
// computation whose blocks write disjoint state is bit-identical for
// every worker count.
inline void parallel_blocks(uint64_t n_blocks, unsigned workers,
                            const std::function<void(uint64_t)>& fn) {
    if (n_blocks == 0) return;
    if (workers <= 1 || n_blocks == 1) {
        for (uint64_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::atomic<uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto run = [&] {
        for (;;) {
            uint64_t b = next.fetch_add(1);
            if (b >= n_blocks || failed.load(std::memory_order_relaxed)) return;
            try {
                fn(b);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    unsigned n = workers < n_blocks ? workers : (unsigned)n_blocks;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline unsigned default_workers() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace hord
