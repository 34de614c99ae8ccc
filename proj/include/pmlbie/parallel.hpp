#pragma once
/**
 * @file parallel.hpp
 * @brief Static-partition parallel loop; each index is handled by exactly one
 *        worker, so results do not depend on scheduling.
 */

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pmlbie {

/**
 * @brief Calls f(i, worker) for i in [0, n), worker in [0, threads).
 *
 * Indices are dealt round-robin, which balances rows of varying cost. The
 * first exception thrown by any worker is rethrown on the caller's thread.
 */
template <class F>
void parallel_for(int n, int threads, F&& f)
{
    threads = std::clamp(threads, 1, std::max(n, 1));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) f(i, 0);
        return;
    }
    std::exception_ptr err;
    std::mutex mtx;
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += threads) f(i, w);
            } catch (...) {
                std::lock_guard lock(mtx);
                if (!err) err = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

inline int hardware_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace pmlbie
