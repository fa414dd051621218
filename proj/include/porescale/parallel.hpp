#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace porescale {

/// Runs fn(i) for i in [0, n) on `workers` threads. Tasks claim indices from
/// a shared counter; results must be written into index-addressed slots by
/// the callable itself, so the outcome is independent of scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (n == 0) return;
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto body = [&] {
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
    const int nt = std::min<std::size_t>(workers, n);
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t)
        pool.emplace_back(body);
    for (auto& th : pool)
        th.join();
    if (failed.load() && error)
        std::rethrow_exception(error);
}

} // namespace porescale
