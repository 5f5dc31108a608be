#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace csk {

inline unsigned worker_count() {
    if (const char* env = std::getenv("CSK_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

/// Run f(i) for i in [0, n). Results must go to per-index slots so the
/// outcome is identical for any worker count; reductions stay with the caller
/// and run in fixed index order.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const unsigned workers = worker_count();
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            f(i);
        }
    };
    std::vector<std::thread> pool;
    const unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    pool.reserve(spawn - 1);
    for (unsigned t = 1; t < spawn; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
}

}  // namespace csk
