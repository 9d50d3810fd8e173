#pragma once

#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace chestnet {

// Worker cap: CHESTNET_THREADS if set (clamped to [1,256]), else hardware.
inline std::size_t worker_count() {
    static const std::size_t cached = [] {
        if (const char* env = std::getenv("CHESTNET_THREADS")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end != env && v >= 1) return static_cast<std::size_t>(v > 256 ? 256 : v);
        }
        unsigned hw = std::thread::hardware_concurrency();
        return static_cast<std::size_t>(hw == 0 ? 1 : hw);
    }();
    return cached;
}

// Runs f(i) for i in [0,n). Iterations must write disjoint state; results are
// then identical to the serial loop regardless of the worker count.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
    const std::size_t workers = worker_count() < n ? worker_count() : n;
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = lo + chunk < n ? lo + chunk : n;
        if (lo >= hi) break;
        pool.emplace_back([&f, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) f(i);
        });
    }
    const std::size_t hi0 = chunk < n ? chunk : n;
    for (std::size_t i = 0; i < hi0; ++i) f(i);
    for (auto& t : pool) t.join();
}

} // namespace chestnet
