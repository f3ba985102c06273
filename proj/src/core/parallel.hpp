#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace pucci {

/// Run fn(i) for i in [0, n) on up to `jobs` threads.  Work items are
/// independent and results land in caller-owned slots, so the merge order is
/// deterministic regardless of scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    if (jobs <= 0) jobs = int(std::thread::hardware_concurrency());
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t width = std::size_t(jobs) < n ? std::size_t(jobs) : n;
    for (std::size_t t = 0; t < width; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += width) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace pucci
