#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace longrisk {

/// Run `body(begin, end)` over [0, n) split into contiguous chunks, one per
/// worker. Chunks write disjoint results, so the outcome is independent of
/// scheduling; callers reduce sequentially afterwards.
inline void parallel_for(long long n, int threads,
                         const std::function<void(long long, long long)>& body) {
    if (n <= 0) {
        return;
    }
    if (threads <= 1 || n == 1) {
        body(0, n);
        return;
    }
    const int workers = static_cast<int>(std::min<long long>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const long long chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const long long begin = static_cast<long long>(w) * chunk;
        const long long end = std::min(n, begin + chunk);
        if (begin >= end) {
            break;
        }
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
    for (auto& t : pool) {
        t.join();
    }
}

} // namespace longrisk
