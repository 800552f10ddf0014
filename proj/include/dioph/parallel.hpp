#pragma once

// Index-ordered parallel map: worker threads grab indices, results land in a
// preallocated slot per index, so output is identical for any thread count.

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace dioph {

template <typename T, typename Fn>
std::vector<T> parallel_map_ordered(std::size_t count, unsigned threads, Fn fn) {
    std::vector<T> out(count);
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            out[i] = fn(i);
        }
    };
    std::vector<std::thread> pool;
    unsigned n = std::min<std::size_t>(threads, count);
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace dioph
