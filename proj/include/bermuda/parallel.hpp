#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace bermuda {

// Global worker count used by parallel_for. Thread count must never change
// numerical results: work is split into contiguous index ranges and every
// range writes only its own slots.
int max_threads();
void set_max_threads(int n);

template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    const std::size_t t = static_cast<std::size_t>(max_threads());
    if (n == 0) return;
    if (t <= 1 || n == 1) {
        body(std::size_t{0}, n);
        return;
    }
    const std::size_t workers = t < n ? t : n;
    const std::size_t chunk = n / workers, rem = n % workers;
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    std::size_t begin = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t end = begin + chunk + (w < rem ? 1 : 0);
        if (w + 1 == workers) {
            body(begin, end);
        } else {
            pool.emplace_back([&body, begin, end] { body(begin, end); });
        }
        begin = end;
    }
    for (auto& th : pool) th.join();
}

}  // namespace bermuda
