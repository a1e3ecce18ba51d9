#include "bermuda/parallel.hpp"

#include <atomic>

namespace bermuda {

namespace {
std::atomic<int> g_max_threads{0};
}

int max_threads() {
    int n = g_max_threads.load(std::memory_order_relaxed);
    if (n > 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_max_threads(int n) { g_max_threads.store(n < 1 ? 1 : n, std::memory_order_relaxed); }

}  // namespace bermuda
