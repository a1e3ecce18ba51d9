#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace bermuda {

// Counter-based generator (Philox 2x64-10 round structure). Each (seed, stream)
// pair yields an independent sequence that depends only on those two values and
// the draw index, so results cannot depend on thread scheduling.
class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t stream) : key_(seed), stream_(stream), counter_(0) {}

    std::uint64_t next_u64() { return block().first; }

    // Uniform draw in the open interval (0, 1).
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    // Standard normal via Box-Muller; consumes one counter block.
    double next_normal() {
        const auto [a, b] = block();
        const double u1 = static_cast<double>(a >> 11) * 0x1.0p-53 + 0x1.0p-54;
        const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53 + 0x1.0p-54;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

  private:
    std::pair<std::uint64_t, std::uint64_t> block() {
        constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ull;
        constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ull;
        std::uint64_t x0 = stream_, x1 = counter_++, k = key_;
        for (int r = 0; r < 10; ++r) {
            const unsigned __int128 p = static_cast<unsigned __int128>(kMul) * x0;
            const std::uint64_t hi = static_cast<std::uint64_t>(p >> 64);
            const std::uint64_t lo = static_cast<std::uint64_t>(p);
            x0 = hi ^ k ^ x1;
            x1 = lo;
            k += kWeyl;
        }
        return {x0, x1};
    }

    std::uint64_t key_;
    std::uint64_t stream_;
    std::uint64_t counter_;
};

}  // namespace bermuda
