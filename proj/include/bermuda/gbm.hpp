#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bermuda {

// Multi-asset geometric Brownian motion dX_k/X_k = (r - delta) dt + sigma dW_k.
struct GbmParams {
    int assets = 1;
    double rate = 0.0;         // r, per year
    double dividend = 0.0;     // delta, per year
    double sigma = 0.0;        // per sqrt(year)
    std::vector<double> correlation;  // assets x assets, row major; empty = identity

    void validate() const;
    // Lower Cholesky factor of the correlation matrix (identity if none given).
    std::vector<double> correlation_cholesky() const;
};

struct ExerciseGrid {
    std::vector<double> times;  // t0 < t1 < ... < tL

    static ExerciseGrid uniform(double t0, double maturity, int dates);
    int num_steps() const { return static_cast<int>(times.size()) - 1; }  // L
    double dt(int j) const { return times[j + 1] - times[j]; }
    void validate() const;
};

// Immutable bundle of M simulated trajectories on the exercise grid.
// Path m is a function of (seed, stream_offset + m) alone.
class PathEnsemble {
  public:
    PathEnsemble(ExerciseGrid grid, std::vector<double> x0, int num_paths,
                 std::uint64_t seed, std::uint64_t stream_offset, std::vector<double> states);

    int num_paths() const { return num_paths_; }
    int dim() const { return dim_; }
    const ExerciseGrid& grid() const { return grid_; }
    const std::vector<double>& x0() const { return x0_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_offset() const { return stream_offset_; }

    // State of path m at grid date j (d components).
    std::span<const double> state(int m, int j) const {
        const std::size_t base = (static_cast<std::size_t>(m) * dates_ + j) * dim_;
        return {states_.data() + base, static_cast<std::size_t>(dim_)};
    }
    double state(int m, int j, int k) const {
        return states_[(static_cast<std::size_t>(m) * dates_ + j) * dim_ + k];
    }
    const std::vector<double>& raw() const { return states_; }

  private:
    ExerciseGrid grid_;
    std::vector<double> x0_;
    int num_paths_;
    int dim_;
    std::size_t dates_;  // L + 1
    std::uint64_t seed_;
    std::uint64_t stream_offset_;
    std::vector<double> states_;
};

// Exact lognormal transition between grid dates; no sub-stepping.
PathEnsemble simulate_gbm(const GbmParams& params, const std::vector<double>& x0,
                          const ExerciseGrid& grid, int num_paths, std::uint64_t seed,
                          std::uint64_t stream_offset = 0);

}  // namespace bermuda
