#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "bermuda/gbm.hpp"
#include "bermuda/localpoly.hpp"
#include "bermuda/payoff.hpp"

namespace bermuda {

struct DpConfig {
    int degree = 0;
    KernelSpec kernel;
    std::vector<double> bandwidths;  // optional per-date h for k = 1..L-1; empty = kernel.bandwidth
    double nu = 0.0;
    double discount_per_step = 1.0;  // exp(-r T/L) in market mode, 1 in theory mode
    bool truncation = true;
    std::optional<double> c_max;     // default: max discounted payoff over the training ensemble

    void validate() const;
};

// Identifies the ensemble a chain was trained on; used to reject mismatched
// ensembles and seed collisions between training and pricing paths.
struct TrainingId {
    std::uint64_t seed = 0;
    std::uint64_t stream_offset = 0;
    int num_paths = 0;
    std::vector<double> times;

    bool matches(const PathEnsemble& paths) const;
    bool streams_overlap(const PathEnsemble& paths) const;
};

struct LevelStats {
    double mean_target = 0.0;
    double gated_fraction = 0.0;  // fraction of target evaluations truncated to zero
};

// Backward-estimated continuation values C-hat_1..C-hat_{L-1} (C-hat_L = 0).
class EstimatorChain {
  public:
    EstimatorChain(std::vector<ContinuationEstimator> estimators,
                   std::vector<std::vector<double>> targets, std::vector<LevelStats> stats,
                   DpConfig config, double c_max, TrainingId training);

    int num_dates() const { return static_cast<int>(estimators_.size()) + 1; }  // L
    // Estimated continuation value at date k (1 <= k <= L); date L is identically 0.
    // Truncated or raw evaluation per the chain's configuration.
    double continuation(int k, std::span<const double> x) const;
    const ContinuationEstimator& estimator(int k) const { return estimators_.at(k - 1); }
    // Responses Y_{k+1} that estimator k was fitted to.
    const std::vector<double>& targets(int k) const { return targets_.at(k - 1); }
    const LevelStats& level_stats(int k) const { return stats_.at(k - 1); }
    const DpConfig& config() const { return config_; }
    double c_max() const { return c_max_; }
    const TrainingId& training() const { return training_; }

  private:
    std::vector<ContinuationEstimator> estimators_;  // index k-1 for date k
    std::vector<std::vector<double>> targets_;
    std::vector<LevelStats> stats_;
    DpConfig config_;
    double c_max_;
    TrainingId training_;
};

// Recursive surrogate-target regression: C-hat_L = 0 and, for k = L-1..1,
// fit C-hat_k on (X(t_k), max(f_{k+1}(X(t_{k+1})), disc * C-hat_{k+1}(X(t_{k+1})))).
EstimatorChain backward_induct(const PathEnsemble& paths, const PayoffSpec& payoff,
                               const DpConfig& config);

// Direct estimate at t0: max(f_0(x0), disc * mean of date-1 targets). The
// date-0 regression degenerates to a sample mean because all paths start at x0.
struct TildeEstimate {
    double value = 0.0;
    double std_error = 0.0;
};
TildeEstimate tilde_price(const PathEnsemble& paths, const EstimatorChain& chain,
                          const PayoffSpec& payoff);

}  // namespace bermuda
