#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bermuda/dp.hpp"
#include "bermuda/gbm.hpp"
#include "bermuda/payoff.hpp"

namespace bermuda {

using StateFn = std::function<double(std::span<const double>)>;

// Stream offset separating training from pricing paths within one replication.
inline constexpr std::uint64_t kPricingStreamOffset = std::uint64_t{1} << 31;

// Suboptimal exercise rule: stop at the first date k >= start_index with
// C-hat_k(X(t_k)) <= f_k(X(t_k)), where C-hat_L = 0. Ties stop.
struct StoppingPolicy {
    std::vector<StateFn> continuation;  // index k = 0..L-1; [0] may be empty if start_index >= 1
    PayoffSpec payoff;
    int num_dates = 0;  // L
    int start_index = 1;
    double discount_per_step = 1.0;
    TrainingId training;

    void validate() const;
};

// Builds the policy from a fitted chain. The continuation closures reference
// the chain (non-owning); keep it alive while the policy is in use.
// training_paths is required only for start_index 0, where the date-0 estimate
// is the sample mean of the date-1 targets.
StoppingPolicy make_policy(const EstimatorChain& chain, const PayoffSpec& payoff,
                           int start_index = 1, const PathEnsemble* training_paths = nullptr);

int stop_index(const StoppingPolicy& policy, const PathEnsemble& paths, int path);

struct LowerBoundEstimate {
    double value = 0.0;      // V-hat_0
    double std_error = 0.0;
    std::vector<int> stop_counts;  // histogram over stop dates start_index..L
};

// V-hat_0 = (1/N) sum_n disc^(k*_n) f_{k*_n}(X(t_{k*_n})) on fresh paths.
// Rejects ensembles whose (seed, streams) collide with the training ensemble.
LowerBoundEstimate lower_bound_price(const StoppingPolicy& policy, const PathEnsemble& fresh_paths);

struct Replication {
    double v_hat = 0.0;
    double v_tilde = 0.0;
    double se_hat = 0.0;
    double se_tilde = 0.0;
    std::uint64_t seed = 0;
};

struct PricingReport {
    double v_hat = 0.0;
    double v_tilde = 0.0;
    double se_hat = 0.0;   // across replications when R > 1, else within-run
    double se_tilde = 0.0;
    int num_train_paths = 0;
    int num_pricing_paths = 0;
    std::uint64_t master_seed = 0;
    std::vector<Replication> runs;
};

// Everything needed for one train -> policy -> fresh-price experiment.
struct RunPlan {
    GbmParams model;
    std::vector<double> x0;
    ExerciseGrid grid;
    PayoffSpec payoff;
    DpConfig dp;
    int num_train_paths = 0;
    int num_pricing_paths = 0;
    int start_index = 1;
    std::uint64_t master_seed = 1;

    void validate() const;
};

// R independent (train, fit, fresh-price) cycles. Replication i uses seed
// master_seed + i * 2^32, training streams [0, M) and pricing streams
// [2^31, 2^31 + N).
PricingReport replicate(const RunPlan& plan, int replications);

}  // namespace bermuda
