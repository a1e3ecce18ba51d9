#include "bermuda/dp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "bermuda/math.hpp"
#include "bermuda/parallel.hpp"

namespace bermuda {

void DpConfig::validate() const {
    if (degree < 0) throw std::invalid_argument("DpConfig: degree must be >= 0");
    if (!(discount_per_step > 0.0) || discount_per_step > 1.0)
        throw std::invalid_argument("DpConfig: discount_per_step must be in (0, 1]");
    if (nu < 0.0) throw std::invalid_argument("DpConfig: nu must be >= 0");
    if (c_max && !(*c_max > 0.0)) throw std::invalid_argument("DpConfig: c_max must be > 0");
    kernel.validate();
    for (double h : bandwidths)
        if (!(h > 0.0)) throw std::invalid_argument("DpConfig: bandwidths must be > 0");
}

bool TrainingId::matches(const PathEnsemble& paths) const {
    return seed == paths.seed() && stream_offset == paths.stream_offset() &&
           num_paths == paths.num_paths() && times == paths.grid().times;
}

bool TrainingId::streams_overlap(const PathEnsemble& paths) const {
    if (seed != paths.seed()) return false;
    const std::uint64_t a0 = stream_offset, a1 = stream_offset + static_cast<std::uint64_t>(num_paths);
    const std::uint64_t b0 = paths.stream_offset(),
                        b1 = paths.stream_offset() + static_cast<std::uint64_t>(paths.num_paths());
    return a0 < b1 && b0 < a1;
}

EstimatorChain::EstimatorChain(std::vector<ContinuationEstimator> estimators,
                               std::vector<std::vector<double>> targets,
                               std::vector<LevelStats> stats, DpConfig config, double c_max,
                               TrainingId training)
    : estimators_(std::move(estimators)),
      targets_(std::move(targets)),
      stats_(std::move(stats)),
      config_(std::move(config)),
      c_max_(c_max),
      training_(std::move(training)) {}

double EstimatorChain::continuation(int k, std::span<const double> x) const {
    if (k < 1 || k > num_dates()) throw std::invalid_argument("EstimatorChain: date out of range");
    if (k == num_dates()) return 0.0;  // C-hat_L = 0 by definition
    return estimators_[k - 1].chain_eval(x, config_.truncation).value;
}

EstimatorChain backward_induct(const PathEnsemble& paths, const PayoffSpec& payoff,
                               const DpConfig& config) {
    config.validate();
    payoff.validate();
    const int L = paths.grid().num_steps();
    const int M = paths.num_paths();
    const int d = paths.dim();
    if (L < 1) throw std::invalid_argument("backward_induct: need at least one exercise date");

    const MonomialBasis basis = MonomialBasis::build(d, config.degree);
    if (M < basis.size())
        throw std::invalid_argument(
            "backward_induct: fewer paths than basis functions (moment matrix singular)");
    if (!config.bandwidths.empty() &&
        config.bandwidths.size() != static_cast<std::size_t>(L - 1))
        throw std::invalid_argument("backward_induct: need one bandwidth per date 1..L-1");

    const double disc = config.discount_per_step;

    // sup of payoffs and of discounted payoffs over the training ensemble
    double sup_payoff = 0.0, sup_disc_payoff = 0.0;
    for (int m = 0; m < M; ++m) {
        double cum = 1.0;
        for (int k = 0; k <= L; ++k) {
            const double f = evaluate(payoff, k, paths.state(m, k));
            sup_payoff = std::max(sup_payoff, f);
            sup_disc_payoff = std::max(sup_disc_payoff, cum * f);
            cum *= disc;
        }
    }
    const double c_max = config.c_max.value_or(sup_disc_payoff > 0.0 ? sup_disc_payoff : 1.0);
    const double target_bound = std::max(sup_payoff, c_max);

    TrainingId training{paths.seed(), paths.stream_offset(), M, paths.grid().times};

    std::vector<ContinuationEstimator> estimators;  // built back to front, reversed at the end
    std::vector<std::vector<double>> targets;
    std::vector<LevelStats> stats;
    estimators.reserve(L - 1);

    std::vector<double> y(M);
    for (int k = L - 1; k >= 1; --k) {
        const ContinuationEstimator* next = estimators.empty() ? nullptr : &estimators.back();
        std::atomic<long> zeroed{0};
        parallel_for(static_cast<std::size_t>(M), [&](std::size_t begin, std::size_t end) {
            long local_zeroed = 0;
            for (std::size_t m = begin; m < end; ++m) {
                const auto x_next = paths.state(static_cast<int>(m), k + 1);
                const double f = evaluate(payoff, k + 1, x_next);
                double cont = 0.0;
                if (next) {
                    const auto ev = next->chain_eval(x_next, config.truncation);
                    cont = ev.value;
                    if (ev.zeroed) ++local_zeroed;
                }
                y[m] = std::max(f, disc * cont);
            }
            zeroed += local_zeroed;
        });

        for (int m = 0; m < M; ++m) {
            // Truncated evaluations keep targets inside [0, bound]; a raw
            // degree-0 fit is a convex combination of its targets and stays
            // inside as well. Raw fits of higher degree may overshoot.
            if (y[m] < 0.0 ||
                ((config.truncation || config.degree == 0) && y[m] > target_bound * (1.0 + 1e-12)))
                throw std::logic_error("backward_induct: target out of bounds");
        }

        std::vector<double> xk(static_cast<std::size_t>(M) * d);
        for (int m = 0; m < M; ++m) {
            const auto s = paths.state(m, k);
            for (int j = 0; j < d; ++j) xk[static_cast<std::size_t>(m) * d + j] = s[j];
        }

        KernelSpec kernel = config.kernel;
        if (!config.bandwidths.empty()) kernel.bandwidth = config.bandwidths[k - 1];

        LevelStats level;
        level.mean_target = mean(y);
        level.gated_fraction = static_cast<double>(zeroed.load()) / M;
        stats.push_back(level);
        targets.push_back(y);
        estimators.emplace_back(std::move(xk), y, basis, kernel, c_max, config.nu);
    }

    std::reverse(estimators.begin(), estimators.end());
    std::reverse(targets.begin(), targets.end());
    std::reverse(stats.begin(), stats.end());
    return EstimatorChain(std::move(estimators), std::move(targets), std::move(stats), config,
                          c_max, training);
}

TildeEstimate tilde_price(const PathEnsemble& paths, const EstimatorChain& chain,
                          const PayoffSpec& payoff) {
    if (!chain.training().matches(paths))
        throw std::invalid_argument("tilde_price: chain was not built from this ensemble");
    const int M = paths.num_paths();
    const double disc = chain.config().discount_per_step;

    std::vector<double> y1(M);
    parallel_for(static_cast<std::size_t>(M), [&](std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            const auto x1 = paths.state(static_cast<int>(m), 1);
            const double f = evaluate(payoff, 1, x1);
            y1[m] = std::max(f, disc * chain.continuation(1, x1));
        }
    });

    const double cont0 = disc * mean(y1);
    const double f0 = evaluate(payoff, 0, std::span<const double>(paths.x0()));
    TildeEstimate out;
    out.value = std::max(f0, cont0);
    out.std_error = disc * standard_error(y1);
    return out;
}

}  // namespace bermuda
