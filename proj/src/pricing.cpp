#include "bermuda/pricing.hpp"

#include <cmath>
#include <stdexcept>

#include "bermuda/math.hpp"
#include "bermuda/parallel.hpp"

namespace bermuda {

void StoppingPolicy::validate() const {
    if (num_dates < 1) throw std::invalid_argument("StoppingPolicy: num_dates must be >= 1");
    if (start_index < 0 || start_index > num_dates)
        throw std::invalid_argument("StoppingPolicy: start_index out of range");
    if (static_cast<int>(continuation.size()) != num_dates)
        throw std::invalid_argument("StoppingPolicy: need one continuation slot per date 0..L-1");
    for (int k = std::max(start_index, 0); k < num_dates; ++k) {
        if (!continuation[k])
            throw std::invalid_argument("StoppingPolicy: missing continuation function");
    }
}

StoppingPolicy make_policy(const EstimatorChain& chain, const PayoffSpec& payoff, int start_index,
                           const PathEnsemble* training_paths) {
    const int L = chain.num_dates();
    StoppingPolicy policy;
    policy.payoff = payoff;
    policy.num_dates = L;
    policy.start_index = start_index;
    policy.discount_per_step = chain.config().discount_per_step;
    policy.training = chain.training();
    policy.continuation.resize(L);
    for (int k = 1; k < L; ++k)
        policy.continuation[k] = [&chain, k](std::span<const double> x) {
            return chain.continuation(k, x);
        };
    if (start_index == 0) {
        // Degenerate date-0 estimate: the sample mean of the date-1 targets
        // (all training paths start at x0, so the regression collapses).
        if (!training_paths)
            throw std::invalid_argument("make_policy: start_index 0 needs the training ensemble");
        if (!chain.training().matches(*training_paths))
            throw std::invalid_argument("make_policy: chain was not built from this ensemble");
        const double disc = chain.config().discount_per_step;
        std::vector<double> y1(training_paths->num_paths());
        for (int m = 0; m < training_paths->num_paths(); ++m) {
            const auto x1 = training_paths->state(m, 1);
            y1[m] = std::max(evaluate(payoff, 1, x1), disc * chain.continuation(1, x1));
        }
        const double c0 = mean(y1);
        policy.continuation[0] = [c0](std::span<const double>) { return c0; };
    }
    policy.validate();
    return policy;
}

int stop_index(const StoppingPolicy& policy, const PathEnsemble& paths, int path) {
    const int L = policy.num_dates;
    for (int k = policy.start_index; k < L; ++k) {
        const auto x = paths.state(path, k);
        if (policy.continuation[k](x) <= evaluate(policy.payoff, k, x)) return k;
    }
    return L;  // C-hat_L = 0 <= f_L always stops
}

LowerBoundEstimate lower_bound_price(const StoppingPolicy& policy, const PathEnsemble& fresh) {
    policy.validate();
    if (static_cast<int>(fresh.grid().times.size()) - 1 != policy.num_dates)
        throw std::invalid_argument("lower_bound_price: ensemble grid does not match the policy");
    if (policy.training.streams_overlap(fresh))
        throw std::invalid_argument(
            "lower_bound_price: pricing paths collide with the training ensemble "
            "(same seed, overlapping streams)");

    const int N = fresh.num_paths();
    const int L = policy.num_dates;
    std::vector<double> disc(L + 1, 1.0);
    for (int k = 1; k <= L; ++k) disc[k] = disc[k - 1] * policy.discount_per_step;

    std::vector<double> pay(N);
    std::vector<int> stops(N);
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t begin, std::size_t end) {
        for (std::size_t n = begin; n < end; ++n) {
            const int k = stop_index(policy, fresh, static_cast<int>(n));
            stops[n] = k;
            pay[n] = disc[k] * evaluate(policy.payoff, k, fresh.state(static_cast<int>(n), k));
        }
    });

    LowerBoundEstimate out;
    out.value = mean(pay);
    out.std_error = standard_error(pay);
    out.stop_counts.assign(L + 1 - policy.start_index, 0);
    for (int n = 0; n < N; ++n) ++out.stop_counts[stops[n] - policy.start_index];
    return out;
}

void RunPlan::validate() const {
    model.validate();
    grid.validate();
    payoff.validate();
    dp.validate();
    if (num_train_paths < 1) throw std::invalid_argument("RunPlan: train_paths must be >= 1");
    if (num_pricing_paths < 1) throw std::invalid_argument("RunPlan: pricing_paths must be >= 1");
    if (x0.size() != static_cast<std::size_t>(model.assets))
        throw std::invalid_argument("RunPlan: x0 dimension mismatch");
    if (start_index < 0 || start_index > grid.num_steps())
        throw std::invalid_argument("RunPlan: start_index out of range");
    if (static_cast<std::uint64_t>(num_train_paths) > kPricingStreamOffset ||
        static_cast<std::uint64_t>(num_pricing_paths) > kPricingStreamOffset)
        throw std::invalid_argument("RunPlan: path counts exceed the stream split");
}

PricingReport replicate(const RunPlan& plan, int replications) {
    plan.validate();
    if (replications < 1) throw std::invalid_argument("replicate: need at least one replication");

    PricingReport report;
    report.num_train_paths = plan.num_train_paths;
    report.num_pricing_paths = plan.num_pricing_paths;
    report.master_seed = plan.master_seed;
    report.runs.reserve(replications);

    for (int r = 0; r < replications; ++r) {
        const std::uint64_t seed = plan.master_seed + static_cast<std::uint64_t>(r) * (1ull << 32);
        const PathEnsemble train =
            simulate_gbm(plan.model, plan.x0, plan.grid, plan.num_train_paths, seed, 0);
        const EstimatorChain chain = backward_induct(train, plan.payoff, plan.dp);
        const TildeEstimate tilde = tilde_price(train, chain, plan.payoff);
        const StoppingPolicy policy =
            make_policy(chain, plan.payoff, plan.start_index, plan.start_index == 0 ? &train : nullptr);
        const PathEnsemble fresh = simulate_gbm(plan.model, plan.x0, plan.grid,
                                                plan.num_pricing_paths, seed, kPricingStreamOffset);
        const LowerBoundEstimate lower = lower_bound_price(policy, fresh);

        Replication run;
        run.v_hat = lower.value;
        run.v_tilde = tilde.value;
        run.se_hat = lower.std_error;
        run.se_tilde = tilde.std_error;
        run.seed = seed;
        report.runs.push_back(run);
    }

    std::vector<double> hats, tildes;
    for (const auto& run : report.runs) {
        hats.push_back(run.v_hat);
        tildes.push_back(run.v_tilde);
    }
    report.v_hat = mean(hats);
    report.v_tilde = mean(tildes);
    if (replications > 1) {
        report.se_hat = standard_error(hats);
        report.se_tilde = standard_error(tildes);
    } else {
        report.se_hat = report.runs[0].se_hat;
        report.se_tilde = report.runs[0].se_tilde;
    }
    return report;
}

}  // namespace bermuda
