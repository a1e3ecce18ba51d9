#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "bermuda/math.hpp"
#include "bermuda/oracles.hpp"
#include "bermuda/parallel.hpp"
#include "bermuda/pricing.hpp"
#include "bermuda/rng.hpp"
#include "bermuda/studies.hpp"

using namespace bermuda;

TEST_SUITE_BEGIN("pricing");

namespace {

GbmParams benchmark_model() {
    GbmParams params;
    params.assets = 2;
    params.rate = 0.05;
    params.dividend = 0.10;
    params.sigma = 0.2;
    return params;
}

RunPlan small_benchmark_plan(int train, int fresh, std::uint64_t seed) {
    RunPlan plan;
    plan.model = benchmark_model();
    plan.x0 = {90.0, 90.0};
    plan.grid = ExerciseGrid::uniform(0.0, 3.0, 9);
    plan.payoff = PayoffSpec::max_call(100.0);
    plan.dp.degree = 0;
    plan.dp.kernel = {KernelKind::Triangle, 90.0};
    plan.dp.discount_per_step = std::exp(-0.05 * 3.0 / 9.0);
    plan.dp.truncation = false;
    plan.num_train_paths = train;
    plan.num_pricing_paths = fresh;
    plan.master_seed = seed;
    return plan;
}

}  // namespace

TEST_CASE("zero payoff stops immediately and prices to zero") {
    const auto grid = ExerciseGrid::uniform(0.0, 1.0, 3);
    GbmParams model;
    model.sigma = 0.3;
    const auto train = simulate_gbm(model, {1.0}, grid, 200, 3, 0);
    const auto payoff = PayoffSpec::custom();  // identically zero
    DpConfig cfg;
    cfg.kernel = {KernelKind::Triangle, 0.3};
    const auto chain = backward_induct(train, payoff, cfg);
    const auto policy = make_policy(chain, payoff, 1);
    const auto fresh = simulate_gbm(model, {1.0}, grid, 500, 3, kPricingStreamOffset);
    for (int n = 0; n < 20; ++n) CHECK(stop_index(policy, fresh, n) == 1);
    const auto lb = lower_bound_price(policy, fresh);
    CHECK(lb.value == 0.0);
    CHECK(lb.std_error == 0.0);
}

TEST_CASE("payoff above the clipping ceiling stops at the first date") {
    const auto grid = ExerciseGrid::uniform(0.0, 1.0, 4);
    GbmParams model;
    model.sigma = 0.3;
    const auto train = simulate_gbm(model, {1.0}, grid, 300, 5, 0);
    PayoffSpec big = PayoffSpec::custom();
    for (int k = 0; k <= 4; ++k)
        big.overrides[k] = [](std::span<const double>) { return 50.0; };
    DpConfig cfg;
    cfg.kernel = {KernelKind::Triangle, 0.3};
    cfg.truncation = true;
    cfg.c_max = 5.0;  // truncated estimates can never reach the payoff
    const auto chain = backward_induct(train, big, cfg);
    const auto policy = make_policy(chain, big, 1);
    const auto fresh = simulate_gbm(model, {1.0}, grid, 100, 5, kPricingStreamOffset);
    for (int n = 0; n < 100; ++n) CHECK(stop_index(policy, fresh, n) == 1);
}

TEST_CASE("policy from exact continuation values attains the chain optimum") {
    // random small chains: the exact-continuation rule must reproduce the
    // optimal exercise region and its value
    Rng rng_seed(2024, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n1 = 2 + trial % 4, n2 = 2 + (trial * 7) % 4;
        ChainModel model;
        model.states.resize(3);
        model.states[0] = {1.0};
        for (int i = 0; i < n1; ++i) model.states[1].push_back(2.0 + i);
        for (int j = 0; j < n2; ++j) model.states[2].push_back(2.0 + j);
        Rng rng(900 + trial, 0);
        const auto random_row = [&rng](int cols) {
            std::vector<double> row(cols);
            double sum = 0.0;
            for (auto& p : row) {
                p = 0.05 + rng.next_uniform();
                sum += p;
            }
            for (auto& p : row) p /= sum;
            return row;
        };
        model.transitions.resize(2);
        model.transitions[0] = random_row(n1);
        for (int i = 0; i < n1; ++i) {
            const auto row = random_row(n2);
            model.transitions[1].insert(model.transitions[1].end(), row.begin(), row.end());
        }
        PayoffSpec payoff = PayoffSpec::custom();
        std::vector<std::vector<double>> f(3);
        for (int k = 0; k <= 2; ++k) {
            f[k].resize(model.states[k].size());
            for (auto& v : f[k]) v = 2.0 * rng.next_uniform();
        }
        for (int k = 0; k <= 2; ++k) {
            payoff.overrides[k] = [&model, &f, k](std::span<const double> x) {
                for (std::size_t i = 0; i < model.states[k].size(); ++i)
                    if (model.states[k][i] == x[0]) return f[k][i];
                return 0.0;
            };
        }
        const auto dp = exact_chain_dp(model, payoff, 1.0);
        CHECK(chain_policy_value(model, payoff, 1.0, dp.exercise) ==
              doctest::Approx(dp.value).epsilon(1e-12));
    }
    (void)rng_seed;
}

TEST_CASE("forced terminal exercise matches the quadrature oracle") {
    // European-only rule via start_index = L; oracle: 2-D Gauss-Hermite
    const auto grid = ExerciseGrid::uniform(0.0, 3.0, 9);
    const int N = 100000;
    StoppingPolicy policy;
    policy.payoff = PayoffSpec::max_call(100.0);
    policy.num_dates = 9;
    policy.start_index = 9;
    policy.discount_per_step = std::exp(-0.05 * 3.0 / 9.0);
    policy.continuation.resize(9);
    policy.training.seed = 1;  // pricing ensemble uses a different seed

    const auto fresh = simulate_gbm(benchmark_model(), {90.0, 90.0}, grid, N, 555, 0);
    const auto lb = lower_bound_price(policy, fresh);

    std::vector<double> nodes, weights;
    gauss_hermite(64, nodes, weights);
    const double t = 3.0, r = 0.05, q = 0.10, sigma = 0.2;
    const double drift = (r - q - 0.5 * sigma * sigma) * t, vol = sigma * std::sqrt(t);
    double expectation = 0.0;
    const double inv_pi = 1.0 / 3.14159265358979323846;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double x1 = 90.0 * std::exp(drift + vol * std::sqrt(2.0) * nodes[i]);
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const double x2 = 90.0 * std::exp(drift + vol * std::sqrt(2.0) * nodes[j]);
            expectation +=
                weights[i] * weights[j] * std::max(std::max(x1, x2) - 100.0, 0.0);
        }
    }
    expectation *= inv_pi;
    const double oracle = std::exp(-r * t) * expectation;
    CHECK(std::abs(lb.value - oracle) < 3.0 * lb.std_error);
}

TEST_CASE("pricing paths must not collide with training streams") {
    const auto grid = ExerciseGrid::uniform(0.0, 1.0, 3);
    GbmParams model;
    model.sigma = 0.3;
    const auto train = simulate_gbm(model, {1.0}, grid, 200, 9, 0);
    const auto payoff = PayoffSpec::vanilla_put(1.1);
    DpConfig cfg;
    cfg.kernel = {KernelKind::Triangle, 0.3};
    const auto chain = backward_induct(train, payoff, cfg);
    const auto policy = make_policy(chain, payoff, 1);

    const auto colliding = simulate_gbm(model, {1.0}, grid, 300, 9, 100);  // overlaps [0, 200)
    CHECK_THROWS_AS(lower_bound_price(policy, colliding), std::invalid_argument);

    const auto disjoint = simulate_gbm(model, {1.0}, grid, 300, 9, kPricingStreamOffset);
    CHECK_NOTHROW(lower_bound_price(policy, disjoint));
}

TEST_CASE("scaling payoff and continuation together leaves stops unchanged") {
    const auto grid = ExerciseGrid::uniform(0.0, 1.0, 4);
    GbmParams model;
    model.sigma = 0.25;
    const auto fresh = simulate_gbm(model, {1.0}, grid, 400, 77, 0);

    const double lambda = 3.7;
    const auto cont = [](std::span<const double> x) { return 1.1 - 0.4 * x[0]; };
    StoppingPolicy base, scaled;
    for (auto* p : {&base, &scaled}) {
        p->num_dates = 4;
        p->start_index = 1;
        p->discount_per_step = 1.0;
        p->continuation.resize(4);
        p->training.seed = 1;
    }
    base.payoff = PayoffSpec::vanilla_put(1.0);
    scaled.payoff = PayoffSpec::custom();
    for (int k = 0; k <= 4; ++k)
        scaled.payoff.overrides[k] = [lambda](std::span<const double> x) {
            return lambda * std::max(1.0 - x[0], 0.0);
        };
    for (int k = 1; k < 4; ++k) {
        base.continuation[k] = cont;
        scaled.continuation[k] = [cont, lambda](std::span<const double> x) {
            return lambda * cont(x);
        };
    }
    for (int n = 0; n < 400; ++n)
        CHECK(stop_index(base, fresh, n) == stop_index(scaled, fresh, n));
}

TEST_CASE("stops always land between start index and L") {
    auto plan = small_benchmark_plan(300, 300, 99);
    const auto train = simulate_gbm(plan.model, plan.x0, plan.grid, 300, 99, 0);
    const auto chain = backward_induct(train, plan.payoff, plan.dp);
    const auto policy = make_policy(chain, plan.payoff, 1);
    const auto fresh =
        simulate_gbm(plan.model, plan.x0, plan.grid, 300, 99, kPricingStreamOffset);
    const auto lb = lower_bound_price(policy, fresh);
    int total = 0;
    for (int count : lb.stop_counts) total += count;
    CHECK(total == 300);
    for (int n = 0; n < 300; ++n) {
        const int k = stop_index(policy, fresh, n);
        CHECK(k >= 1);
        CHECK(k <= 9);
    }
}

TEST_CASE("lower bias against the exact chain value") {
    const auto model = make_alpha_one_chain();
    const std::vector<int> m_grid{256};
    const auto result = rate_study_chain(model, m_grid, 40, 12345);
    // each replication value is an exact policy value, so dominance is exact
    CHECK(result.rows[0].bias_hat >= 0.0);
}

TEST_CASE("training and pricing payoffs are uncorrelated") {
    const auto plan = small_benchmark_plan(4000, 4000, 2711);
    const auto train = simulate_gbm(plan.model, plan.x0, plan.grid, 4000, 2711, 0);
    const auto fresh =
        simulate_gbm(plan.model, plan.x0, plan.grid, 4000, 2711, kPricingStreamOffset);
    std::vector<double> a(4000), b(4000);
    for (int m = 0; m < 4000; ++m) {
        a[m] = evaluate(plan.payoff, 9, train.state(m, 9));
        b[m] = evaluate(plan.payoff, 9, fresh.state(m, 9));
    }
    const double ma = mean(a), mb = mean(b);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (int m = 0; m < 4000; ++m) {
        cov += (a[m] - ma) * (b[m] - mb);
        va += (a[m] - ma) * (a[m] - ma);
        vb += (b[m] - mb) * (b[m] - mb);
    }
    const double corr = cov / std::sqrt(va * vb);
    CHECK(std::abs(corr) < 4.0 / std::sqrt(4000.0));
}

TEST_CASE("replicate with R = 1 equals the single run") {
    auto plan = small_benchmark_plan(400, 400, 31);
    const auto report = replicate(plan, 1);
    CHECK(report.runs.size() == 1);
    CHECK(report.v_hat == report.runs[0].v_hat);
    CHECK(report.v_tilde == report.runs[0].v_tilde);
    CHECK(report.se_hat == report.runs[0].se_hat);
}

TEST_CASE("replicate is bit-identical across thread counts") {
    auto plan = small_benchmark_plan(400, 400, 64);
    set_max_threads(1);
    const auto a = replicate(plan, 3);
    set_max_threads(4);
    const auto b = replicate(plan, 3);
    set_max_threads(1);
    REQUIRE(a.runs.size() == b.runs.size());
    for (std::size_t r = 0; r < a.runs.size(); ++r) {
        CHECK(a.runs[r].v_hat == b.runs[r].v_hat);
        CHECK(a.runs[r].v_tilde == b.runs[r].v_tilde);
        CHECK(a.runs[r].se_hat == b.runs[r].se_hat);
        CHECK(a.runs[r].se_tilde == b.runs[r].se_tilde);
    }
}

TEST_SUITE_END();
