// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
//
//   1 benchmark reproduction   two-asset max call vs binomial lattice
//   2 stability ordering       V-hat spread vs V-tilde spread across h
//   3 rate amplification       chain with alpha = 1 margin law
//   4 exponential regime       digital two-period model with a margin gap
//   5 local polynomial exactness
//   6 chain oracle equivalence
//   7 power-put closed form
//   8 determinism across thread counts

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "bermuda/config.hpp"
#include "bermuda/io.hpp"
#include "bermuda/math.hpp"
#include "bermuda/oracles.hpp"
#include "bermuda/parallel.hpp"
#include "bermuda/pricing.hpp"
#include "bermuda/rng.hpp"
#include "bermuda/studies.hpp"

using namespace bermuda;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "FAILED: " : "; ") + what;
        }
    }
    void note(const std::string& text) {
        if (pass && !text.empty()) detail += (detail.empty() ? "" : "; ") + text;
    }
};

std::string fmt(double x, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
    return buf;
}

RunPlan benchmark_plan() {
    RunPlan plan;
    plan.model.assets = 2;
    plan.model.rate = 0.05;
    plan.model.dividend = 0.10;
    plan.model.sigma = 0.2;
    plan.x0 = {90.0, 90.0};
    plan.grid = ExerciseGrid::uniform(0.0, 3.0, 9);
    plan.payoff = PayoffSpec::max_call(100.0);
    plan.dp.degree = 0;
    plan.dp.kernel = {KernelKind::Triangle, 90.0};
    plan.dp.discount_per_step = std::exp(-0.05 * 3.0 / 9.0);
    plan.dp.truncation = false;  // the benchmark protocol uses the raw estimator
    plan.num_train_paths = 4000;
    plan.num_pricing_paths = 4000;
    plan.start_index = 1;
    plan.master_seed = 20260808;
    return plan;
}

struct HSummary {
    double mean_hat = 0.0, se_hat = 0.0;
    double mean_tilde = 0.0, se_tilde = 0.0;
};

std::map<double, HSummary> summarize(const std::vector<BandwidthRow>& rows) {
    std::map<double, std::vector<double>> hats, tildes;
    for (const auto& row : rows) {
        hats[row.h].push_back(row.v_hat);
        tildes[row.h].push_back(row.v_tilde);
    }
    std::map<double, HSummary> out;
    for (const auto& [h, v] : hats) {
        HSummary s;
        s.mean_hat = mean(v);
        s.se_hat = standard_error(v);
        s.mean_tilde = mean(tildes[h]);
        s.se_tilde = standard_error(tildes[h]);
        out[h] = s;
    }
    return out;
}

// Criteria 1 and 2 share one bandwidth study over the union grid.
void criteria_benchmark(Outcome& c1, Outcome& c2) {
    const std::vector<double> h_grid{20, 40, 60, 80, 90, 100, 120};
    const auto rows = bandwidth_study(benchmark_plan(), h_grid, 20);
    const auto by_h = summarize(rows);

    // -- criterion 1: band and lower-bias cap at h in {60, 90, 120}
    std::string detail;
    for (double h : {60.0, 90.0, 120.0}) {
        const HSummary& s = by_h.at(h);
        c1.require(s.mean_hat >= 7.3 && s.mean_hat <= 8.14,
                   "mean V-hat(" + fmt(h, 0) + ")=" + fmt(s.mean_hat) + " outside [7.3, 8.14]");
        c1.require(s.mean_hat <= 8.08 + 3.0 * s.se_hat,
                   "mean V-hat(" + fmt(h, 0) + ")=" + fmt(s.mean_hat) + " above 8.08 + 3 se");
        detail += " Vhat(" + fmt(h, 0) + ")=" + fmt(s.mean_hat);
    }
    LatticeParams lattice;
    lattice.model = benchmark_plan().model;
    lattice.x0 = {90.0, 90.0};
    lattice.grid = benchmark_plan().grid;
    lattice.strike = 100.0;
    lattice.steps_per_interval = 300;
    const double reference = lattice_max_call_2d(lattice);
    c1.require(std::abs(reference - 8.08) <= 0.02,
               "lattice(300)=" + fmt(reference) + " outside 8.08 +/- 0.02");
    c1.note("lattice(300)=" + fmt(reference) + detail);

    // -- criterion 2: spread ordering and upward deterioration at h = 120
    const std::vector<double> grid6{20, 40, 60, 80, 100, 120};
    double hat_lo = 1e300, hat_hi = -1e300, tilde_lo = 1e300, tilde_hi = -1e300;
    for (double h : grid6) {
        const HSummary& s = by_h.at(h);
        hat_lo = std::min(hat_lo, s.mean_hat);
        hat_hi = std::max(hat_hi, s.mean_hat);
        tilde_lo = std::min(tilde_lo, s.mean_tilde);
        tilde_hi = std::max(tilde_hi, s.mean_tilde);
        // lower-bias property: V-hat never exceeds the reference at any h
        c2.require(s.mean_hat <= 8.08 + 3.0 * s.se_hat,
                   "mean V-hat(" + fmt(h, 0) + ")=" + fmt(s.mean_hat) + " above 8.08 + 3 se");
    }
    const double spread_hat = hat_hi - hat_lo, spread_tilde = tilde_hi - tilde_lo;
    c2.require(spread_hat < spread_tilde,
               "V-hat spread " + fmt(spread_hat) + " not below V-tilde spread " + fmt(spread_tilde));
    const HSummary& s120 = by_h.at(120.0);
    c2.require(s120.mean_tilde > 8.08 + 3.0 * s120.se_tilde,
               "V-tilde(120)=" + fmt(s120.mean_tilde) + " does not deteriorate above 8.08");
    c2.require(!(s120.mean_hat > 8.08 + 3.0 * s120.se_hat),
               "V-hat(120)=" + fmt(s120.mean_hat) + " exceeds 8.08 + 3 se");
    c2.note("spread V-hat=" + fmt(spread_hat) + " V-tilde=" + fmt(spread_tilde) +
            " V-tilde(120)=" + fmt(s120.mean_tilde));
}

void criterion_rate_amplification(Outcome& out) {
    const auto model = make_alpha_one_chain();
    const std::vector<int> m_grid{512, 1024, 2048, 4096, 8192, 16384};
    const auto result = rate_study_chain(model, m_grid, 200, 771);
    for (const auto& row : result.rows)
        out.require(row.bias_hat > 0.0,
                    "bias at M=" + std::to_string(row.num_train_paths) + " not positive");
    if (out.pass) {
        out.require(result.slope_bias_hat <= result.slope_bias_c - 0.25,
                    "slope(V-hat bias)=" + fmt(result.slope_bias_hat) +
                        " vs slope(C-hat error)=" + fmt(result.slope_bias_c));
        out.note("slope(V-hat bias)=" + fmt(result.slope_bias_hat) +
                 " slope(C-hat error)=" + fmt(result.slope_bias_c));
    }
}

void criterion_exponential_regime(Outcome& out) {
    const auto model = make_digital_model(0.5);
    const std::vector<int> m_grid{4096};
    const auto result = rate_study_digital(model, m_grid, 32, 8181);
    const RateRow& row = result.rows[0];
    out.require(row.bias_hat < 1e-3 * model.v0,
                "bias " + fmt(row.bias_hat, 6) + " not below 1e-3 V0 = " + fmt(1e-3 * model.v0, 6));
    out.require(row.bias_c > 10.0 * row.bias_hat,
                "sup error " + fmt(row.bias_c, 6) + " not above 10x bias");
    out.note("V0=" + fmt(model.v0) + " bias=" + fmt(row.bias_hat, 8) +
             " supC1err=" + fmt(row.bias_c, 4));
}

void criterion_localpoly(Outcome& out) {
    Rng rng(55, 0);
    // polynomial reproduction in 1-D up to degree 3
    for (int degree : {1, 2, 3}) {
        const int M = 600;
        std::vector<double> coef(degree + 1), xs(M), ys(M);
        for (auto& c : coef) c = 2.0 * rng.next_uniform() - 1.0;
        for (int m = 0; m < M; ++m) {
            xs[m] = 2.0 * rng.next_uniform() - 1.0;
            double p = 0.0;
            for (int k = degree; k >= 0; --k) p = p * xs[m] + coef[k];
            ys[m] = p;
        }
        const ContinuationEstimator est(xs, ys, MonomialBasis::build(1, degree),
                                        {KernelKind::Triangle, 0.8}, 100.0, 0.0);
        for (double q : {-0.5, 0.0, 0.3, 0.6}) {
            double expected = 0.0;
            for (int k = degree; k >= 0; --k) expected = expected * q + coef[k];
            const double got = est.fit_eval({&q, 1}).first;
            out.require(std::abs(got - expected) <= 1e-8 * (1.0 + std::abs(expected)),
                        "degree-" + std::to_string(degree) + " reproduction error " +
                            fmt(std::abs(got - expected), 12));
        }
    }
    // 2-D degree-2 reproduction
    {
        const int M = 900;
        std::vector<double> xs(2 * M), ys(M);
        const auto poly = [](double a, double b) {
            return 0.4 - 0.6 * a + 0.3 * b + 0.25 * a * a - 0.5 * a * b + 0.15 * b * b;
        };
        for (int m = 0; m < M; ++m) {
            xs[2 * m] = 2.0 * rng.next_uniform() - 1.0;
            xs[2 * m + 1] = 2.0 * rng.next_uniform() - 1.0;
            ys[m] = poly(xs[2 * m], xs[2 * m + 1]);
        }
        const ContinuationEstimator est(xs, ys, MonomialBasis::build(2, 2),
                                        {KernelKind::Gaussian, 0.6}, 100.0, 0.0);
        const std::vector<double> q{0.15, -0.25};
        const double got = est.fit_eval(q).first;
        const double expected = poly(q[0], q[1]);
        out.require(std::abs(got - expected) <= 1e-8 * (1.0 + std::abs(expected)),
                    "2-D reproduction error " + fmt(std::abs(got - expected), 12));
    }
    // Nadaraya-Watson equivalence at degree 0
    {
        const int M = 300;
        std::vector<double> xs(M), ys(M);
        for (int m = 0; m < M; ++m) {
            xs[m] = rng.next_normal();
            ys[m] = rng.next_normal() + 1.0;
        }
        const KernelSpec kernel{KernelKind::Triangle, 1.1};
        const ContinuationEstimator est(xs, ys, MonomialBasis::build(1, 0), kernel, 100.0, 0.0);
        for (int i = 0; i < 25; ++i) {
            const double q = rng.next_normal();
            double wsum = 0.0, wy = 0.0;
            for (int m = 0; m < M; ++m) {
                const double z = (xs[m] - q) / kernel.bandwidth;
                const double w = kernel.density({&z, 1});
                wsum += w;
                wy += w * ys[m];
            }
            if (wsum <= 0.0) continue;
            const double nw = wy / wsum;
            const double got = est.raw_eval({&q, 1});
            out.require(std::abs(got - nw) <= 1e-12 * (1.0 + std::abs(nw)),
                        "NW equivalence error " + fmt(std::abs(got - nw), 16));
        }
    }
    // gamma symmetry / positive semidefiniteness and response linearity
    {
        const int M = 200;
        std::vector<double> xs(2 * M), ya(M), yb(M), yab(M);
        for (int m = 0; m < M; ++m) {
            xs[2 * m] = 2.0 * rng.next_normal();
            xs[2 * m + 1] = 2.0 * rng.next_normal();
            ya[m] = rng.next_normal();
            yb[m] = rng.next_uniform();
            yab[m] = ya[m] + yb[m];
        }
        const MonomialBasis basis = MonomialBasis::build(2, 2);
        const KernelSpec kernel{KernelKind::Triangle, 1.8};
        for (int i = 0; i < 20; ++i) {
            const std::vector<double> q{rng.next_normal(), rng.next_normal()};
            const auto design = build_design(xs, ya, q, basis, kernel);
            out.require((design.gamma - design.gamma.transpose()).norm() == 0.0,
                        "gamma not symmetric");
            out.require(design.diagnostics.lambda_min >= -1e-10,
                        "lambda_min " + fmt(design.diagnostics.lambda_min, 14) + " below -1e-10");
        }
        const ContinuationEstimator ea(xs, ya, basis, kernel, 100.0, 0.0);
        const ContinuationEstimator eb(xs, yb, basis, kernel, 100.0, 0.0);
        const ContinuationEstimator eab(xs, yab, basis, kernel, 100.0, 0.0);
        for (int i = 0; i < 20; ++i) {
            const std::vector<double> q{0.5 * rng.next_normal(), 0.5 * rng.next_normal()};
            const double sum = ea.raw_eval(q) + eb.raw_eval(q);
            const double joint = eab.raw_eval(q);
            out.require(std::abs(joint - sum) <= 1e-10 * (1.0 + std::abs(sum)),
                        "superposition error " + fmt(std::abs(joint - sum), 14));
        }
    }
    out.note("reproduction/NW/PSD/superposition all within stated tolerances");
}

void criterion_chain_oracle(Outcome& out) {
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Rng rng(31000 + trial, 0);
        const int L = 2 + static_cast<int>(rng.next_uniform() * 4.999);  // 2..6 dates
        ChainModel model;
        model.states.resize(L + 1);
        model.states[0] = {0.0};
        for (int k = 1; k <= L; ++k) {
            const int n = 2 + static_cast<int>(rng.next_uniform() * 3.999);  // 2..5 states
            for (int i = 0; i < n; ++i) model.states[k].push_back(i + 1.0);
        }
        model.transitions.resize(L);
        for (int k = 0; k < L; ++k) {
            const int rows = model.num_states(k), cols = model.num_states(k + 1);
            for (int i = 0; i < rows; ++i) {
                std::vector<double> row(cols);
                double sum = 0.0;
                for (auto& p : row) {
                    p = 0.05 + rng.next_uniform();
                    sum += p;
                }
                for (auto& p : row) model.transitions[k].push_back(p / sum);
            }
        }
        PayoffSpec payoff = PayoffSpec::custom();
        std::vector<std::vector<double>> f(L + 1);
        for (int k = 0; k <= L; ++k) {
            f[k].resize(model.states[k].size());
            for (auto& v : f[k]) v = 3.0 * rng.next_uniform();
        }
        for (int k = 0; k <= L; ++k)
            payoff.overrides[k] = [&f, k](std::span<const double> x) {
                if (k == 0) return f[0][0];
                const int i = std::max(static_cast<int>(std::lround(x[0])) - 1, 0);
                return f[k][static_cast<std::size_t>(i)];
            };

        const auto dp = exact_chain_dp(model, payoff, 1.0);
        const double enumerated = enumerate_stopping_value(model, payoff, 1.0);
        out.require(std::abs(dp.value - enumerated) <= 1e-12 * (1.0 + std::abs(dp.value)),
                    "instance " + std::to_string(trial) + ": dp " + fmt(dp.value, 12) +
                        " vs enumeration " + fmt(enumerated, 12));
        const double policy = chain_policy_value(model, payoff, 1.0, dp.exercise);
        out.require(std::abs(policy - dp.value) <= 1e-12 * (1.0 + std::abs(dp.value)),
                    "instance " + std::to_string(trial) + ": induced policy misses the optimum");
        ++checked;
    }
    out.note(std::to_string(checked) + " random instances checked");
}

void criterion_power_put(Outcome& out) {
    // closed form vs 1e6-draw Monte Carlo across 20 (alpha, x) pairs
    const std::vector<double> alphas{0.5, 1.0, 1.5, 2.0, 3.0};
    const std::vector<double> spots{4.0, 8.0, 10.0, 14.0};
    int pair_index = 0;
    for (double alpha : alphas) {
        for (double x : spots) {
            PowerPutParams params{10.0, alpha, 0.5, 0.5};
            const int n = 1000000;
            const double vol = params.sigma * std::sqrt(params.delta_t);
            Rng rng(1700 + pair_index, 0);
            double sum = 0.0, sumsq = 0.0;
            for (int i = 0; i < n; ++i) {
                const double x1 = x * std::exp(-0.5 * vol * vol + vol * rng.next_normal());
                const double p = power_put_payoff(params, x1);
                sum += p;
                sumsq += p * p;
            }
            const double mc = sum / n;
            const double se = std::sqrt(std::max(sumsq / n - mc * mc, 0.0) / n);
            const double closed = power_put_c0(params, x);
            out.require(std::abs(mc - closed) <= 4.0 * se,
                        "alpha=" + fmt(alpha, 1) + " x=" + fmt(x, 0) + ": |MC-closed|=" +
                            fmt(std::abs(mc - closed), 6) + " > 4se=" + fmt(4.0 * se, 6));
            ++pair_index;
        }
    }
    // alpha = 1 equals the zero-rate Black-Scholes put
    for (double x : {2.0, 6.0, 10.0, 15.0, 25.0}) {
        PowerPutParams params{10.0, 1.0, 0.5, 0.5};
        const double vol = 0.5 * std::sqrt(0.5);
        const double d1 = (std::log(x / 10.0) + 0.5 * vol * vol) / vol;
        const double d2 = d1 - vol;
        const double bs = 10.0 * norm_cdf(-d2) - x * norm_cdf(-d1);
        out.require(std::abs(power_put_c0(params, x) - bs) <= 1e-12 * (1.0 + bs),
                    "alpha=1 mismatch with Black-Scholes at x=" + fmt(x, 0));
    }
    // boundary exponent recovery for alpha = 2
    PowerPutParams params{10.0, 2.0, 0.5, 0.5};
    const auto grid = default_delta_grid(1.5e-3, 3e-2, 12);
    const auto study = boundary_study_power_put(params, 100000, 4242, grid);
    out.require(!study.fit.infinite && study.fit.alpha_hat >= 1.6 && study.fit.alpha_hat <= 2.4,
                "alpha_hat=" + fmt(study.fit.alpha_hat) + " outside [1.6, 2.4]");
    out.note("20 MC pairs within 4 se; alpha_hat=" + fmt(study.fit.alpha_hat));
}

void criterion_determinism(Outcome& out) {
    const auto run_all = [&]() {
        std::vector<double> values;

        RunPlan plan = benchmark_plan();
        plan.num_train_paths = 400;
        plan.num_pricing_paths = 400;
        const auto report = replicate(plan, 2);
        for (const auto& run : report.runs) {
            values.push_back(run.v_hat);
            values.push_back(run.v_tilde);
            values.push_back(run.se_hat);
            values.push_back(run.se_tilde);
        }

        const auto rows = bandwidth_study(plan, std::vector<double>{40.0, 80.0}, 2);
        for (const auto& row : rows) {
            values.push_back(row.v_hat);
            values.push_back(row.v_tilde);
        }

        const auto chain_result =
            rate_study_chain(make_alpha_one_chain(), std::vector<int>{512, 1024}, 3, 99);
        for (const auto& row : chain_result.rows) {
            values.push_back(row.bias_hat);
            values.push_back(row.bias_c);
        }

        const auto digital_result =
            rate_study_digital(make_digital_model(0.5), std::vector<int>{512}, 2, 7);
        values.push_back(digital_result.rows[0].bias_hat);
        values.push_back(digital_result.rows[0].bias_c);

        LatticeParams lattice;
        lattice.model = plan.model;
        lattice.x0 = {90.0, 90.0};
        lattice.grid = plan.grid;
        lattice.strike = 100.0;
        lattice.steps_per_interval = 20;
        values.push_back(lattice_max_call_2d(lattice));

        PowerPutParams pp{10.0, 2.0, 0.5, 0.5};
        const auto boundary =
            boundary_study_power_put(pp, 20000, 11, default_delta_grid(1e-3, 0.1, 8));
        values.push_back(boundary.fit.alpha_hat);

        return values;
    };

    set_max_threads(1);
    const auto single = run_all();
    set_max_threads(4);
    const auto threaded = run_all();
    set_max_threads(1);

    out.require(single.size() == threaded.size(), "result count differs");
    for (std::size_t i = 0; i < single.size() && out.pass; ++i) {
        if (format_double(single[i]) != format_double(threaded[i])) {
            out.require(false, "value " + std::to_string(i) + " differs: " +
                                   format_double(single[i]) + " vs " +
                                   format_double(threaded[i]));
        }
    }
    out.note(std::to_string(single.size()) + " pipeline values byte-identical at 1 and 4 threads");
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
    }

    std::vector<std::pair<std::string, Outcome>> results(8);
    results[0].first = "benchmark reproduction";
    results[1].first = "stability ordering";
    results[2].first = "rate amplification";
    results[3].first = "exponential regime";
    results[4].first = "local polynomial exactness";
    results[5].first = "chain oracle equivalence";
    results[6].first = "power-put closed form";
    results[7].first = "determinism";

    const auto enabled = [only](int id) { return only == 0 || only == id; };

    if (enabled(1) || enabled(2)) criteria_benchmark(results[0].second, results[1].second);
    if (enabled(3)) criterion_rate_amplification(results[2].second);
    if (enabled(4)) criterion_exponential_regime(results[3].second);
    if (enabled(5)) criterion_localpoly(results[4].second);
    if (enabled(6)) criterion_chain_oracle(results[5].second);
    if (enabled(7)) criterion_power_put(results[6].second);
    if (enabled(8)) criterion_determinism(results[7].second);

    bool all_pass = true;
    for (int i = 0; i < 8; ++i) {
        if (!enabled(i + 1)) continue;
        const auto& [name, outcome] = results[i];
        std::printf("[%d] %-28s %s  %s\n", i + 1, name.c_str(),
                    outcome.pass ? "PASS" : "FAIL", outcome.detail.c_str());
        all_pass = all_pass && outcome.pass;
    }
    std::printf("acceptance: %s\n", all_pass ? "all criteria passed" : "FAILURES PRESENT");
    return all_pass ? 0 : 1;
}
