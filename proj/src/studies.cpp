#include "bermuda/studies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bermuda/dp.hpp"
#include "bermuda/math.hpp"
#include "bermuda/parallel.hpp"
#include "bermuda/rng.hpp"

namespace bermuda {

std::vector<BandwidthRow> bandwidth_study(const RunPlan& plan, std::span<const double> h_grid,
                                          int replications) {
    if (h_grid.empty()) throw std::invalid_argument("bandwidth_study: empty bandwidth grid");
    for (double h : h_grid)
        if (!(h > 0.0)) throw std::invalid_argument("bandwidth_study: bandwidths must be > 0");

    std::vector<BandwidthRow> rows;
    rows.reserve(h_grid.size() * static_cast<std::size_t>(replications));
    for (double h : h_grid) {
        RunPlan local = plan;
        local.dp.kernel.bandwidth = h;
        const PricingReport report = replicate(local, replications);
        for (int r = 0; r < replications; ++r) {
            const Replication& run = report.runs[r];
            rows.push_back({r, h, run.v_hat, run.v_tilde, run.se_hat, run.se_tilde});
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Alpha = 1 chain

AlphaOneChain make_alpha_one_chain(int margin_states, double margin_max) {
    if (margin_states < 2 || margin_states > 50)
        throw std::invalid_argument("make_alpha_one_chain: margin_states out of range");
    if (!(margin_max > 0.0) || margin_max >= 1.0)
        throw std::invalid_argument("make_alpha_one_chain: margin_max must be in (0, 1)");

    const int n = margin_states;
    AlphaOneChain model;
    model.chain.states.resize(3);
    model.chain.states[0] = {0.0};
    model.chain.states[1].resize(n);
    for (int i = 0; i < n; ++i) model.chain.states[1][i] = i + 1.0;
    // Date-2 states carry the terminal payoff directly: C_1 = 1, sd = 0.5 at
    // every date-1 state.
    model.chain.states[2] = {0.5, 1.5};

    model.chain.transitions.resize(2);
    model.chain.transitions[0].assign(n, 1.0 / n);
    model.chain.transitions[1].assign(static_cast<std::size_t>(n) * 2, 0.5);

    // Linearly spaced margins with uniform visitation: P(0 < |C-f| <= d) ~ d.
    std::vector<double> f1(n);
    model.margins.resize(n);
    model.c1.assign(n, 1.0);
    for (int i = 0; i < n; ++i) {
        const double m = margin_max * (i + 1.0) / n;
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;  // alternate continue/exercise optimal
        model.margins[i] = m;
        f1[i] = 1.0 - sign * m;
    }

    PayoffSpec payoff = PayoffSpec::custom();
    payoff.overrides[0] = [](std::span<const double>) { return 0.0; };
    payoff.overrides[1] = [f1, n](std::span<const double> x) {
        int i = static_cast<int>(std::lround(x[0])) - 1;
        i = std::clamp(i, 0, n - 1);
        return f1[i];
    };
    payoff.overrides[2] = [](std::span<const double> x) { return x[0]; };
    model.payoff = payoff;

    const ChainDpResult dp = exact_chain_dp(model.chain, payoff, 1.0);
    model.v0 = dp.value;
    model.kernel_h = 0.1;
    return model;
}

RateStudyResult rate_study_chain(const AlphaOneChain& model, std::span<const int> m_grid,
                                 int replications, std::uint64_t seed) {
    if (m_grid.empty()) throw std::invalid_argument("rate_study_chain: empty M grid");
    for (std::size_t g = 1; g < m_grid.size(); ++g)
        if (m_grid[g] <= m_grid[g - 1])
            throw std::invalid_argument("rate_study_chain: M grid must be increasing");
    if (replications < 1) throw std::invalid_argument("rate_study_chain: need replications >= 1");

    const int n = static_cast<int>(model.chain.states[1].size());
    DpConfig cfg;
    cfg.degree = 0;
    cfg.kernel = {KernelKind::Triangle, model.kernel_h};
    cfg.discount_per_step = 1.0;
    cfg.truncation = true;

    RateStudyResult out;
    out.v0 = model.v0;
    out.replications = replications;

    std::vector<double> ms, bias_hats, bias_cs;
    for (std::size_t g = 0; g < m_grid.size(); ++g) {
        const int M = m_grid[g];
        std::vector<double> values(replications), sups(replications);
        for (int r = 0; r < replications; ++r) {
            const std::uint64_t rep_seed =
                seed + (static_cast<std::uint64_t>(g) * replications + r + 1) * (1ull << 32);
            const PathEnsemble train = simulate_chain(model.chain, M, rep_seed, 0);
            const EstimatorChain chain = backward_induct(train, model.payoff, cfg);

            std::vector<std::vector<char>> region(2);
            region[0] = {0};  // start_index 1: never stop at t0
            region[1].resize(n);
            double sup = 0.0;
            for (int i = 0; i < n; ++i) {
                const double x = model.chain.states[1][i];
                const double c_hat = chain.continuation(1, {&x, 1});
                sup = std::max(sup, std::abs(c_hat - model.c1[i]));
                const double f = evaluate(model.payoff, 1, {&x, 1});
                region[1][i] = c_hat <= f ? 1 : 0;
            }
            // Exact conditional value of the fitted rule given the training draw.
            values[r] = chain_policy_value(model.chain, model.payoff, 1.0, region);
            sups[r] = sup;
        }
        RateRow row;
        row.num_train_paths = M;
        row.bias_hat = model.v0 - mean(values);
        row.bias_c = mean(sups);
        out.rows.push_back(row);
        ms.push_back(M);
        bias_hats.push_back(row.bias_hat);
        bias_cs.push_back(row.bias_c);
    }

    if (out.rows.size() >= 2) {
        const bool positive = std::all_of(bias_hats.begin(), bias_hats.end(),
                                          [](double b) { return b > 0.0; });
        if (positive) out.slope_bias_hat = log_log_slope(ms, bias_hats);
        out.slope_bias_c = log_log_slope(ms, bias_cs);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Digital two-period model

namespace {

double bs_call_zero_rate(double x, double strike, double sigma, double tau) {
    if (tau <= 0.0) return std::max(x - strike, 0.0);
    const double v = sigma * std::sqrt(tau);
    const double d1 = (std::log(x / strike) + 0.5 * v * v) / v;
    return x * norm_cdf(d1) - strike * norm_cdf(d1 - v);
}

struct DigitalQuad {
    std::vector<double> z;  // standard normal abscissae
    std::vector<double> w;  // Gauss-Legendre weight times normal density
};

// Panels split at the threshold abscissa, where the payoff itself jumps.
DigitalQuad digital_quadrature(const DigitalModel& model, int points_per_side) {
    const double vol = model.sigma * std::sqrt(model.t1);
    const double z_th =
        (std::log(model.threshold / model.spot) + 0.5 * vol * vol) / vol;
    std::vector<double> nodes, weights;
    gauss_legendre(points_per_side, nodes, weights);
    DigitalQuad quad;
    const double z_lo = -10.0, z_hi = 10.0;
    const auto add_panel = [&](double a, double b) {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double z = mid + half * nodes[i];
            quad.z.push_back(z);
            quad.w.push_back(half * weights[i] * norm_pdf(z));
        }
    };
    add_panel(z_lo, z_th);
    add_panel(z_th, z_hi);
    return quad;
}

double digital_state(const DigitalModel& model, double z) {
    const double vol = model.sigma * std::sqrt(model.t1);
    return model.spot * std::exp(-0.5 * vol * vol + vol * z);
}

}  // namespace

double DigitalModel::continuation(double x) const {
    const double tau = t2 - t1;
    return bs_call_zero_rate(x, strike, sigma, tau) - bs_call_zero_rate(x, strike + cap, sigma, tau);
}

DigitalModel make_digital_model(double gap_fraction) {
    if (!(gap_fraction > 0.0) || !(gap_fraction < 1.0))
        throw std::invalid_argument("make_digital_model: gap fraction must be in (0, 1)");
    DigitalModel model;
    model.level = model.continuation(model.threshold);
    model.gap = gap_fraction * model.level;
    model.payoff = PayoffSpec::digital(model.threshold, model.level, model.gap, model.strike,
                                       model.cap, 1, 2);
    const DigitalQuad quad = digital_quadrature(model, 200);
    double v0 = 0.0;
    for (std::size_t i = 0; i < quad.z.size(); ++i) {
        const double x = digital_state(model, quad.z[i]);
        const double f1 = evaluate(model.payoff, 1, {&x, 1});
        v0 += quad.w[i] * std::max(f1, model.continuation(x));
    }
    model.v0 = v0;
    return model;
}

RateStudyResult rate_study_digital(const DigitalModel& model, std::span<const int> m_grid,
                                   int replications, std::uint64_t seed) {
    if (m_grid.empty()) throw std::invalid_argument("rate_study_digital: empty M grid");
    if (replications < 1) throw std::invalid_argument("rate_study_digital: need replications >= 1");

    GbmParams gbm;
    gbm.assets = 1;
    gbm.rate = 0.0;
    gbm.dividend = 0.0;
    gbm.sigma = model.sigma;
    ExerciseGrid grid;
    grid.times = {0.0, model.t1, model.t2};
    const std::vector<double> x0 = {model.spot};

    const DigitalQuad quad = digital_quadrature(model, 200);
    const double scale = model.spot * model.sigma * std::sqrt(model.t1);

    // sup-error grid: log-spaced states within 2.5 standard deviations
    std::vector<double> err_grid;
    {
        const double vol = model.sigma * std::sqrt(model.t1);
        for (int i = 0; i <= 200; ++i) {
            const double z = -2.5 + 5.0 * i / 200.0;
            err_grid.push_back(model.spot * std::exp(vol * z));
        }
    }

    RateStudyResult out;
    out.v0 = model.v0;
    out.replications = replications;

    std::vector<double> ms, bias_hats, bias_cs;
    for (std::size_t g = 0; g < m_grid.size(); ++g) {
        const int M = m_grid[g];
        if (M < 2) throw std::invalid_argument("rate_study_digital: M must be >= 2");
        DpConfig cfg;
        cfg.degree = 0;
        cfg.kernel = {KernelKind::Gaussian, scale * bandwidth_rule(M, 2.0, 0.0, 1)};
        cfg.discount_per_step = 1.0;  // zero rate
        cfg.truncation = false;       // raw Nadaraya-Watson, as in the benchmark protocol

        std::vector<double> values(replications), sups(replications);
        for (int r = 0; r < replications; ++r) {
            const std::uint64_t rep_seed =
                seed + (static_cast<std::uint64_t>(g) * replications + r + 1) * (1ull << 32);
            const PathEnsemble train = simulate_gbm(gbm, x0, grid, M, rep_seed, 0);
            const EstimatorChain chain = backward_induct(train, model.payoff, cfg);

            double sup = 0.0;
            for (double x : err_grid)
                sup = std::max(sup, std::abs(chain.continuation(1, {&x, 1}) - model.continuation(x)));
            sups[r] = sup;

            // Exact conditional value of the fitted rule by quadrature over X(t1).
            std::vector<double> node_values(quad.z.size());
            parallel_for(quad.z.size(), [&](std::size_t begin, std::size_t end) {
                for (std::size_t i = begin; i < end; ++i) {
                    const double x = digital_state(model, quad.z[i]);
                    const double f1 = evaluate(model.payoff, 1, {&x, 1});
                    const double c_hat = chain.continuation(1, {&x, 1});
                    node_values[i] = c_hat <= f1 ? f1 : model.continuation(x);
                }
            });
            double value = 0.0;
            for (std::size_t i = 0; i < quad.z.size(); ++i) value += quad.w[i] * node_values[i];
            values[r] = value;
        }
        RateRow row;
        row.num_train_paths = M;
        row.bias_hat = model.v0 - mean(values);
        row.bias_c = mean(sups);
        out.rows.push_back(row);
        ms.push_back(M);
        bias_hats.push_back(row.bias_hat);
        bias_cs.push_back(row.bias_c);
    }

    if (out.rows.size() >= 2) {
        const bool positive = std::all_of(bias_hats.begin(), bias_hats.end(),
                                          [](double b) { return b > 0.0; });
        if (positive) out.slope_bias_hat = log_log_slope(ms, bias_hats);
        out.slope_bias_c = log_log_slope(ms, bias_cs);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Boundary studies

BoundaryStudy boundary_study_uniform(int samples, std::uint64_t seed,
                                     std::span<const double> delta_grid) {
    if (samples < 1000) throw std::invalid_argument("boundary_study: need >= 1000 samples");
    std::vector<double> margins(samples);
    Rng rng(seed, 0);
    for (int i = 0; i < samples; ++i) margins[i] = rng.next_uniform();
    BoundaryStudy out;
    out.samples = samples;
    out.fit = boundary_alpha_fit(margins, delta_grid);
    return out;
}

BoundaryStudy boundary_study_power_put(const PowerPutParams& params, int samples,
                                       std::uint64_t seed, std::span<const double> delta_grid) {
    if (samples < 1000) throw std::invalid_argument("boundary_study: need >= 1000 samples");
    // States drawn by one Black-Scholes step from a uniform start on (0, K/2]:
    // the induced density is bounded and positive near zero, where the margin
    // scales like x^(1/alpha).
    const double vol = params.sigma * std::sqrt(params.delta_t);
    std::vector<double> margins(samples);
    parallel_for(static_cast<std::size_t>(samples), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng(seed, i);
            const double start = rng.next_uniform() * 0.5 * params.strike;
            const double x = start * std::exp(-0.5 * vol * vol + vol * rng.next_normal());
            margins[i] = std::abs(power_put_c0(params, x) - power_put_payoff(params, x));
        }
    });
    BoundaryStudy out;
    out.samples = samples;
    out.fit = boundary_alpha_fit(margins, delta_grid);
    return out;
}

BoundaryStudy boundary_study_digital(const DigitalModel& model, int samples, std::uint64_t seed,
                                     std::span<const double> delta_grid) {
    if (samples < 1000) throw std::invalid_argument("boundary_study: need >= 1000 samples");
    const double vol = model.sigma * std::sqrt(model.t1);
    std::vector<double> margins(samples);
    parallel_for(static_cast<std::size_t>(samples), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng(seed, i);
            const double x = model.spot * std::exp(-0.5 * vol * vol + vol * rng.next_normal());
            const double f1 = evaluate(model.payoff, 1, {&x, 1});
            margins[i] = std::abs(model.continuation(x) - f1);
        }
    });
    BoundaryStudy out;
    out.samples = samples;
    out.fit = boundary_alpha_fit(margins, delta_grid);
    return out;
}

std::vector<double> default_delta_grid(double lo, double hi, int points) {
    if (!(lo > 0.0) || !(hi > lo) || points < 2)
        throw std::invalid_argument("default_delta_grid: bad range");
    std::vector<double> grid(points);
    const double step = std::log(hi / lo) / (points - 1);
    for (int i = 0; i < points; ++i) grid[i] = lo * std::exp(step * i);
    return grid;
}

}  // namespace bermuda
