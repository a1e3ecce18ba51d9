#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bermuda/oracles.hpp"
#include "bermuda/pricing.hpp"

namespace bermuda {

// ---------------------------------------------------------------------------
// Bandwidth study (boxplot data for V-hat vs V-tilde across h).

struct BandwidthRow {
    int replication = 0;
    double h = 0.0;
    double v_hat = 0.0;
    double v_tilde = 0.0;
    double se_hat = 0.0;
    double se_tilde = 0.0;
};

std::vector<BandwidthRow> bandwidth_study(const RunPlan& plan, std::span<const double> h_grid,
                                          int replications);

// ---------------------------------------------------------------------------
// Rate study on oracle-priced models: bias_hat = V0 - mean V-hat_0 and
// bias_c = mean sup error of C-hat_1 on an oracle-evaluable grid. V-hat_0 is
// the exact conditional value of the fitted policy (the estimate's mean over
// unlimited fresh paths), so only training noise enters the bias.

struct RateRow {
    int num_train_paths = 0;
    double bias_hat = 0.0;
    double bias_c = 0.0;
};

struct RateStudyResult {
    std::vector<RateRow> rows;
    double slope_bias_hat = 0.0;  // log-log slopes; 0 when fewer than two rows
    double slope_bias_c = 0.0;
    double v0 = 0.0;
    int replications = 0;
};

// Two-step chain whose date-1 margins |C_1 - f_1| are linearly spaced with
// uniform visitation, so P(0 < margin <= d) grows linearly in d (alpha = 1).
struct AlphaOneChain {
    ChainModel chain;
    PayoffSpec payoff;
    double v0 = 0.0;
    std::vector<double> c1;       // exact continuation values at date-1 states
    std::vector<double> margins;
    double kernel_h = 0.1;
};

AlphaOneChain make_alpha_one_chain(int margin_states = 24, double margin_max = 0.25);

RateStudyResult rate_study_chain(const AlphaOneChain& model, std::span<const int> m_grid,
                                 int replications, std::uint64_t seed);

// Digital two-period structure: start at the threshold, a step payoff
// level +/- gap at date 1 around the true continuation value, a capped call at
// date 2. The margin gap makes the boundary assumption hold with alpha = inf.
struct DigitalModel {
    double spot = 10.0;       // start state, placed at the threshold
    double sigma = 0.4;
    double t1 = 0.5;
    double t2 = 1.0;
    double strike = 10.0;     // terminal capped-call strike
    double cap = 5.0;
    double threshold = 10.0;
    double level = 0.0;       // C_1(threshold), filled in by make_digital_model
    double gap = 0.0;
    PayoffSpec payoff;
    double v0 = 0.0;

    double continuation(double x) const;  // closed-form C_1
};

DigitalModel make_digital_model(double gap_fraction = 0.5);

RateStudyResult rate_study_digital(const DigitalModel& model, std::span<const int> m_grid,
                                   int replications, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Boundary studies: empirical margin laws fed to boundary_alpha_fit.

struct BoundaryStudy {
    BoundaryFit fit;
    int samples = 0;
};

// Synthetic margins uniform on (0, 1]: alpha = 1 by construction.
BoundaryStudy boundary_study_uniform(int samples, std::uint64_t seed,
                                     std::span<const double> delta_grid);

// Power-put margins C0 - f0 at states drawn by one Black-Scholes step from a
// uniform start on (0, K/2], whose density stays bounded near the boundary.
BoundaryStudy boundary_study_power_put(const PowerPutParams& params, int samples,
                                       std::uint64_t seed, std::span<const double> delta_grid);

// Digital-model margins |C_1 - f_1| at simulated date-1 states; every margin
// is at least the gap, so the fit returns the infinite marker.
BoundaryStudy boundary_study_digital(const DigitalModel& model, int samples, std::uint64_t seed,
                                     std::span<const double> delta_grid);

std::vector<double> default_delta_grid(double lo, double hi, int points);

}  // namespace bermuda
