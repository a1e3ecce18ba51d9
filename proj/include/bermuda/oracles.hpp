#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bermuda/gbm.hpp"
#include "bermuda/payoff.hpp"

namespace bermuda {

// ---------------------------------------------------------------------------
// Binomial lattice reference for the two-asset Bermudan max call.

struct LatticeParams {
    GbmParams model;
    std::vector<double> x0;
    ExerciseGrid grid;
    double strike = 0.0;
    int steps_per_interval = 1;
};

// Product of two independent CRR trees; exercise allowed at grid dates only.
// Requires two assets, zero correlation and a uniform grid.
double lattice_max_call_2d(const LatticeParams& params);

// ---------------------------------------------------------------------------
// Closed-form continuation value of the two-period power put (zero rate).

struct PowerPutParams {
    double strike = 1.0;   // K
    double alpha = 1.0;
    double sigma = 1.0;
    double delta_t = 1.0;  // t1 - t0
};

// C0(x) = K^(1/a) Phi(-d2) - x^(1/a) exp(dt (1/a - 1) sigma^2/(2a)) Phi(-d1).
double power_put_c0(const PowerPutParams& params, double x);

double power_put_payoff(const PowerPutParams& params, double x);

// ---------------------------------------------------------------------------
// Exact dynamic programming on a finite Markov chain (test oracle).

// Scalar-valued states, one start state, per-step transition matrices.
struct ChainModel {
    std::vector<std::vector<double>> states;       // per date 0..L; states[0] has one entry
    std::vector<std::vector<double>> transitions;  // L row-major matrices n_k x n_{k+1}

    int num_steps() const { return static_cast<int>(states.size()) - 1; }
    int num_states(int k) const { return static_cast<int>(states[k].size()); }
    double prob(int k, int i, int j) const {
        return transitions[k][static_cast<std::size_t>(i) * states[k + 1].size() + j];
    }
    void validate() const;
};

struct ChainDpResult {
    double value = 0.0;                              // V0
    std::vector<std::vector<double>> snell;          // W_k per (date, state)
    std::vector<std::vector<double>> continuation;   // disc * E[W_{k+1} | .], k = 0..L-1
    std::vector<std::vector<char>> exercise;         // optimal region f_k >= continuation
};

// Backward induction; limits: at most 50 states per date and L <= 6.
ChainDpResult exact_chain_dp(const ChainModel& model, const PayoffSpec& payoff,
                             double discount_per_step = 1.0);

// Max over all adapted stopping rules computed by recursion over the full
// history tree, without merging states. Limit: at most 1e6 leaf histories.
double enumerate_stopping_value(const ChainModel& model, const PayoffSpec& payoff,
                                double discount_per_step = 1.0);

// Exact value of a fixed Markov stopping region (forced stop at L).
double chain_policy_value(const ChainModel& model, const PayoffSpec& payoff,
                          double discount_per_step,
                          const std::vector<std::vector<char>>& stop_region);

// Simulated trajectories of the chain (state values, d = 1) on grid 0,1,..,L.
PathEnsemble simulate_chain(const ChainModel& model, int num_paths, std::uint64_t seed,
                            std::uint64_t stream_offset = 0);

// ---------------------------------------------------------------------------
// Boundary-exponent diagnostic for the assumption P(0 < |C - f| <= d) <= B d^a.

struct BoundaryFit {
    double alpha_hat = 0.0;
    double intercept = 0.0;
    double zero_fraction = 0.0;   // fraction of samples exactly on the boundary
    bool infinite = false;        // the "alpha = infinity" gap regime
    std::vector<double> deltas;
    std::vector<double> p;        // empirical P(0 < margin <= delta)
    std::vector<long> hits;
};

// Least-squares slope of log p(delta) against log delta. Grid points with
// fewer than 20 hits are discarded; fewer than two usable points yields the
// infinite marker.
BoundaryFit boundary_alpha_fit(std::span<const double> margins, std::span<const double> delta_grid);

// ---------------------------------------------------------------------------
// Gaussian quadrature (Golub-Welsch on the Jacobi matrices).

// Physicists' Gauss-Hermite: integral of exp(-x^2) f(x) = sum w_i f(x_i).
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);
// Gauss-Legendre on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace bermuda
