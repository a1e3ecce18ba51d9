#include "bermuda/oracles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bermuda/math.hpp"
#include "bermuda/parallel.hpp"
#include "bermuda/rng.hpp"

namespace bermuda {

// ---------------------------------------------------------------------------
// 2-D binomial lattice

double lattice_max_call_2d(const LatticeParams& params) {
    params.model.validate();
    params.grid.validate();
    if (params.model.assets != 2)
        throw std::domain_error("lattice_max_call_2d: only two assets are supported");
    if (!params.model.correlation.empty()) {
        const auto& c = params.model.correlation;
        if (std::abs(c[1]) > 1e-12 || std::abs(c[2]) > 1e-12)
            throw std::domain_error("lattice_max_call_2d: correlation is not supported");
    }
    if (params.steps_per_interval < 1)
        throw std::invalid_argument("lattice_max_call_2d: steps_per_interval must be >= 1");
    if (params.x0.size() != 2 || !(params.x0[0] > 0.0) || !(params.x0[1] > 0.0))
        throw std::invalid_argument("lattice_max_call_2d: need two positive start prices");
    if (!(params.strike > 0.0))
        throw std::invalid_argument("lattice_max_call_2d: strike must be > 0");

    const int L = params.grid.num_steps();
    const double t0 = params.grid.times.front();
    const double horizon = params.grid.times.back() - t0;
    const double dt_grid = horizon / L;
    for (int j = 0; j < L; ++j) {
        if (std::abs(params.grid.dt(j) - dt_grid) > 1e-9 * std::max(1.0, dt_grid))
            throw std::domain_error("lattice_max_call_2d: grid must be uniform");
    }

    const double r = params.model.rate, q = params.model.dividend, sigma = params.model.sigma;
    const double kappa = params.strike;

    const auto payoff = [kappa](double s1, double s2) {
        return std::max(std::max(s1, s2) - kappa, 0.0);
    };

    if (sigma == 0.0) {
        // Deterministic paths: a 1-D maximization over the grid dates.
        double best = 0.0;
        for (int j = 0; j <= L; ++j) {
            const double t = params.grid.times[j] - t0;
            const double grow = std::exp((r - q) * t);
            best = std::max(best,
                            std::exp(-r * t) * payoff(params.x0[0] * grow, params.x0[1] * grow));
        }
        return best;
    }

    const int n = params.steps_per_interval;
    const int total = L * n;
    const double dt = horizon / total;
    const double u = std::exp(sigma * std::sqrt(dt));
    const double d = 1.0 / u;
    const double growth = std::exp((r - q) * dt);
    const double p = (growth - d) / (u - d);
    if (!(p > 0.0) || !(p < 1.0))
        throw std::domain_error("lattice_max_call_2d: risk-neutral probability outside (0,1)");
    const double disc = std::exp(-r * dt);
    const double puu = disc * p * p, pud = disc * p * (1.0 - p),
                 pdd = disc * (1.0 - p) * (1.0 - p);

    const std::size_t stride = static_cast<std::size_t>(total) + 1;
    std::vector<double> cur(stride * stride), next(stride * stride);
    std::vector<double> price(stride);

    const auto fill_prices = [&](int s, double x0k) {
        for (int i = 0; i <= s; ++i) price[i] = x0k * std::exp(sigma * std::sqrt(dt) * (2.0 * i - s));
    };

    // terminal slice
    fill_prices(total, params.x0[0]);
    std::vector<double> price2(stride);
    for (int i = 0; i <= total; ++i) price2[i] = params.x0[1] * std::exp(sigma * std::sqrt(dt) * (2.0 * i - total));
    parallel_for(stride, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t j = 0; j < stride; ++j)
                cur[i * stride + j] = payoff(price[i], price2[j]);
    });

    for (int s = total - 1; s >= 0; --s) {
        parallel_for(static_cast<std::size_t>(s) + 1, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const double* up = cur.data() + (i + 1) * stride;
                const double* dn = cur.data() + i * stride;
                double* out = next.data() + i * stride;
                for (int j = 0; j <= s; ++j)
                    out[j] = puu * up[j + 1] + pud * (up[j] + dn[j + 1]) + pdd * dn[j];
            }
        });
        if (s % n == 0) {
            fill_prices(s, params.x0[0]);
            for (int i = 0; i <= s; ++i) price2[i] = params.x0[1] * std::exp(sigma * std::sqrt(dt) * (2.0 * i - s));
            parallel_for(static_cast<std::size_t>(s) + 1, [&](std::size_t begin, std::size_t end) {
                for (std::size_t i = begin; i < end; ++i) {
                    double* out = next.data() + i * stride;
                    for (int j = 0; j <= s; ++j)
                        out[j] = std::max(out[j], payoff(price[i], price2[j]));
                }
            });
        }
        std::swap(cur, next);
    }
    return cur[0];
}

// ---------------------------------------------------------------------------
// Power-put closed form (Black-Scholes, zero rate)

double power_put_c0(const PowerPutParams& params, double x) {
    if (!(x > 0.0)) throw std::invalid_argument("power_put_c0: x must be > 0");
    if (!(params.strike > 0.0) || !(params.alpha > 0.0) || !(params.sigma > 0.0) ||
        !(params.delta_t > 0.0))
        throw std::invalid_argument("power_put_c0: parameters must be > 0");
    const double a = params.alpha, K = params.strike, sig = params.sigma, dt = params.delta_t;
    const double vol = sig * std::sqrt(dt);
    const double d1 = (std::log(x / K) + (1.0 / a - 0.5) * sig * sig * dt) / vol;
    const double d2 = d1 - vol / a;
    const double carry = std::exp(dt * (1.0 / a - 1.0) * sig * sig / (2.0 * a));
    return std::pow(K, 1.0 / a) * norm_cdf(-d2) - std::pow(x, 1.0 / a) * carry * norm_cdf(-d1);
}

double power_put_payoff(const PowerPutParams& params, double x) {
    return std::max(std::pow(params.strike, 1.0 / params.alpha) - std::pow(x, 1.0 / params.alpha),
                    0.0);
}

// ---------------------------------------------------------------------------
// Finite-chain oracle

void ChainModel::validate() const {
    if (states.size() < 2) throw std::invalid_argument("ChainModel: need at least two dates");
    if (states[0].size() != 1) throw std::invalid_argument("ChainModel: one start state required");
    if (transitions.size() != states.size() - 1)
        throw std::invalid_argument("ChainModel: one transition matrix per step required");
    for (std::size_t k = 0; k + 1 < states.size(); ++k) {
        const std::size_t rows = states[k].size(), cols = states[k + 1].size();
        if (rows == 0 || cols == 0) throw std::invalid_argument("ChainModel: empty state set");
        if (transitions[k].size() != rows * cols)
            throw std::invalid_argument("ChainModel: transition matrix size mismatch");
        for (std::size_t i = 0; i < rows; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < cols; ++j) {
                const double pij = transitions[k][i * cols + j];
                if (pij < 0.0) throw std::invalid_argument("ChainModel: negative probability");
                sum += pij;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::invalid_argument("ChainModel: transition rows must sum to 1");
        }
    }
}

ChainDpResult exact_chain_dp(const ChainModel& model, const PayoffSpec& payoff,
                             double discount_per_step) {
    model.validate();
    const int L = model.num_steps();
    if (L > 6) throw std::domain_error("exact_chain_dp: at most 6 steps supported");
    for (int k = 0; k <= L; ++k)
        if (model.num_states(k) > 50)
            throw std::domain_error("exact_chain_dp: at most 50 states per date supported");

    ChainDpResult out;
    out.snell.resize(L + 1);
    out.continuation.resize(L);
    out.exercise.resize(L);

    auto f = [&](int k, double s) { return evaluate(payoff, k, {&s, 1}); };

    out.snell[L].resize(model.num_states(L));
    for (int i = 0; i < model.num_states(L); ++i) out.snell[L][i] = f(L, model.states[L][i]);

    for (int k = L - 1; k >= 0; --k) {
        const int n = model.num_states(k);
        out.snell[k].resize(n);
        out.continuation[k].resize(n);
        out.exercise[k].resize(n);
        for (int i = 0; i < n; ++i) {
            double cont = 0.0;
            for (int j = 0; j < model.num_states(k + 1); ++j)
                cont += model.prob(k, i, j) * out.snell[k + 1][j];
            cont *= discount_per_step;
            const double fk = f(k, model.states[k][i]);
            out.continuation[k][i] = cont;
            out.exercise[k][i] = fk >= cont ? 1 : 0;
            out.snell[k][i] = std::max(fk, cont);
        }
    }
    out.value = out.snell[0][0];
    return out;
}

namespace {

double tree_value(const ChainModel& model, const PayoffSpec& payoff, double disc, int k, int i) {
    const double s = model.states[k][i];
    const double fk = evaluate(payoff, k, {&s, 1});
    if (k == model.num_steps()) return fk;
    double cont = 0.0;
    for (int j = 0; j < model.num_states(k + 1); ++j)
        cont += model.prob(k, i, j) * tree_value(model, payoff, disc, k + 1, j);
    return std::max(fk, disc * cont);
}

}  // namespace

double enumerate_stopping_value(const ChainModel& model, const PayoffSpec& payoff,
                                double discount_per_step) {
    model.validate();
    double leaves = 1.0;
    for (int k = 1; k <= model.num_steps(); ++k) leaves *= model.num_states(k);
    if (leaves > 1e6)
        throw std::domain_error("enumerate_stopping_value: more than 1e6 histories");
    return tree_value(model, payoff, discount_per_step, 0, 0);
}

double chain_policy_value(const ChainModel& model, const PayoffSpec& payoff,
                          double discount_per_step,
                          const std::vector<std::vector<char>>& stop_region) {
    model.validate();
    const int L = model.num_steps();
    if (static_cast<int>(stop_region.size()) < L)
        throw std::invalid_argument("chain_policy_value: region must cover dates 0..L-1");

    auto f = [&](int k, double s) { return evaluate(payoff, k, {&s, 1}); };
    std::vector<double> value(model.num_states(L));
    for (int i = 0; i < model.num_states(L); ++i) value[i] = f(L, model.states[L][i]);
    for (int k = L - 1; k >= 0; --k) {
        std::vector<double> prev(model.num_states(k));
        for (int i = 0; i < model.num_states(k); ++i) {
            if (stop_region[k][i]) {
                prev[i] = f(k, model.states[k][i]);
            } else {
                double cont = 0.0;
                for (int j = 0; j < model.num_states(k + 1); ++j)
                    cont += model.prob(k, i, j) * value[j];
                prev[i] = discount_per_step * cont;
            }
        }
        value = std::move(prev);
    }
    return value[0];
}

PathEnsemble simulate_chain(const ChainModel& model, int num_paths, std::uint64_t seed,
                            std::uint64_t stream_offset) {
    model.validate();
    if (num_paths < 1) throw std::invalid_argument("simulate_chain: need at least one path");
    const int L = model.num_steps();
    ExerciseGrid grid;
    grid.times.resize(L + 1);
    for (int k = 0; k <= L; ++k) grid.times[k] = k;

    std::vector<double> states(static_cast<std::size_t>(num_paths) * (L + 1));
    parallel_for(static_cast<std::size_t>(num_paths), [&](std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            Rng rng(seed, stream_offset + m);
            int idx = 0;
            double* path = states.data() + m * (L + 1);
            path[0] = model.states[0][0];
            for (int k = 0; k < L; ++k) {
                const double uu = rng.next_uniform();
                const int cols = model.num_states(k + 1);
                double cum = 0.0;
                int j = 0;
                for (; j < cols - 1; ++j) {
                    cum += model.prob(k, idx, j);
                    if (uu <= cum) break;
                }
                idx = j;
                path[k + 1] = model.states[k + 1][idx];
            }
        }
    });
    return PathEnsemble(grid, {model.states[0][0]}, num_paths, seed, stream_offset,
                        std::move(states));
}

// ---------------------------------------------------------------------------
// Boundary-exponent fit

BoundaryFit boundary_alpha_fit(std::span<const double> margins,
                               std::span<const double> delta_grid) {
    if (margins.size() < 1000)
        throw std::invalid_argument("boundary_alpha_fit: need at least 1000 samples");
    if (delta_grid.empty())
        throw std::invalid_argument("boundary_alpha_fit: empty delta grid");
    for (std::size_t g = 0; g < delta_grid.size(); ++g) {
        if (!(delta_grid[g] > 0.0))
            throw std::invalid_argument("boundary_alpha_fit: deltas must be positive");
        if (g > 0 && !(delta_grid[g] > delta_grid[g - 1]))
            throw std::invalid_argument("boundary_alpha_fit: delta grid must be increasing");
    }

    std::vector<double> sorted(margins.begin(), margins.end());
    std::sort(sorted.begin(), sorted.end());
    const auto zero_end = std::upper_bound(sorted.begin(), sorted.end(), 0.0);
    const long zeros = static_cast<long>(zero_end - sorted.begin());
    const double n = static_cast<double>(sorted.size());

    BoundaryFit fit;
    fit.zero_fraction = zeros / n;
    fit.deltas.assign(delta_grid.begin(), delta_grid.end());
    std::vector<double> log_d, log_p;
    for (double delta : delta_grid) {
        const auto hi = std::upper_bound(sorted.begin(), sorted.end(), delta);
        const long hits = static_cast<long>(hi - zero_end);
        fit.hits.push_back(hits);
        fit.p.push_back(hits / n);
        if (hits >= 20) {  // sparse bins destabilize the log regression
            log_d.push_back(std::log(delta));
            log_p.push_back(std::log(hits / n));
        }
    }
    if (log_d.size() < 2) {
        fit.infinite = true;
        fit.alpha_hat = std::numeric_limits<double>::infinity();
        return fit;
    }
    const auto [slope, intercept] = fit_line(log_d, log_p);
    fit.alpha_hat = slope;
    fit.intercept = intercept;
    return fit;
}

// ---------------------------------------------------------------------------
// Gaussian quadrature via Golub-Welsch

namespace {

void golub_welsch(const std::vector<double>& offdiag, double weight_scale,
                  std::vector<double>& nodes, std::vector<double>& weights) {
    const int n = static_cast<int>(offdiag.size()) + 1;
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) {
        jacobi(k, k + 1) = offdiag[k];
        jacobi(k + 1, k) = offdiag[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    nodes.resize(n);
    weights.resize(n);
    for (int k = 0; k < n; ++k) {
        nodes[k] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        weights[k] = weight_scale * v0 * v0;
    }
}

}  // namespace

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
    std::vector<double> offdiag(n - 1);
    for (int k = 1; k < n; ++k) offdiag[k - 1] = std::sqrt(0.5 * k);
    golub_welsch(offdiag, std::sqrt(3.14159265358979323846), nodes, weights);
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    std::vector<double> offdiag(n - 1);
    for (int k = 1; k < n; ++k) offdiag[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    golub_welsch(offdiag, 2.0, nodes, weights);
}

}  // namespace bermuda
