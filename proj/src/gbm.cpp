#include "bermuda/gbm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "bermuda/parallel.hpp"
#include "bermuda/rng.hpp"

namespace bermuda {

void GbmParams::validate() const {
    if (assets < 1) throw std::invalid_argument("GbmParams: assets must be >= 1");
    if (sigma < 0.0) throw std::invalid_argument("GbmParams: sigma must be >= 0");
    if (!correlation.empty()) {
        const std::size_t d = static_cast<std::size_t>(assets);
        if (correlation.size() != d * d)
            throw std::invalid_argument("GbmParams: correlation must be d x d");
        for (std::size_t i = 0; i < d; ++i) {
            if (std::abs(correlation[i * d + i] - 1.0) > 1e-12)
                throw std::invalid_argument("GbmParams: correlation diagonal must be 1");
            for (std::size_t j = 0; j < i; ++j) {
                if (std::abs(correlation[i * d + j] - correlation[j * d + i]) > 1e-12)
                    throw std::invalid_argument("GbmParams: correlation must be symmetric");
            }
        }
        correlation_cholesky();  // PSD check
    }
}

std::vector<double> GbmParams::correlation_cholesky() const {
    const std::size_t d = static_cast<std::size_t>(assets);
    std::vector<double> chol(d * d, 0.0);
    if (correlation.empty()) {
        for (std::size_t i = 0; i < d; ++i) chol[i * d + i] = 1.0;
        return chol;
    }
    // Cholesky with tolerance for semidefinite matrices: pivots in
    // [-1e-12, 0] collapse the column to zero, anything lower is rejected.
    for (std::size_t j = 0; j < d; ++j) {
        double diag = correlation[j * d + j];
        for (std::size_t k = 0; k < j; ++k) diag -= chol[j * d + k] * chol[j * d + k];
        if (diag < -1e-12) throw std::invalid_argument("GbmParams: correlation is not PSD");
        if (diag <= 0.0) {
            chol[j * d + j] = 0.0;
            continue;
        }
        const double root = std::sqrt(diag);
        chol[j * d + j] = root;
        for (std::size_t i = j + 1; i < d; ++i) {
            double v = correlation[i * d + j];
            for (std::size_t k = 0; k < j; ++k) v -= chol[i * d + k] * chol[j * d + k];
            chol[i * d + j] = v / root;
        }
    }
    return chol;
}

ExerciseGrid ExerciseGrid::uniform(double t0, double maturity, int dates) {
    if (dates < 1) throw std::invalid_argument("ExerciseGrid: need at least one exercise date");
    ExerciseGrid grid;
    grid.times.resize(static_cast<std::size_t>(dates) + 1);
    for (int j = 0; j <= dates; ++j)
        grid.times[j] = t0 + (maturity - t0) * static_cast<double>(j) / dates;
    grid.validate();
    return grid;
}

void ExerciseGrid::validate() const {
    if (times.size() < 2) throw std::invalid_argument("ExerciseGrid: need t0 and at least t1");
    if (times.front() < 0.0) throw std::invalid_argument("ExerciseGrid: t0 must be >= 0");
    for (std::size_t j = 1; j < times.size(); ++j) {
        if (!(times[j] > times[j - 1]))
            throw std::invalid_argument("ExerciseGrid: times must be strictly increasing");
    }
}

PathEnsemble::PathEnsemble(ExerciseGrid grid, std::vector<double> x0, int num_paths,
                           std::uint64_t seed, std::uint64_t stream_offset,
                           std::vector<double> states)
    : grid_(std::move(grid)),
      x0_(std::move(x0)),
      num_paths_(num_paths),
      dim_(static_cast<int>(x0_.size())),
      dates_(grid_.times.size()),
      seed_(seed),
      stream_offset_(stream_offset),
      states_(std::move(states)) {
    if (states_.size() != static_cast<std::size_t>(num_paths_) * dates_ * dim_)
        throw std::invalid_argument("PathEnsemble: state array size mismatch");
}

PathEnsemble simulate_gbm(const GbmParams& params, const std::vector<double>& x0,
                          const ExerciseGrid& grid, int num_paths, std::uint64_t seed,
                          std::uint64_t stream_offset) {
    params.validate();
    grid.validate();
    if (num_paths < 1) throw std::invalid_argument("simulate_gbm: need at least one path");
    if (x0.size() != static_cast<std::size_t>(params.assets))
        throw std::invalid_argument("simulate_gbm: x0 dimension mismatch");
    for (double v : x0) {
        if (!(v > 0.0)) throw std::invalid_argument("simulate_gbm: x0 must be positive");
    }

    const int d = params.assets;
    const int steps = grid.num_steps();
    const std::size_t dates = grid.times.size();
    const std::vector<double> chol = params.correlation_cholesky();
    const bool identity = params.correlation.empty();

    // Per-step drift and diffusion of the exact lognormal transition.
    std::vector<double> drift(steps), vol(steps);
    for (int j = 0; j < steps; ++j) {
        const double dt = grid.dt(j);
        drift[j] = (params.rate - params.dividend - 0.5 * params.sigma * params.sigma) * dt;
        vol[j] = params.sigma * std::sqrt(dt);
    }

    std::vector<double> states(static_cast<std::size_t>(num_paths) * dates * d);
    parallel_for(static_cast<std::size_t>(num_paths), [&](std::size_t begin, std::size_t end) {
        std::vector<double> z(d), w(d);
        for (std::size_t m = begin; m < end; ++m) {
            Rng rng(seed, stream_offset + m);
            double* path = states.data() + m * dates * d;
            for (int k = 0; k < d; ++k) path[k] = x0[k];
            for (int j = 0; j < steps; ++j) {
                for (int k = 0; k < d; ++k) z[k] = rng.next_normal();
                if (identity) {
                    for (int k = 0; k < d; ++k) w[k] = z[k];
                } else {
                    for (int k = 0; k < d; ++k) {
                        double acc = 0.0;
                        for (int l = 0; l <= k; ++l) acc += chol[k * d + l] * z[l];
                        w[k] = acc;
                    }
                }
                const double* prev = path + static_cast<std::size_t>(j) * d;
                double* next = path + static_cast<std::size_t>(j + 1) * d;
                for (int k = 0; k < d; ++k)
                    next[k] = prev[k] * std::exp(drift[j] + vol[j] * w[k]);
            }
        }
    });

    return PathEnsemble(grid, x0, num_paths, seed, stream_offset, std::move(states));
}

}  // namespace bermuda
