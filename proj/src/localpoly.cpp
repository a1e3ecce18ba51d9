#include "bermuda/localpoly.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bermuda/io.hpp"

namespace bermuda {

namespace {

constexpr double kPi = 3.14159265358979323846;

double kernel_norm_const(KernelKind kind, int d) {
    switch (kind) {
        case KernelKind::Gaussian:
            return std::pow(2.0 * kPi, -0.5 * d);
        case KernelKind::IndicatorBall:
            return std::tgamma(1.0 + 0.5 * d) * std::pow(kPi, -0.5 * d);
        default:
            return 1.0;
    }
}

// Scale-aware positive-definiteness test for the moment matrix.
bool positive_definite(double lambda_min, double lambda_max) {
    return lambda_min > 1e-12 * std::max(1.0, lambda_max);
}

}  // namespace

void KernelSpec::validate() const {
    if (!(bandwidth > 0.0)) throw std::invalid_argument("KernelSpec: bandwidth must be > 0");
}

double KernelSpec::density(std::span<const double> z) const {
    const int d = static_cast<int>(z.size());
    switch (kind) {
        case KernelKind::Triangle: {
            double r2 = 0.0;
            for (double v : z) r2 += v * v;
            return r2 < 1.0 ? 1.0 - r2 : 0.0;
        }
        case KernelKind::Gaussian: {
            double r2 = 0.0;
            for (double v : z) r2 += v * v;
            return kernel_norm_const(kind, d) * std::exp(-0.5 * r2);
        }
        case KernelKind::IndicatorBall: {
            double r2 = 0.0;
            for (double v : z) r2 += v * v;
            return r2 <= 1.0 ? kernel_norm_const(kind, d) : 0.0;
        }
        case KernelKind::Pyramid: {
            double w = 1.0;
            for (double v : z) {
                const double a = 1.0 - std::abs(v);
                if (a <= 0.0) return 0.0;
                w *= a;
            }
            return w;
        }
    }
    return 0.0;
}

KernelKind kernel_kind_from_name(const std::string& name) {
    if (name == "triangle") return KernelKind::Triangle;
    if (name == "gaussian") return KernelKind::Gaussian;
    if (name == "indicator" || name == "indicator-ball") return KernelKind::IndicatorBall;
    if (name == "pyramid") return KernelKind::Pyramid;
    throw std::invalid_argument("unknown kernel kind '" + name + "'");
}

std::string kernel_kind_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::Triangle: return "triangle";
        case KernelKind::Gaussian: return "gaussian";
        case KernelKind::IndicatorBall: return "indicator-ball";
        case KernelKind::Pyramid: return "pyramid";
    }
    return "?";
}

MonomialBasis MonomialBasis::build(int dim, int degree) {
    if (dim < 1) throw std::invalid_argument("MonomialBasis: dim must be >= 1");
    if (degree < 0) throw std::invalid_argument("MonomialBasis: degree must be >= 0");
    MonomialBasis basis;
    basis.dim = dim;
    basis.degree = degree;
    std::vector<int> u(dim, 0);
    // Graded lexicographic: total degree ascending, then lexicographic in u.
    for (int total = 0; total <= degree; ++total) {
        const auto emit = [&](auto&& self, int pos, int remaining) -> void {
            if (pos == dim - 1) {
                u[pos] = remaining;
                basis.exponents.push_back(u);
                return;
            }
            for (int v = 0; v <= remaining; ++v) {
                u[pos] = v;
                self(self, pos + 1, remaining - v);
            }
        };
        emit(emit, 0, total);
    }
    return basis;
}

void MonomialBasis::eval(std::span<const double> z, std::span<double> out) const {
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        double v = 1.0;
        const auto& u = exponents[i];
        for (int k = 0; k < dim; ++k)
            for (int e = 0; e < u[k]; ++e) v *= z[k];
        out[i] = v;
    }
}

namespace {

// Accumulates the kernel-weighted normal equations at a query point.
struct Moments {
    Eigen::MatrixXd gamma;
    Eigen::VectorXd s;
    int effective = 0;
};

Moments accumulate(std::span<const double> xs, std::span<const double> ys, std::size_t lo,
                   std::size_t hi, std::span<const double> query, const MonomialBasis& basis,
                   const KernelSpec& kernel) {
    const int d = basis.dim;
    const int n = basis.size();
    Moments m;
    m.gamma = Eigen::MatrixXd::Zero(n, n);
    m.s = Eigen::VectorXd::Zero(n);
    std::vector<double> z(d), mono(n);
    const double inv_h = 1.0 / kernel.bandwidth;
    for (std::size_t i = lo; i < hi; ++i) {
        for (int k = 0; k < d; ++k) z[k] = (xs[i * d + k] - query[k]) * inv_h;
        const double w = kernel.density(z);
        if (w == 0.0) continue;
        ++m.effective;
        basis.eval(z, mono);
        for (int a = 0; a < n; ++a) {
            const double wa = w * mono[a];
            m.s(a) += wa * ys[i];
            for (int b = a; b < n; ++b) m.gamma(a, b) += wa * mono[b];
        }
    }
    const std::size_t count = hi - lo;
    const double scale = count > 0 ? 1.0 / (static_cast<double>(count) * std::pow(kernel.bandwidth, d)) : 0.0;
    m.gamma *= scale;
    m.s *= scale;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < a; ++b) m.gamma(a, b) = m.gamma(b, a);
    return m;
}

}  // namespace

DesignSystem build_design(std::span<const double> sample_x, std::span<const double> sample_y,
                          std::span<const double> query, const MonomialBasis& basis,
                          const KernelSpec& kernel) {
    kernel.validate();
    if (sample_y.empty()) throw std::invalid_argument("build_design: empty sample");
    if (sample_x.size() != sample_y.size() * static_cast<std::size_t>(basis.dim))
        throw std::invalid_argument("build_design: sample size mismatch");
    Moments m = accumulate(sample_x, sample_y, 0, sample_y.size(), query, basis, kernel);
    DesignSystem out;
    out.gamma = m.gamma;
    out.moments = m.s;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.gamma, Eigen::EigenvaluesOnly);
    out.diagnostics.gamma = m.gamma;
    out.diagnostics.lambda_min = es.eigenvalues()(0);
    out.diagnostics.lambda_max = es.eigenvalues()(basis.size() - 1);
    out.diagnostics.effective_points = m.effective;
    return out;
}

ContinuationEstimator::ContinuationEstimator(std::vector<double> sample_x,
                                             std::vector<double> sample_y, MonomialBasis basis,
                                             KernelSpec kernel, double c_max, double nu)
    : sample_x_(std::move(sample_x)),
      sample_y_(std::move(sample_y)),
      basis_(std::move(basis)),
      kernel_(kernel),
      c_max_(c_max),
      nu_(nu),
      num_samples_(static_cast<int>(sample_y_.size())) {
    kernel_.validate();
    if (num_samples_ < 1) throw std::invalid_argument("ContinuationEstimator: empty sample");
    if (sample_x_.size() != sample_y_.size() * static_cast<std::size_t>(basis_.dim))
        throw std::invalid_argument("ContinuationEstimator: sample size mismatch");
    if (!(c_max_ > 0.0)) throw std::invalid_argument("ContinuationEstimator: c_max must be > 0");
    if (nu_ < 0.0) throw std::invalid_argument("ContinuationEstimator: nu must be >= 0");
    const double logm = std::log(static_cast<double>(num_samples_));
    gate_threshold_ = logm > 0.0 ? std::pow(kernel_.bandwidth, nu_) / logm
                                 : std::numeric_limits<double>::infinity();

    if (basis_.dim == 1 && kernel_.compact()) {
        std::vector<int> order(sample_y_.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return sample_x_[a] < sample_x_[b]; });
        sorted_x_.resize(order.size());
        sorted_y_.resize(order.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            sorted_x_[i] = sample_x_[order[i]];
            sorted_y_[i] = sample_y_[order[i]];
        }
        sorted_ = true;
    }
}

std::pair<int, int> ContinuationEstimator::window(double q) const {
    const double reach = kernel_.bandwidth * kernel_.support_radius();
    const auto lo = std::lower_bound(sorted_x_.begin(), sorted_x_.end(), q - reach);
    const auto hi = std::upper_bound(sorted_x_.begin(), sorted_x_.end(), q + reach);
    return {static_cast<int>(lo - sorted_x_.begin()), static_cast<int>(hi - sorted_x_.begin())};
}

ContinuationEstimator::Accum ContinuationEstimator::evaluate(std::span<const double> x) const {
    Accum acc;
    const int d = basis_.dim;
    const double h = kernel_.bandwidth;
    const double inv_norm = 1.0 / (static_cast<double>(num_samples_) * std::pow(h, d));

    if (basis_.degree == 0) {
        double wsum = 0.0, wy = 0.0;
        if (sorted_) {
            const auto [lo, hi] = window(x[0]);
            const double q = x[0], inv_h = 1.0 / h;
            for (int i = lo; i < hi; ++i) {
                const double z = (sorted_x_[i] - q) * inv_h;
                const double w = kernel_.density({&z, 1});
                wsum += w;
                wy += w * sorted_y_[i];
            }
        } else if (kernel_.kind == KernelKind::Triangle && d == 2) {
            const double q0 = x[0], q1 = x[1], inv_h2 = 1.0 / (h * h);
            const double* px = sample_x_.data();
            const double* py = sample_y_.data();
            for (int i = 0; i < num_samples_; ++i) {
                const double dx = px[2 * i] - q0;
                const double dy = px[2 * i + 1] - q1;
                const double r2 = (dx * dx + dy * dy) * inv_h2;
                const double w = r2 < 1.0 ? 1.0 - r2 : 0.0;
                wsum += w;
                wy += w * py[i];
            }
        } else {
            std::vector<double> z(d);
            for (int i = 0; i < num_samples_; ++i) {
                for (int k = 0; k < d; ++k) z[k] = (sample_x_[i * d + k] - x[k]) / h;
                const double w = kernel_.density(z);
                wsum += w;
                wy += w * sample_y_[i];
            }
        }
        const double gamma00 = wsum * inv_norm;
        acc.lambda_min = gamma00;
        acc.lambda_max = gamma00;
        acc.positive_definite = positive_definite(gamma00, gamma00);
        acc.value = acc.positive_definite ? wy / wsum : 0.0;
        return acc;
    }

    const std::span<const double> xs = sorted_ ? std::span<const double>(sorted_x_)
                                               : std::span<const double>(sample_x_);
    const std::span<const double> ys = sorted_ ? std::span<const double>(sorted_y_)
                                               : std::span<const double>(sample_y_);
    std::size_t lo = 0, hi = sample_y_.size();
    if (sorted_) {
        const auto [wlo, whi] = window(x[0]);
        lo = static_cast<std::size_t>(wlo);
        hi = static_cast<std::size_t>(whi);
    }
    // The scale in accumulate() divides by the subrange length; fix to M below.
    Moments m = accumulate(xs, ys, lo, hi, x, basis_, kernel_);
    if (hi > lo && hi - lo != sample_y_.size()) {
        const double fix = static_cast<double>(hi - lo) / static_cast<double>(sample_y_.size());
        m.gamma *= fix;
        m.s *= fix;
    }
    if (hi == lo) {
        acc.lambda_min = 0.0;
        acc.lambda_max = 0.0;
        acc.positive_definite = false;
        acc.value = 0.0;
        return acc;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.gamma);
    const int n = basis_.size();
    acc.lambda_min = es.eigenvalues()(0);
    acc.lambda_max = es.eigenvalues()(n - 1);
    acc.positive_definite = positive_definite(acc.lambda_min, acc.lambda_max);
    if (acc.positive_definite) {
        const Eigen::VectorXd proj = es.eigenvectors().transpose() * m.s;
        double value = 0.0;
        for (int i = 0; i < n; ++i)
            value += es.eigenvectors()(0, i) * proj(i) / es.eigenvalues()(i);
        acc.value = value;
    }
    return acc;
}

// Diagnostics-rich evaluation through the generic normal-equations route;
// raw_eval/truncate_eval take the streamlined path. The two agree (tested).
std::pair<double, LocalFitDiagnostics> ContinuationEstimator::fit_eval(
    std::span<const double> x) const {
    DesignSystem design = build_design(sample_x_, sample_y_, x, basis_, kernel_);
    LocalFitDiagnostics diag = design.diagnostics;
    double value = 0.0;
    if (positive_definite(diag.lambda_min, diag.lambda_max)) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(design.gamma);
        const Eigen::VectorXd proj = es.eigenvectors().transpose() * design.moments;
        for (int i = 0; i < basis_.size(); ++i)
            value += es.eigenvectors()(0, i) * proj(i) / es.eigenvalues()(i);
    }
    return {value, diag};
}

double ContinuationEstimator::raw_eval(std::span<const double> x) const {
    return evaluate(x).value;
}

double ContinuationEstimator::truncate_eval(std::span<const double> x) const {
    return chain_eval(x, true).value;
}

ContinuationEstimator::ChainEval ContinuationEstimator::chain_eval(std::span<const double> x,
                                                                   bool truncated) const {
    const Accum acc = evaluate(x);
    if (truncated) {
        if (acc.lambda_min > gate_threshold_)
            return {acc.value < 0.0 ? 0.0 : (acc.value > c_max_ ? c_max_ : acc.value), false};
        return {0.0, true};
    }
    return {acc.value, !acc.positive_definite};
}

double bandwidth_rule(int num_paths, double beta, double nu, int dim) {
    if (num_paths < 2) throw std::invalid_argument("bandwidth_rule: need M >= 2");
    if (!(beta > 0.0)) throw std::invalid_argument("bandwidth_rule: beta must be > 0");
    if (nu < 0.0) throw std::invalid_argument("bandwidth_rule: nu must be >= 0");
    if (dim < 1) throw std::invalid_argument("bandwidth_rule: dim must be >= 1");
    return std::pow(static_cast<double>(num_paths), -1.0 / (2.0 * (beta + nu) + dim));
}

void write_diagnostics_csv(const ContinuationEstimator& estimator,
                           std::span<const double> queries, const std::string& path) {
    const int d = estimator.dim();
    if (queries.size() % d != 0)
        throw std::invalid_argument("write_diagnostics_csv: query array size mismatch");
    CsvTable table;
    for (int k = 0; k < d; ++k) table.header.push_back("q" + std::to_string(k + 1));
    table.header.insert(table.header.end(), {"lambda_min", "effective_points", "truncated"});
    for (std::size_t i = 0; i < queries.size() / d; ++i) {
        const std::span<const double> q = queries.subspan(i * d, d);
        const auto [value, diag] = estimator.fit_eval(q);
        (void)value;
        std::vector<std::string> row;
        for (int k = 0; k < d; ++k) row.push_back(format_double(q[k]));
        row.push_back(format_double(diag.lambda_min));
        row.push_back(std::to_string(diag.effective_points));
        row.push_back(diag.lambda_min > estimator.gate_threshold() ? "0" : "1");
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

}  // namespace bermuda
