#pragma once

#include <Eigen/Core>

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bermuda {

enum class KernelKind { Triangle, Gaussian, IndicatorBall, Pyramid };

// Nonnegative localization kernel plus bandwidth h; weights are K((x - x')/h).
// Triangle is K(z) = (1 - |z|^2)^+, kept unnormalized; the others integrate to
// one on R^d.
struct KernelSpec {
    KernelKind kind = KernelKind::Triangle;
    double bandwidth = 1.0;

    double density(std::span<const double> z) const;
    bool compact() const { return kind != KernelKind::Gaussian; }
    // Per-coordinate half width of the support in z units (compact kernels only).
    double support_radius() const { return 1.0; }
    void validate() const;
};

KernelKind kernel_kind_from_name(const std::string& name);
std::string kernel_kind_name(KernelKind kind);

// All monomials z^u with |u| <= degree, ordered graded-lexicographically:
// by total degree first, then lexicographically in (u_1,...,u_d) ascending.
// The first element is always the zero multi-index.
struct MonomialBasis {
    int dim = 1;
    int degree = 0;
    std::vector<std::vector<int>> exponents;

    static MonomialBasis build(int dim, int degree);
    int size() const { return static_cast<int>(exponents.size()); }
    void eval(std::span<const double> z, std::span<double> out) const;
};

struct LocalFitDiagnostics {
    Eigen::MatrixXd gamma;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    int effective_points = 0;  // samples with nonzero kernel weight
    bool truncated = false;    // set by truncate_eval when the gate fires
};

struct DesignSystem {
    Eigen::MatrixXd gamma;   // N x N kernel-weighted moment matrix
    Eigen::VectorXd moments; // N response moments S
    LocalFitDiagnostics diagnostics;
};

// Normal-equations data at a query point:
//   gamma[u1][u2] = (1/(M h^d)) sum_m ((x_m - x)/h)^(u1+u2) K((x_m - x)/h)
//   s[u]          = (1/(M h^d)) sum_m y_m ((x_m - x)/h)^u K((x_m - x)/h)
// sample_x is row major M x d. Empty neighborhoods produce zero matrices.
DesignSystem build_design(std::span<const double> sample_x, std::span<const double> sample_y,
                          std::span<const double> query, const MonomialBasis& basis,
                          const KernelSpec& kernel);

// One fitted, immutable continuation-value estimator. fit_eval returns the
// constant term of the kernel-weighted least-squares polynomial when the
// moment matrix is positive definite, 0 otherwise. truncate_eval clips the fit
// to [0, c_max] when the smallest eigenvalue clears h^nu / log M, else 0.
class ContinuationEstimator {
  public:
    ContinuationEstimator(std::vector<double> sample_x, std::vector<double> sample_y,
                          MonomialBasis basis, KernelSpec kernel, double c_max, double nu);

    std::pair<double, LocalFitDiagnostics> fit_eval(std::span<const double> x) const;
    double raw_eval(std::span<const double> x) const;
    double truncate_eval(std::span<const double> x) const;

    // Streamlined evaluation for the recursion: truncated or raw, plus a flag
    // for values forced to zero (gate failure or singular moment matrix).
    struct ChainEval {
        double value = 0.0;
        bool zeroed = false;
    };
    ChainEval chain_eval(std::span<const double> x, bool truncated) const;

    int num_samples() const { return num_samples_; }
    int dim() const { return basis_.dim; }
    const MonomialBasis& basis() const { return basis_; }
    const KernelSpec& kernel() const { return kernel_; }
    double c_max() const { return c_max_; }
    double nu() const { return nu_; }
    double gate_threshold() const { return gate_threshold_; }

  private:
    struct Accum {
        double value = 0.0;
        double lambda_min = 0.0;
        double lambda_max = 0.0;
        bool positive_definite = false;
    };
    Accum evaluate(std::span<const double> x) const;
    // Index range of samples whose (1-D) window can contain the query.
    std::pair<int, int> window(double q) const;

    std::vector<double> sample_x_;
    std::vector<double> sample_y_;
    MonomialBasis basis_;
    KernelSpec kernel_;
    double c_max_;
    double nu_;
    double gate_threshold_;
    int num_samples_;
    // 1-D compact kernels keep a sorted copy for windowed evaluation.
    bool sorted_ = false;
    std::vector<double> sorted_x_;
    std::vector<double> sorted_y_;
};

// Theory bandwidth h = M^(-1/(2(beta+nu)+d)).
double bandwidth_rule(int num_paths, double beta, double nu, int dim);

// Per-query diagnostics table: query coordinates, lambda_min, effective
// points and whether the truncation gate fired.
void write_diagnostics_csv(const ContinuationEstimator& estimator,
                           std::span<const double> queries, const std::string& path);

}  // namespace bermuda
