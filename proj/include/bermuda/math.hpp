#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bermuda {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

inline double norm_pdf(double x) { return 0.3989422804014326779 * std::exp(-0.5 * x * x); }

inline double clip(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }

inline double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Unbiased sample variance; 0 for fewer than two points.
inline double sample_variance(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(n - 1);
}

inline double standard_error(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    return std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
}

// Ordinary least squares fit y = a + b x; returns (slope, intercept).
inline std::pair<double, double> fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need at least two points");
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

// Slope of log y against log x; all inputs must be positive.
inline double log_log_slope(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx, ly;
    lx.reserve(x.size());
    ly.reserve(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0) throw std::invalid_argument("log_log_slope: nonpositive data");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return fit_line(lx, ly).first;
}

}  // namespace bermuda
