#pragma once

#include <functional>
#include <limits>
#include <map>
#include <span>

namespace bermuda {

enum class PayoffKind { MaxCall, PowerPut, VanillaPut, Digital, Custom };

// Exercise payoff family f_0..f_L. All payoffs are undiscounted and nonnegative;
// discount factors are applied by the dynamic-programming and pricing layers.
struct PayoffSpec {
    PayoffKind kind = PayoffKind::Custom;

    double strike = 0.0;  // kappa (max call) or K (puts)
    double alpha = 1.0;   // power-put exponent

    // Digital family: a step payoff level +/- gap around `level` at `digital_date`,
    // a capped call at `terminal_date`, zero elsewhere.
    double threshold = 0.0;
    double level = 0.0;
    double gap = 0.0;
    double terminal_strike = 0.0;
    double terminal_cap = std::numeric_limits<double>::infinity();
    int digital_date = 0;
    int terminal_date = 1;

    // Per-date overrides, consulted before the built-in kinds.
    std::map<int, std::function<double(std::span<const double>)>> overrides;

    static PayoffSpec max_call(double kappa);
    static PayoffSpec power_put(double K, double alpha);
    static PayoffSpec vanilla_put(double K);
    static PayoffSpec digital(double threshold, double level, double gap, double terminal_strike,
                              double terminal_cap, int digital_date = 0, int terminal_date = 1);
    static PayoffSpec custom();

    void validate() const;
};

double evaluate(const PayoffSpec& spec, int date, std::span<const double> x);

}  // namespace bermuda
