#include "bermuda/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bermuda {

PayoffSpec PayoffSpec::max_call(double kappa) {
    PayoffSpec spec;
    spec.kind = PayoffKind::MaxCall;
    spec.strike = kappa;
    spec.validate();
    return spec;
}

PayoffSpec PayoffSpec::power_put(double K, double alpha) {
    PayoffSpec spec;
    spec.kind = PayoffKind::PowerPut;
    spec.strike = K;
    spec.alpha = alpha;
    spec.validate();
    return spec;
}

PayoffSpec PayoffSpec::vanilla_put(double K) {
    PayoffSpec spec;
    spec.kind = PayoffKind::VanillaPut;
    spec.strike = K;
    spec.validate();
    return spec;
}

PayoffSpec PayoffSpec::digital(double threshold, double level, double gap, double terminal_strike,
                               double terminal_cap, int digital_date, int terminal_date) {
    PayoffSpec spec;
    spec.kind = PayoffKind::Digital;
    spec.threshold = threshold;
    spec.level = level;
    spec.gap = gap;
    spec.terminal_strike = terminal_strike;
    spec.terminal_cap = terminal_cap;
    spec.digital_date = digital_date;
    spec.terminal_date = terminal_date;
    spec.validate();
    return spec;
}

PayoffSpec PayoffSpec::custom() {
    PayoffSpec spec;
    spec.kind = PayoffKind::Custom;
    return spec;
}

void PayoffSpec::validate() const {
    switch (kind) {
        case PayoffKind::MaxCall:
        case PayoffKind::VanillaPut:
            if (!(strike > 0.0)) throw std::invalid_argument("PayoffSpec: strike must be > 0");
            break;
        case PayoffKind::PowerPut:
            if (!(strike > 0.0)) throw std::invalid_argument("PayoffSpec: strike must be > 0");
            if (!(alpha > 0.0)) throw std::invalid_argument("PayoffSpec: alpha must be > 0");
            break;
        case PayoffKind::Digital:
            if (!(gap > 0.0)) throw std::invalid_argument("PayoffSpec: gap must be > 0");
            if (!(level > gap))
                throw std::invalid_argument("PayoffSpec: level must exceed gap (f >= 0)");
            if (digital_date < 0 || terminal_date <= digital_date)
                throw std::invalid_argument("PayoffSpec: digital dates out of order");
            break;
        case PayoffKind::Custom:
            break;
    }
}

double evaluate(const PayoffSpec& spec, int date, std::span<const double> x) {
    if (date < 0) throw std::invalid_argument("payoff: negative date");
    if (auto it = spec.overrides.find(date); it != spec.overrides.end()) return it->second(x);

    switch (spec.kind) {
        case PayoffKind::MaxCall: {
            double best = x[0];
            for (double v : x.subspan(1)) best = std::max(best, v);
            return std::max(best - spec.strike, 0.0);
        }
        case PayoffKind::PowerPut: {
            if (x.size() != 1) throw std::invalid_argument("power_put: requires d = 1");
            const double inv = 1.0 / spec.alpha;
            return std::max(std::pow(spec.strike, inv) - std::pow(x[0], inv), 0.0);
        }
        case PayoffKind::VanillaPut: {
            if (x.size() != 1) throw std::invalid_argument("vanilla_put: requires d = 1");
            return std::max(spec.strike - x[0], 0.0);
        }
        case PayoffKind::Digital: {
            if (x.size() != 1) throw std::invalid_argument("digital: requires d = 1");
            if (date == spec.digital_date)
                return x[0] < spec.threshold ? spec.level + spec.gap : spec.level - spec.gap;
            if (date == spec.terminal_date)
                return std::min(std::max(x[0] - spec.terminal_strike, 0.0), spec.terminal_cap);
            return 0.0;
        }
        case PayoffKind::Custom:
            return 0.0;
    }
    return 0.0;
}

}  // namespace bermuda
