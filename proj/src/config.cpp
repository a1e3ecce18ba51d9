#include "bermuda/config.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bermuda/version.hpp"

namespace bermuda {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

ConfigMap ConfigMap::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    // Sniff: a JSON config starts with '{'.
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c == '{') return parse_json_text(text, path);
        break;
    }
    return parse_ini_text(text, path);
}

ConfigMap ConfigMap::parse_ini_text(const std::string& text, const std::string& name) {
    ConfigMap map;
    map.name_ = name;
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::invalid_argument(name + ":" + std::to_string(lineno) +
                                            ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw std::invalid_argument(name + ":" + std::to_string(lineno) +
                                            ": empty section name");
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(name + ":" + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument(name + ":" + std::to_string(lineno) + ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (map.entries_.count(full))
            throw std::invalid_argument(name + ":" + std::to_string(lineno) + ": duplicate key '" +
                                        full + "'");
        map.entries_[full] = Entry{value, lineno, false};
    }
    return map;
}

ConfigMap ConfigMap::parse_json_text(const std::string& text, const std::string& name) {
    ConfigMap map;
    map.name_ = name;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(name + ": " + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument(name + ": top level must be an object");
    const auto scalar_to_string = [](const json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    };
    for (const auto& [section, body] : doc.items()) {
        if (body.is_object()) {
            for (const auto& [key, value] : body.items()) {
                std::string text_value;
                if (value.is_array()) {
                    std::string joined;
                    for (const auto& item : value) {
                        if (!joined.empty()) joined += ",";
                        joined += scalar_to_string(item);
                    }
                    text_value = joined;
                } else {
                    text_value = scalar_to_string(value);
                }
                map.entries_[section + "." + key] = Entry{text_value, 0, false};
            }
        } else {
            map.entries_[section] = Entry{scalar_to_string(body), 0, false};
        }
    }
    return map;
}

bool ConfigMap::has(const std::string& key) const { return entries_.count(key) != 0; }

void ConfigMap::fail(const std::string& key, const std::string& message) const {
    const auto it = entries_.find(key);
    std::string where = name_;
    if (it != entries_.end() && it->second.line > 0)
        where += ":" + std::to_string(it->second.line);
    throw std::invalid_argument(where + ": key '" + key + "': " + message);
}

const ConfigMap::Entry& ConfigMap::entry(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) fail(key, "missing required key");
    it->second.consumed = true;
    return it->second;
}

std::string ConfigMap::get_string(const std::string& key,
                                  std::optional<std::string> fallback) const {
    if (!has(key)) {
        if (fallback) return *fallback;
        fail(key, "missing required key");
    }
    return entry(key).value;
}

double ConfigMap::get_double(const std::string& key, std::optional<double> fallback) const {
    if (!has(key)) {
        if (fallback) return *fallback;
        fail(key, "missing required key");
    }
    const std::string& v = entry(key).value;
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        fail(key, "expected a number, got '" + v + "'");
    }
}

int ConfigMap::get_int(const std::string& key, std::optional<int> fallback) const {
    if (!has(key)) {
        if (fallback) return *fallback;
        fail(key, "missing required key");
    }
    const std::string& v = entry(key).value;
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return static_cast<int>(x);
    } catch (...) {
        fail(key, "expected an integer, got '" + v + "'");
    }
}

std::uint64_t ConfigMap::get_u64(const std::string& key,
                                 std::optional<std::uint64_t> fallback) const {
    if (!has(key)) {
        if (fallback) return *fallback;
        fail(key, "missing required key");
    }
    const std::string& v = entry(key).value;
    try {
        std::size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        fail(key, "expected an unsigned integer, got '" + v + "'");
    }
}

bool ConfigMap::get_bool(const std::string& key, std::optional<bool> fallback) const {
    if (!has(key)) {
        if (fallback) return *fallback;
        fail(key, "missing required key");
    }
    const std::string& v = entry(key).value;
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    fail(key, "expected a boolean, got '" + v + "'");
}

std::vector<double> ConfigMap::get_double_list(const std::string& key) const {
    const std::string v = entry(key).value;
    std::vector<double> out;
    std::stringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const std::string c = trim(cell);
        if (c.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(c, &pos));
            if (pos != c.size()) throw std::invalid_argument("");
        } catch (...) {
            fail(key, "expected a comma-separated number list, got '" + v + "'");
        }
    }
    if (out.empty()) fail(key, "expected at least one number");
    return out;
}

void ConfigMap::check_all_consumed() const {
    for (const auto& [key, e] : entries_) {
        if (!e.consumed) {
            std::string where = name_;
            if (e.line > 0) where += ":" + std::to_string(e.line);
            throw std::invalid_argument(where + ": unknown key '" + key + "'");
        }
    }
}

RunConfig load_run_config(const std::string& path) {
    const ConfigMap map = ConfigMap::parse_file(path);
    RunConfig config;
    RunPlan& plan = config.plan;

    plan.model.assets = map.get_int("model.assets", 1);
    plan.model.rate = map.get_double("model.rate", 0.0);
    plan.model.dividend = map.get_double("model.dividend", 0.0);
    plan.model.sigma = map.get_double("model.sigma");
    plan.x0 = map.get_double_list("model.x0");
    if (map.has("model.correlation")) plan.model.correlation = map.get_double_list("model.correlation");

    const double t0 = map.get_double("grid.t0", 0.0);
    const double maturity = map.get_double("grid.maturity");
    const int dates = map.get_int("grid.dates");
    plan.grid = ExerciseGrid::uniform(t0, maturity, dates);

    config.payoff_name = map.get_string("payoff.kind");
    if (config.payoff_name == "max_call") {
        plan.payoff = PayoffSpec::max_call(map.get_double("payoff.strike"));
    } else if (config.payoff_name == "power_put") {
        plan.payoff = PayoffSpec::power_put(map.get_double("payoff.strike"),
                                            map.get_double("payoff.alpha"));
    } else if (config.payoff_name == "vanilla_put") {
        plan.payoff = PayoffSpec::vanilla_put(map.get_double("payoff.strike"));
    } else if (config.payoff_name == "zero") {
        PayoffSpec zero = PayoffSpec::custom();
        plan.payoff = zero;
    } else if (config.payoff_name == "digital") {
        plan.payoff = PayoffSpec::digital(
            map.get_double("payoff.threshold"), map.get_double("payoff.level"),
            map.get_double("payoff.gap"), map.get_double("payoff.terminal_strike"),
            map.get_double("payoff.terminal_cap",
                           std::numeric_limits<double>::infinity()),
            map.get_int("payoff.digital_date", 1), map.get_int("payoff.terminal_date", dates));
    } else {
        throw std::invalid_argument(map.name() + ": key 'payoff.kind': unknown payoff '" +
                                    config.payoff_name + "'");
    }

    plan.dp.degree = map.get_int("regression.degree", 0);
    config.kernel_name = map.get_string("regression.kernel", std::string("triangle"));
    plan.dp.kernel.kind = kernel_kind_from_name(config.kernel_name);
    plan.dp.nu = map.get_double("regression.nu", 0.0);
    plan.dp.truncation = map.get_bool("regression.truncation", true);
    config.beta = map.get_double("regression.beta", 2.0);

    plan.num_train_paths = map.get_int("pricing.train_paths");
    plan.num_pricing_paths = map.get_int("pricing.pricing_paths");
    config.replications = map.get_int("pricing.replications", 1);
    plan.master_seed = map.get_u64("pricing.seed");
    plan.start_index = map.get_int("pricing.start_index", 1);

    const std::string bw = map.get_string("regression.bandwidth", std::string("auto"));
    if (bw == "auto") {
        config.bandwidth_auto = true;
        const double scale = map.get_double("regression.bandwidth_scale", 1.0);
        plan.dp.kernel.bandwidth =
            scale * bandwidth_rule(plan.num_train_paths, config.beta, plan.dp.nu,
                                   plan.model.assets);
    } else {
        try {
            std::size_t pos = 0;
            plan.dp.kernel.bandwidth = std::stod(bw, &pos);
            if (pos != bw.size()) throw std::invalid_argument("");
        } catch (...) {
            throw std::invalid_argument(map.name() +
                                        ": key 'regression.bandwidth': expected a number or "
                                        "'auto', got '" +
                                        bw + "'");
        }
    }
    if (map.has("regression.c_max")) plan.dp.c_max = map.get_double("regression.c_max");

    config.discount_mode = map.get_string("pricing.discount", std::string("market"));
    if (config.discount_mode == "market") {
        plan.dp.discount_per_step = std::exp(-plan.model.rate * plan.grid.dt(0));
    } else if (config.discount_mode == "theory") {
        plan.dp.discount_per_step = 1.0;
    } else {
        throw std::invalid_argument(map.name() +
                                    ": key 'pricing.discount': expected 'market' or 'theory'");
    }

    config.out_dir = map.get_string("output.directory", std::string(""));

    map.check_all_consumed();
    plan.validate();
    return config;
}

std::string config_echo_json(const RunConfig& config) {
    json echo;
    echo["version"] = kVersion;
    echo["model"]["assets"] = config.plan.model.assets;
    echo["model"]["rate"] = config.plan.model.rate;
    echo["model"]["dividend"] = config.plan.model.dividend;
    echo["model"]["sigma"] = config.plan.model.sigma;
    echo["model"]["x0"] = config.plan.x0;
    if (!config.plan.model.correlation.empty())
        echo["model"]["correlation"] = config.plan.model.correlation;
    echo["grid"]["times"] = config.plan.grid.times;
    echo["payoff"]["kind"] = config.payoff_name;
    echo["payoff"]["strike"] = config.plan.payoff.strike;
    if (config.payoff_name == "power_put") echo["payoff"]["alpha"] = config.plan.payoff.alpha;
    if (config.payoff_name == "digital") {
        echo["payoff"]["threshold"] = config.plan.payoff.threshold;
        echo["payoff"]["level"] = config.plan.payoff.level;
        echo["payoff"]["gap"] = config.plan.payoff.gap;
        echo["payoff"]["terminal_strike"] = config.plan.payoff.terminal_strike;
        echo["payoff"]["terminal_cap"] = config.plan.payoff.terminal_cap;
        echo["payoff"]["digital_date"] = config.plan.payoff.digital_date;
        echo["payoff"]["terminal_date"] = config.plan.payoff.terminal_date;
    }
    echo["regression"]["degree"] = config.plan.dp.degree;
    echo["regression"]["kernel"] = config.kernel_name;
    echo["regression"]["bandwidth"] = config.plan.dp.kernel.bandwidth;
    echo["regression"]["bandwidth_auto"] = config.bandwidth_auto;
    echo["regression"]["beta"] = config.beta;
    echo["regression"]["nu"] = config.plan.dp.nu;
    echo["regression"]["truncation"] = config.plan.dp.truncation;
    if (config.plan.dp.c_max) echo["regression"]["c_max"] = *config.plan.dp.c_max;
    echo["pricing"]["train_paths"] = config.plan.num_train_paths;
    echo["pricing"]["pricing_paths"] = config.plan.num_pricing_paths;
    echo["pricing"]["replications"] = config.replications;
    echo["pricing"]["seed"] = config.plan.master_seed;
    echo["pricing"]["start_index"] = config.plan.start_index;
    echo["pricing"]["discount"] = config.discount_mode;
    echo["pricing"]["discount_per_step"] = config.plan.dp.discount_per_step;
    echo["output"]["directory"] = config.out_dir;
    return echo.dump(2);
}

}  // namespace bermuda
