#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bermuda/pricing.hpp"

namespace bermuda {

// Flat key-value run configuration. Accepts INI-style sections
//
//   [model]
//   rate = 0.05
//
// or an equivalent JSON object; keys flatten to "section.key". Unknown keys
// are rejected and every error message carries the offending location.
class ConfigMap {
  public:
    static ConfigMap parse_file(const std::string& path);
    static ConfigMap parse_ini_text(const std::string& text, const std::string& name = "<config>");
    static ConfigMap parse_json_text(const std::string& text, const std::string& name = "<config>");

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, std::optional<std::string> fallback = {}) const;
    double get_double(const std::string& key, std::optional<double> fallback = {}) const;
    int get_int(const std::string& key, std::optional<int> fallback = {}) const;
    std::uint64_t get_u64(const std::string& key, std::optional<std::uint64_t> fallback = {}) const;
    bool get_bool(const std::string& key, std::optional<bool> fallback = {}) const;
    std::vector<double> get_double_list(const std::string& key) const;

    // Every key must be consumed by a getter; leftovers are config errors.
    void check_all_consumed() const;
    const std::string& name() const { return name_; }

  private:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool consumed = false;
    };
    [[noreturn]] void fail(const std::string& key, const std::string& message) const;
    const Entry& entry(const std::string& key) const;

    std::string name_;
    std::map<std::string, Entry> entries_;
};

struct RunConfig {
    RunPlan plan;
    int replications = 1;
    std::string out_dir;
    double beta = 2.0;           // smoothness asserted for the bandwidth rule
    bool bandwidth_auto = false; // h from bandwidth_rule instead of a fixed value
    std::string payoff_name;
    std::string kernel_name;
    std::string discount_mode;   // "market" or "theory"
};

RunConfig load_run_config(const std::string& path);

// Resolved-configuration echo (JSON text) sufficient to reproduce a run.
std::string config_echo_json(const RunConfig& config);

}  // namespace bermuda
