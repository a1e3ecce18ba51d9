#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bermuda/config.hpp"
#include "bermuda/io.hpp"
#include "bermuda/math.hpp"
#include "bermuda/oracles.hpp"
#include "bermuda/parallel.hpp"
#include "bermuda/pricing.hpp"
#include "bermuda/studies.hpp"
#include "bermuda/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bermuda;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> replications;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required) {
    auto* config = cmd->add_option("--config", opts.config_path, "run configuration (.ini or .json)");
    if (config_required) config->required();
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "override the master seed");
    cmd->add_option("--replications", opts.replications, "override the replication count");
    cmd->add_option("--threads", opts.threads, "worker threads (never changes results)");
}

RunConfig load_with_overrides(const CommonOpts& opts) {
    RunConfig config = load_run_config(opts.config_path);
    if (opts.seed) config.plan.master_seed = *opts.seed;
    if (opts.replications) config.replications = *opts.replications;
    if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
    return config;
}

fs::path prepare_out_dir(const std::string& dir) {
    const fs::path path = dir.empty() ? fs::path(".") : fs::path(dir);
    fs::create_directories(path);
    return path;
}

std::vector<double> parse_grid(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell.empty()) continue;
        out.push_back(std::stod(cell));
    }
    if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty grid");
    return out;
}

json report_to_json(const RunConfig& config, const PricingReport& report) {
    json doc = json::parse(config_echo_json(config));
    doc["results"]["v_hat"] = report.v_hat;
    doc["results"]["v_tilde"] = report.v_tilde;
    doc["results"]["se_hat"] = report.se_hat;
    doc["results"]["se_tilde"] = report.se_tilde;
    doc["results"]["replications"] = report.runs.size();
    json runs = json::array();
    for (const auto& run : report.runs) {
        runs.push_back({{"v_hat", run.v_hat},
                        {"v_tilde", run.v_tilde},
                        {"se_hat", run.se_hat},
                        {"se_tilde", run.se_tilde},
                        {"seed", run.seed}});
    }
    doc["results"]["runs"] = runs;
    return doc;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << text << '\n';
}

int cmd_price(const CommonOpts& opts) {
    const RunConfig config = load_with_overrides(opts);
    const PricingReport report = replicate(config.plan, config.replications);

    const fs::path out = prepare_out_dir(config.out_dir);
    write_text(out / "report.json", report_to_json(config, report).dump(2));

    CsvTable runs;
    runs.header = {"replication", "v_hat", "v_tilde", "se_hat", "se_tilde"};
    for (std::size_t r = 0; r < report.runs.size(); ++r) {
        const auto& run = report.runs[r];
        runs.rows.push_back({std::to_string(r), format_double(run.v_hat),
                             format_double(run.v_tilde), format_double(run.se_hat),
                             format_double(run.se_tilde)});
    }
    write_csv((out / "replications.csv").string(), runs);

    // per-level diagnostics from one training pass at the master seed
    {
        const PathEnsemble train =
            simulate_gbm(config.plan.model, config.plan.x0, config.plan.grid,
                         config.plan.num_train_paths, config.plan.master_seed, 0);
        const EstimatorChain chain = backward_induct(train, config.plan.payoff, config.plan.dp);
        CsvTable levels;
        levels.header = {"k", "mean_target", "gated_fraction"};
        for (int k = 1; k < chain.num_dates(); ++k) {
            levels.rows.push_back({std::to_string(k),
                                   format_double(chain.level_stats(k).mean_target),
                                   format_double(chain.level_stats(k).gated_fraction)});
        }
        write_csv((out / "levels.csv").string(), levels);
    }

    std::printf("v_hat   %.6f  (se %.6f)\n", report.v_hat, report.se_hat);
    std::printf("v_tilde %.6f  (se %.6f)\n", report.v_tilde, report.se_tilde);
    std::printf("report written to %s\n", (out / "report.json").string().c_str());
    return 0;
}

int cmd_bandwidth_study(const CommonOpts& opts, const std::string& h_grid_text) {
    const RunConfig config = load_with_overrides(opts);
    const auto h_grid = parse_grid(h_grid_text, "--h-grid");
    const auto rows = bandwidth_study(config.plan, h_grid, config.replications);

    const fs::path out = prepare_out_dir(config.out_dir);
    CsvTable table;
    table.header = {"replication", "h", "v_hat", "v_tilde", "se_hat", "se_tilde"};
    for (const auto& row : rows) {
        table.rows.push_back({std::to_string(row.replication), format_double(row.h),
                              format_double(row.v_hat), format_double(row.v_tilde),
                              format_double(row.se_hat), format_double(row.se_tilde)});
    }
    write_csv((out / "bandwidth_study.csv").string(), table);
    write_text(out / "bandwidth_study_config.json", config_echo_json(config));

    for (double h : h_grid) {
        std::vector<double> hats, tildes;
        for (const auto& row : rows) {
            if (row.h == h) {
                hats.push_back(row.v_hat);
                tildes.push_back(row.v_tilde);
            }
        }
        std::printf("h %8.2f  mean v_hat %.4f (se %.4f)  mean v_tilde %.4f (se %.4f)\n", h,
                    mean(hats), standard_error(hats), mean(tildes), standard_error(tildes));
    }
    std::printf("table written to %s\n", (out / "bandwidth_study.csv").string().c_str());
    return 0;
}

int cmd_rate_study(const CommonOpts& opts, const std::string& model_name,
                   const std::string& m_grid_text) {
    if (!opts.config_path.empty())
        throw std::domain_error(
            "rate-study needs an oracle-priced model; configured payoffs are not supported "
            "(use --model chain-alpha1 or --model digital)");

    std::vector<int> m_grid;
    for (double m : parse_grid(m_grid_text, "--m-grid")) m_grid.push_back(static_cast<int>(m));
    const int replications = opts.replications.value_or(100);
    const std::uint64_t seed = opts.seed.value_or(7001);

    RateStudyResult result;
    if (model_name == "chain-alpha1") {
        result = rate_study_chain(make_alpha_one_chain(), m_grid, replications, seed);
    } else if (model_name == "digital") {
        result = rate_study_digital(make_digital_model(0.5), m_grid, replications, seed);
    } else {
        throw std::domain_error("rate-study: unknown model '" + model_name + "'");
    }

    const fs::path out = prepare_out_dir(opts.out_dir);
    CsvTable table;
    table.header = {"M", "bias_hat", "bias_c"};
    for (const auto& row : result.rows)
        table.rows.push_back({std::to_string(row.num_train_paths), format_double(row.bias_hat),
                              format_double(row.bias_c)});
    write_csv((out / "rate_study.csv").string(), table);
    {
        json echo;
        echo["version"] = kVersion;
        echo["command"] = "rate-study";
        echo["model"] = model_name;
        echo["m_grid"] = m_grid;
        echo["replications"] = replications;
        echo["seed"] = seed;
        echo["v0"] = result.v0;
        write_text(out / "rate_study_config.json", echo.dump(2));
    }

    for (const auto& row : result.rows)
        std::printf("M %6d  bias_hat %.8f  bias_c %.6f\n", row.num_train_paths, row.bias_hat,
                    row.bias_c);
    if (result.rows.size() >= 2) {
        std::printf("log-log slope bias_hat %.3f   bias_c %.3f   (V0 = %.6f, R = %d)\n",
                    result.slope_bias_hat, result.slope_bias_c, result.v0, result.replications);
    }
    std::printf("table written to %s\n", (out / "rate_study.csv").string().c_str());
    return 0;
}

int cmd_boundary_study(const CommonOpts& opts, const std::string& family, int samples,
                       double alpha, const std::string& delta_grid_text) {
    const int n = samples;
    const std::uint64_t seed = opts.seed.value_or(6001);

    BoundaryStudy study;
    std::vector<double> grid;
    if (family == "uniform") {
        grid = delta_grid_text.empty() ? default_delta_grid(1e-3, 0.5, 12)
                                       : parse_grid(delta_grid_text, "--delta-grid");
        study = boundary_study_uniform(n, seed, grid);
    } else if (family == "power-put") {
        PowerPutParams params{10.0, alpha, 0.5, 0.5};
        grid = delta_grid_text.empty() ? default_delta_grid(1.5e-3, 3e-2, 12)
                                       : parse_grid(delta_grid_text, "--delta-grid");
        study = boundary_study_power_put(params, n, seed, grid);
    } else if (family == "digital") {
        const auto model = make_digital_model(0.5);
        grid = delta_grid_text.empty() ? default_delta_grid(model.gap * 1e-2, model.gap * 0.9, 10)
                                       : parse_grid(delta_grid_text, "--delta-grid");
        study = boundary_study_digital(model, n, seed, grid);
    } else {
        throw std::domain_error("boundary-study: unsupported family '" + family + "'");
    }

    const fs::path out = prepare_out_dir(opts.out_dir);
    CsvTable table;
    table.header = {"delta", "p", "hits"};
    for (std::size_t g = 0; g < study.fit.deltas.size(); ++g)
        table.rows.push_back({format_double(study.fit.deltas[g]), format_double(study.fit.p[g]),
                              std::to_string(study.fit.hits[g])});
    write_csv((out / "boundary_study.csv").string(), table);
    {
        json echo;
        echo["version"] = kVersion;
        echo["command"] = "boundary-study";
        echo["family"] = family;
        echo["samples"] = n;
        echo["alpha"] = alpha;
        echo["seed"] = seed;
        echo["delta_grid"] = grid;
        write_text(out / "boundary_study_config.json", echo.dump(2));
    }

    if (study.fit.infinite) {
        std::printf("alpha_hat inf (gap regime)  zero_fraction %.6f\n", study.fit.zero_fraction);
    } else {
        std::printf("alpha_hat %.4f  intercept %.4f  zero_fraction %.6f\n", study.fit.alpha_hat,
                    study.fit.intercept, study.fit.zero_fraction);
    }
    std::printf("table written to %s\n", (out / "boundary_study.csv").string().c_str());
    return 0;
}

int cmd_lattice(const CommonOpts& opts, const std::string& steps_text) {
    const RunConfig config = load_with_overrides(opts);
    if (config.plan.payoff.kind != PayoffKind::MaxCall)
        throw std::domain_error("lattice: only the max-call payoff is supported");

    LatticeParams params;
    params.model = config.plan.model;
    params.x0 = config.plan.x0;
    params.grid = config.plan.grid;
    params.strike = config.plan.payoff.strike;

    const fs::path out = prepare_out_dir(config.out_dir);
    CsvTable table;
    table.header = {"steps_per_interval", "value"};
    for (double steps : parse_grid(steps_text, "--steps")) {
        params.steps_per_interval = static_cast<int>(steps);
        const double value = lattice_max_call_2d(params);
        table.rows.push_back({std::to_string(params.steps_per_interval), format_double(value)});
        std::printf("steps %5d  value %.6f\n", params.steps_per_interval, value);
    }
    write_csv((out / "lattice.csv").string(), table);
    write_text(out / "lattice_config.json", config_echo_json(config));
    std::printf("table written to %s\n", (out / "lattice.csv").string().c_str());
    return 0;
}

int cmd_simulate(const CommonOpts& opts, int paths) {
    const RunConfig config = load_with_overrides(opts);
    const int count = paths > 0 ? paths : config.plan.num_train_paths;
    const PathEnsemble ensemble = simulate_gbm(config.plan.model, config.plan.x0,
                                               config.plan.grid, count,
                                               config.plan.master_seed, 0);

    const fs::path out = prepare_out_dir(config.out_dir);
    CsvTable table;
    table.header = {"m", "j", "t"};
    for (int k = 0; k < ensemble.dim(); ++k) table.header.push_back("x" + std::to_string(k + 1));
    for (int m = 0; m < count; ++m) {
        for (int j = 0; j <= ensemble.grid().num_steps(); ++j) {
            std::vector<std::string> row{std::to_string(m), std::to_string(j),
                                         format_double(ensemble.grid().times[j])};
            for (int k = 0; k < ensemble.dim(); ++k)
                row.push_back(format_double(ensemble.state(m, j, k)));
            table.rows.push_back(std::move(row));
        }
    }
    write_csv((out / "paths.csv").string(), table);
    write_text(out / "simulate_config.json", config_echo_json(config));
    std::printf("%d paths written to %s\n", count, (out / "paths.csv").string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regression Monte Carlo pricer for Bermudan options"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    CommonOpts price_opts, bw_opts, rate_opts, boundary_opts, lattice_opts, sim_opts;

    auto* price = app.add_subcommand("price", "one train -> policy -> fresh-price cycle");
    add_common(price, price_opts, true);

    auto* bw = app.add_subcommand("bandwidth-study", "replications across a bandwidth grid");
    add_common(bw, bw_opts, true);
    std::string h_grid_text;
    bw->add_option("--h-grid", h_grid_text, "comma-separated bandwidths")->required();

    auto* rate = app.add_subcommand("rate-study", "bias scaling against an oracle-priced model");
    add_common(rate, rate_opts, false);
    std::string rate_model = "chain-alpha1";
    std::string m_grid_text = "512,1024,2048,4096,8192,16384";
    rate->add_option("--model", rate_model, "chain-alpha1 or digital");
    rate->add_option("--m-grid", m_grid_text, "comma-separated training path counts");

    auto* boundary = app.add_subcommand("boundary-study", "empirical boundary exponent");
    add_common(boundary, boundary_opts, false);
    std::string family = "power-put";
    std::string delta_grid_text;
    int samples = 100000;
    double alpha = 2.0;
    boundary->add_option("--family", family, "power-put, digital or uniform");
    boundary->add_option("--samples", samples, "margin sample count");
    boundary->add_option("--alpha", alpha, "power-put payoff exponent");
    boundary->add_option("--delta-grid", delta_grid_text, "comma-separated deltas");

    auto* lattice = app.add_subcommand("lattice", "binomial-lattice reference value");
    add_common(lattice, lattice_opts, true);
    std::string steps_text = "300";
    lattice->add_option("--steps", steps_text, "steps per interval (comma-separated for a table)");

    auto* simulate = app.add_subcommand("simulate", "dump simulated paths as CSV");
    add_common(simulate, sim_opts, true);
    int sim_paths = 0;
    simulate->add_option("--paths", sim_paths, "number of paths (default: train_paths)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const CommonOpts* active = nullptr;
        if (price->parsed()) active = &price_opts;
        else if (bw->parsed()) active = &bw_opts;
        else if (rate->parsed()) active = &rate_opts;
        else if (boundary->parsed()) active = &boundary_opts;
        else if (lattice->parsed()) active = &lattice_opts;
        else active = &sim_opts;
        if (active->threads > 0) set_max_threads(active->threads);

        if (price->parsed()) return cmd_price(price_opts);
        if (bw->parsed()) return cmd_bandwidth_study(bw_opts, h_grid_text);
        if (rate->parsed()) return cmd_rate_study(rate_opts, rate_model, m_grid_text);
        if (boundary->parsed())
            return cmd_boundary_study(boundary_opts, family, samples, alpha, delta_grid_text);
        if (lattice->parsed()) return cmd_lattice(lattice_opts, steps_text);
        if (simulate->parsed()) return cmd_simulate(sim_opts, sim_paths);
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "unsupported: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
