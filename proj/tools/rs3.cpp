#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rs3/harness/campaign.hpp"
#include "rs3/harness/report.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

int cmd_run(const std::string& path, std::size_t workers, bool quiet, bool check)
{
    using namespace rs3::harness;
    ExperimentConfig cfg;
    try {
        cfg = load_config(path);
    } catch (const ConfigError& e) {
        std::cerr << "rs3: " << e.what() << '\n';
        return kConfigError;
    }
    if (check) {
        std::cout << to_json(cfg).dump(2) << '\n';
        return 0;
    }
    try {
        RunOptions opts;
        opts.workers = workers;
        const auto result = run_campaign(cfg, opts);
        for (const auto& cell : result.cells) {
            if (!cell.ok) {
                std::cerr << "rs3: cell " << cell.index << " (noise " << cell.noise_level << ") failed: " << cell.error
                          << '\n';
                continue;
            }
            if (!quiet)
                std::printf("cell %zu  noise %-6g  episodes %zu  mean %.4f  VaR %.4f  CVaR %.4f  (%.1f s)\n", cell.index,
                            cell.noise_level, cell.costs.size(), cell.summary.mean, cell.summary.var_hat,
                            cell.summary.cvar_hat, cell.wall_clock);
        }
        if (!quiet)
            std::printf("output: %s\n", result.directory.string().c_str());
        return result.ok() ? 0 : kRuntimeError;
    } catch (const ConfigError& e) {
        std::cerr << "rs3: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "rs3: " << e.what() << '\n';
        return kRuntimeError;
    }
}

int cmd_describe(const std::string& system)
{
    try {
        rs3::harness::describe(system, std::cout);
        return 0;
    } catch (const rs3::harness::ConfigError& e) {
        std::cerr << "rs3: " << e.what() << '\n';
        return kConfigError;
    }
}

int cmd_stats(const std::string& path, double gamma, bool json_only)
{
    using namespace rs3::harness;
    if (!(gamma > 0.0 && gamma < 1.0)) {
        std::cerr << "rs3: config field 'gamma': must lie in the open interval (0, 1)\n";
        return kConfigError;
    }
    try {
        const auto costs = read_costs_csv(path);
        const auto s = rs3::risk_summary(costs, rs3::RiskLevel(gamma));
        if (!json_only)
            std::printf("n %zu  gamma %g  mean %.10g  VaR %.10g  CVaR %.10g\n", costs.size(), gamma, s.mean, s.var_hat,
                        s.cvar_hat);
        std::cout << risk_json(s, gamma, costs.size()).dump() << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "rs3: " << e.what() << '\n';
        return kRuntimeError;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Risk-sensitive stochastic search: campaigns, system defaults and cost statistics"};
    app.require_subcommand(1);

    std::string config;
    std::size_t workers = 0;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "Run every cell of an experiment config");
    run->add_option("config", config, "YAML or JSON experiment config")->required();
    run->add_option("-w,--workers", workers, "Episode workers (overrides the config)");
    bool check = false;
    run->add_flag("-q,--quiet", quiet, "Print nothing on success");
    run->add_flag("--check", check, "Validate and print the resolved config without running");

    std::string system;
    auto* describe = app.add_subcommand("describe", "Print a system's default constants");
    describe->add_option("system", system, "pendulum, cartpole or quadcopter")->required();

    std::string costs;
    double gamma = 0.9;
    bool json_only = false;
    auto* stats = app.add_subcommand("stats", "Mean/VaR/CVaR of a cost list (one value per line)");
    stats->add_option("csv", costs, "Cost file")->required();
    stats->add_option("-g,--gamma", gamma, "Risk level in (0, 1)");
    stats->add_flag("--json", json_only, "Print only the JSON line");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    if (*run)
        return cmd_run(config, workers, quiet, check);
    if (*describe)
        return cmd_describe(system);
    return cmd_stats(costs, gamma, json_only);
}
