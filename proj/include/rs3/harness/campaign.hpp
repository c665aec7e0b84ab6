#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rs3/harness/config.hpp"
#include "rs3/harness/io.hpp"
#include "rs3/parallel.hpp"
#include "rs3/risk.hpp"

namespace rs3::harness {

inline constexpr const char* kOutputRootEnv = "RS3_OUTPUT_ROOT";

/// Relative output paths resolve against $RS3_OUTPUT_ROOT when it is set.
inline std::filesystem::path resolve_output(const std::filesystem::path& output)
{
    if (output.is_absolute())
        return output;
    if (const char* root = std::getenv(kOutputRootEnv); root && *root)
        return std::filesystem::path(root) / output;
    return output;
}

struct CellResult {
    std::size_t index = 0;
    double noise_level = 0.0;
    bool ok = false;
    std::string error;
    std::vector<double> costs;
    RiskSummary summary{};
    double wall_clock = 0.0;
    /// Kept only when requested; trajectories are always on disk.
    std::vector<EpisodeRecord> records;
};

struct CampaignResult {
    std::filesystem::path directory;
    std::vector<CellResult> cells;

    bool ok() const
    {
        for (const auto& c : cells)
            if (!c.ok)
                return false;
        return true;
    }
};

struct RunOptions {
    /// Overrides the config's episode worker count when nonzero.
    std::size_t workers = 0;
    bool keep_records = false;
    /// Skip all file output (used by in-process callers).
    bool write_files = true;
};

/// Seed path of one episode: root -> (cell, episode).
inline StreamKey episode_key(std::uint64_t seed, std::size_t cell, std::size_t episode)
{
    return StreamKey(seed).child({static_cast<std::uint64_t>(cell), static_cast<std::uint64_t>(episode)});
}

namespace detail {

template <System Env>
struct CellSetup {
    Env truth;
    Env model;
    QuadraticCost<Env> cost;
    std::optional<BeliefSetup> belief;
};

template <System Env>
CellSetup<Env> make_setup(const ExperimentConfig& cfg, double level)
{
    CellSetup<Env> s;
    s.truth.dt = cfg.dt;
    s.truth.params = cfg.params;
    s.truth.control_lower = cfg.control_lower;
    s.truth.control_upper = cfg.control_upper;
    s.truth.control_noise_std = level * cfg.noise_profile;
    s.model = s.truth;

    const bool estimating_mode = cfg.mode == UncertaintyMode::parameter_estimation;
    const int idx = estimating_mode ? param_index<Env>(cfg.estimation.parameter, "estimation.parameter") : -1;
    if (estimating_mode) {
        s.truth.params[idx] = cfg.estimation.true_value;
        s.model.params[idx] = cfg.estimation.prior_mean;
    }
    s.truth.validate();

    s.cost.q = cfg.q;
    s.cost.r = cfg.r;
    s.cost.target = cfg.target;

    if (cfg.use_filter) {
        BeliefSetup b;
        b.filter.particle_count = cfg.particle_count;
        b.filter.resample_threshold = cfg.resample_threshold;
        b.filter.reflect_positive = cfg.reflect_positive;
        b.filter.measurement_noise_var = cfg.measurement_var;
        b.filter.artificial_noise_var = cfg.artificial_var;
        b.prior.state_mean = cfg.x0_mean;
        b.prior.state_var = cfg.prior_var;
        if (estimating_mode && cfg.estimation.enabled) {
            b.filter.estimated = {idx};
            b.prior.param_mean = Eigen::VectorXd::Constant(1, cfg.estimation.prior_mean);
            b.prior.param_var = Eigen::VectorXd::Constant(1, cfg.estimation.prior_var);
        } else {
            b.prior.param_mean.resize(0);
            b.prior.param_var.resize(0);
        }
        s.belief = std::move(b);
    }
    return s;
}

template <System Env>
typename Env::State draw_initial_state(const ExperimentConfig& cfg, StreamKey key)
{
    Rng rng(key.child(7));
    std::normal_distribution<double> normal(0.0, 1.0);
    typename Env::State x0 = cfg.x0_mean;
    for (int d = 0; d < Env::kStateDim; ++d)
        if (cfg.x0_var[d] > 0.0)
            x0[d] += std::sqrt(cfg.x0_var[d]) * normal(rng);
    return x0;
}

inline std::string episode_file(std::size_t episode)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "episode_%04zu.csv", episode);
    return buf;
}

inline json summary_json(const CellResult& cell, double gamma)
{
    return {{"cell", cell.index},
            {"noise_level", cell.noise_level},
            {"gamma", gamma},
            {"episodes", cell.costs.size()},
            {"mean", cell.summary.mean},
            {"var", cell.summary.var_hat},
            {"cvar", cell.summary.cvar_hat},
            {"wall_clock_s", cell.wall_clock}};
}

inline void write_json(const std::filesystem::path& path, const json& doc)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

template <System Env>
CampaignResult run_campaign_for(const ExperimentConfig& cfg, const RunOptions& opts)
{
    namespace fs = std::filesystem;
    CampaignResult result;
    result.directory = resolve_output(cfg.output);
    const std::size_t workers = opts.workers ? opts.workers : cfg.workers;

    json manifest = {{"system", cfg.system},
                     {"mode", std::string(to_string(cfg.mode))},
                     {"seed", cfg.seed},
                     {"seed_derivation", "episode stream = root(seed).child(cell, episode)"},
                     {"cells", json::array()}};
    if (opts.write_files) {
        fs::create_directories(result.directory);
        write_json(result.directory / "config.resolved.json", to_json(cfg));
    }

    json campaign_summary = {{"system", cfg.system}, {"mode", std::string(to_string(cfg.mode))}, {"cells", json::array()}};
    for (std::size_t c = 0; c < cfg.noise_levels.size(); ++c) {
        CellResult cell;
        cell.index = c;
        cell.noise_level = cfg.noise_levels[c];
        const fs::path cell_dir = result.directory / ("cell_" + std::to_string(c));
        json cell_manifest = {{"index", c}, {"noise_level", cell.noise_level}, {"directory", cell_dir.filename().string()}};
        const auto start = std::chrono::steady_clock::now();
        try {
            const auto setup = make_setup<Env>(cfg, cell.noise_level);
            if (opts.write_files)
                fs::create_directories(cell_dir / "trajectories");
            std::vector<EpisodeRecord> records(cfg.episodes);
            parallel_for(cfg.episodes, workers, [&](std::size_t e) {
                const StreamKey key = episode_key(cfg.seed, c, e);
                const auto x0 = draw_initial_state<Env>(cfg, key);
                records[e] = run_episode(setup.truth, setup.model, setup.cost, x0, cfg.mpc, setup.belief, key);
                if (opts.write_files)
                    write_trajectory_csv<Env>(cell_dir / "trajectories" / episode_file(e), records[e]);
            });
            cell.costs.reserve(records.size());
            json episodes = json::array();
            for (std::size_t e = 0; e < records.size(); ++e) {
                cell.costs.push_back(records[e].total_cost);
                episodes.push_back({{"index", e},
                                    {"seed_path", {cfg.seed, c, e}},
                                    {"trajectory", "trajectories/" + episode_file(e)},
                                    {"total_cost", records[e].total_cost},
                                    {"nonfinite_rollouts", records[e].nonfinite_rollouts},
                                    {"filter_resets", records[e].filter_resets}});
            }
            cell.summary = risk_summary(cell.costs, RiskLevel(cfg.risk_level));
            cell.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            cell.ok = true;
            if (opts.keep_records)
                cell.records = std::move(records);
            if (opts.write_files) {
                write_costs_csv(cell_dir / "costs.csv", cell.costs);
                write_json(cell_dir / "summary.json", summary_json(cell, cfg.risk_level));
            }
            cell_manifest["status"] = "complete";
            cell_manifest["episodes"] = std::move(episodes);
            campaign_summary["cells"].push_back(summary_json(cell, cfg.risk_level));
        } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
            cell.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            cell_manifest["status"] = "failed";
            cell_manifest["error"] = cell.error;
        }
        manifest["cells"].push_back(std::move(cell_manifest));
        result.cells.push_back(std::move(cell));
        if (opts.write_files)
            write_json(result.directory / "manifest.json", manifest);
    }
    if (opts.write_files)
        write_json(result.directory / "summary.json", campaign_summary);
    return result;
}

} // namespace detail

/// Runs every cell of the campaign. A failing cell is recorded in the
/// manifest and the remaining cells still run.
inline CampaignResult run_campaign(const ExperimentConfig& cfg, const RunOptions& opts = {})
{
    if (cfg.system == Pendulum::name)
        return detail::run_campaign_for<Pendulum>(cfg, opts);
    if (cfg.system == Cartpole::name)
        return detail::run_campaign_for<Cartpole>(cfg, opts);
    if (cfg.system == Quadcopter::name)
        return detail::run_campaign_for<Quadcopter>(cfg, opts);
    throw ConfigError("system", "unknown system '" + cfg.system + "'");
}

} // namespace rs3::harness
