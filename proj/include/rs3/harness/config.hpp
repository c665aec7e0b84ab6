#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "rs3/defaults.hpp"
#include "rs3/log.hpp"
#include "rs3/mpc.hpp"

namespace rs3::harness {

using json = nlohmann::ordered_json;

/// Invalid experiment configuration. `field()` is the dotted path of the
/// offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error("config field '" + field + "': " + message), field_(std::move(field))
    {
    }

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class UncertaintyMode { control_noise, initial_state, parameter_estimation };

inline std::string_view to_string(UncertaintyMode mode)
{
    switch (mode) {
    case UncertaintyMode::control_noise: return "control_noise";
    case UncertaintyMode::initial_state: return "initial_state";
    case UncertaintyMode::parameter_estimation: return "parameter_estimation";
    }
    return "?";
}

struct EstimationConfig {
    /// False runs the ablation: the model keeps the prior mean and the
    /// filter tracks states only.
    bool enabled = true;
    std::string parameter;
    double prior_mean = 0.0;
    double prior_var = 0.0;
    double true_value = 0.0;
};

/// One campaign: a system, an uncertainty mode and a list of control-noise
/// levels (one cell per level), everything else shared. Vectors are sized
/// for the named system once resolved.
struct ExperimentConfig {
    std::string system;
    UncertaintyMode mode = UncertaintyMode::control_noise;
    /// Control-noise standard deviations. Each level scales the system's
    /// noise profile (largest channel equal to the level).
    std::vector<double> noise_levels;
    std::size_t episodes = 1;
    std::uint64_t seed = 0;
    std::filesystem::path output = "rs3_output";
    /// Episodes run concurrently within a cell.
    std::size_t workers = 1;
    /// Risk level of the reported statistics.
    double risk_level = 0.9;
    /// Controller sees the true state (false) or a particle-filter belief.
    bool use_filter = false;

    MpcConfig mpc;

    std::size_t particle_count = 1000;
    double resample_threshold = 0.5;
    bool reflect_positive = false;
    Eigen::VectorXd measurement_var;
    Eigen::VectorXd artificial_var;

    double dt = 0.0;
    Eigen::VectorXd params;
    Eigen::VectorXd control_lower;
    Eigen::VectorXd control_upper;
    Eigen::VectorXd noise_profile;

    Eigen::VectorXd q;
    Eigen::VectorXd r;
    Eigen::VectorXd target;

    /// True initial state ~ N(x0_mean, x0_var); filter prior N(x0_mean, prior_var).
    Eigen::VectorXd x0_mean;
    Eigen::VectorXd x0_var;
    Eigen::VectorXd prior_var;

    EstimationConfig estimation;
};

namespace detail {

inline std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

/// Typed access to one JSON object; remembers which keys were read so that
/// leftovers (typos) can be reported.
class ObjectReader {
public:
    ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path))
    {
        if (!object_.is_object())
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected a mapping");
    }

    bool has(const std::string& key) const { return object_.contains(key); }

    const json& raw(const std::string& key)
    {
        seen_.insert(key);
        return object_.at(key);
    }

    std::string field(const std::string& key) const { return join(path_, key); }

    template <typename T>
    T get(const std::string& key, T fallback)
    {
        if (!has(key))
            return fallback;
        return convert<T>(raw(key), field(key));
    }

    template <typename T>
    T require(const std::string& key)
    {
        if (!has(key))
            throw ConfigError(field(key), "missing required entry");
        return convert<T>(raw(key), field(key));
    }

    Eigen::VectorXd vector(const std::string& key, const Eigen::VectorXd& fallback, Eigen::Index size)
    {
        if (!has(key))
            return fallback;
        const json& node = raw(key);
        Eigen::VectorXd out;
        if (node.is_number()) {
            out = Eigen::VectorXd::Constant(size, node.get<double>());
        } else if (node.is_array()) {
            out.resize(static_cast<Eigen::Index>(node.size()));
            for (std::size_t i = 0; i < node.size(); ++i) {
                if (!node[i].is_number())
                    throw ConfigError(field(key), "entries must be numbers");
                out[static_cast<Eigen::Index>(i)] = node[i].get<double>();
            }
        } else {
            throw ConfigError(field(key), "expected a number or a list of numbers");
        }
        if (out.size() != size)
            throw ConfigError(field(key), "expected " + std::to_string(size) + " entries, got " +
                                              std::to_string(out.size()));
        if (!out.allFinite())
            throw ConfigError(field(key), "entries must be finite");
        return out;
    }

    std::optional<ObjectReader> child(const std::string& key)
    {
        if (!has(key))
            return std::nullopt;
        return ObjectReader(raw(key), field(key));
    }

    void finish() const
    {
        for (auto it = object_.begin(); it != object_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError(field(it.key()), "unknown entry");
    }

private:
    template <typename T>
    static T convert(const json& node, const std::string& field)
    {
        if constexpr (std::is_same_v<T, bool>) {
            if (!node.is_boolean())
                throw ConfigError(field, "expected true or false");
            return node.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!node.is_string())
                throw ConfigError(field, "expected a string");
            return node.get<std::string>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!node.is_number_integer() || (node.is_number_integer() && !node.is_number_unsigned() &&
                                               node.get<std::int64_t>() < 0))
                throw ConfigError(field, "expected a nonnegative integer");
            return static_cast<T>(node.get<std::uint64_t>());
        } else {
            if (!node.is_number())
                throw ConfigError(field, "expected a number");
            const double v = node.get<double>();
            if (!std::isfinite(v))
                throw ConfigError(field, "must be finite");
            return v;
        }
    }

    const json& object_;
    std::string path_;
    std::set<std::string> seen_;
};

inline json yaml_to_json(const YAML::Node& node)
{
    switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
        return nullptr;
    case YAML::NodeType::Sequence: {
        json out = json::array();
        for (const auto& item : node)
            out.push_back(yaml_to_json(item));
        return out;
    }
    case YAML::NodeType::Map: {
        json out = json::object();
        for (const auto& item : node)
            out[item.first.as<std::string>()] = yaml_to_json(item.second);
        return out;
    }
    case YAML::NodeType::Scalar: {
        const std::string text = node.Scalar();
        if (node.Tag() == "!")
            return text;
        if (text == "true" || text == "True")
            return true;
        if (text == "false" || text == "False")
            return false;
        if (text == "null" || text == "~")
            return nullptr;
        try {
            std::size_t used = 0;
            const long long i = std::stoll(text, &used);
            if (used == text.size())
                return i;
        } catch (const std::exception&) {
        }
        try {
            std::size_t used = 0;
            const double d = std::stod(text, &used);
            if (used == text.size())
                return d;
        } catch (const std::exception&) {
        }
        return text;
    }
    }
    return nullptr;
}

inline json vector_json(const Eigen::VectorXd& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v[i]);
    return out;
}

template <typename Vec>
Eigen::VectorXd dyn(const Vec& v)
{
    return Eigen::VectorXd(v);
}

inline UncertaintyMode parse_mode(const std::string& name, const std::string& field)
{
    if (name == "control_noise") return UncertaintyMode::control_noise;
    if (name == "initial_state") return UncertaintyMode::initial_state;
    if (name == "parameter_estimation") return UncertaintyMode::parameter_estimation;
    throw ConfigError(field, "unknown uncertainty mode '" + name + "'");
}

template <System Env>
int param_index(const std::string& name, const std::string& field)
{
    for (std::size_t i = 0; i < Env::param_names.size(); ++i)
        if (Env::param_names[i] == name)
            return static_cast<int>(i);
    throw ConfigError(field, "system " + std::string(Env::name) + " has no parameter '" + name + "'");
}

template <System Env>
void parse_system(ObjectReader& root, ExperimentConfig& cfg)
{
    const auto d = default_spec<Env>();
    constexpr Eigen::Index nx = Env::kStateDim;
    constexpr Eigen::Index nu = Env::kControlDim;
    const bool estimating_mode = cfg.mode == UncertaintyMode::parameter_estimation;

    // env
    cfg.dt = d.env.dt;
    cfg.params = dyn(d.env.params);
    cfg.control_lower = dyn(d.env.control_lower);
    cfg.control_upper = dyn(d.env.control_upper);
    cfg.noise_profile = dyn(d.stochastic_noise_std) / d.stochastic_noise_std.maxCoeff();
    if (auto env = root.child("env")) {
        cfg.dt = env->get<double>("dt", cfg.dt);
        if (auto params = env->child("params")) {
            for (std::size_t i = 0; i < Env::param_names.size(); ++i) {
                const std::string key(Env::param_names[i]);
                cfg.params[static_cast<Eigen::Index>(i)] =
                    params->get<double>(key, cfg.params[static_cast<Eigen::Index>(i)]);
            }
            params->finish();
        }
        cfg.control_lower = env->vector("control_lower", cfg.control_lower, nu);
        cfg.control_upper = env->vector("control_upper", cfg.control_upper, nu);
        cfg.noise_profile = env->vector("noise_profile", cfg.noise_profile, nu);
        env->finish();
    }
    if (!(cfg.dt > 0.0))
        throw ConfigError("env.dt", "must be positive");
    if (!(cfg.control_lower.array() < cfg.control_upper.array()).all())
        throw ConfigError("env.control_lower", "must lie strictly below env.control_upper");
    if ((cfg.noise_profile.array() < 0.0).any())
        throw ConfigError("env.noise_profile", "must be nonnegative");

    // cost
    cfg.q = dyn(d.cost.q);
    cfg.r = dyn(d.cost.r);
    cfg.target = dyn(d.cost.target);
    if (auto cost = root.child("cost")) {
        cfg.q = cost->vector("q", cfg.q, nx);
        cfg.r = cost->vector("r", cfg.r, nu);
        cfg.target = cost->vector("target", cfg.target, nx);
        cost->finish();
    }
    if ((cfg.q.array() < 0.0).any())
        throw ConfigError("cost.q", "weights must be nonnegative");
    if ((cfg.r.array() < 0.0).any())
        throw ConfigError("cost.r", "weights must be nonnegative");

    // estimation
    cfg.estimation.parameter = std::string(Env::param_names[static_cast<std::size_t>(d.parameter.index)]);
    cfg.estimation.prior_mean = d.parameter.mean;
    cfg.estimation.prior_var = d.parameter.var;
    cfg.estimation.true_value = d.parameter.true_value;
    cfg.estimation.enabled = estimating_mode;
    if (auto est = root.child("estimation")) {
        if (!estimating_mode)
            throw ConfigError("estimation", "only valid with mode parameter_estimation");
        cfg.estimation.enabled = est->get<bool>("enabled", true);
        cfg.estimation.parameter = est->get<std::string>("parameter", cfg.estimation.parameter);
        cfg.estimation.prior_mean = est->get<double>("prior_mean", cfg.estimation.prior_mean);
        cfg.estimation.prior_var = est->get<double>("prior_var", cfg.estimation.prior_var);
        cfg.estimation.true_value = est->get<double>("true_value", cfg.estimation.true_value);
        est->finish();
    }
    param_index<Env>(cfg.estimation.parameter, "estimation.parameter");
    if (!(cfg.estimation.prior_var > 0.0))
        throw ConfigError("estimation.prior_var", "must be positive");
    const bool estimating = estimating_mode && cfg.estimation.enabled;

    // initial state
    cfg.x0_mean = dyn(d.x0);
    switch (cfg.mode) {
    case UncertaintyMode::control_noise:
        cfg.x0_var = Eigen::VectorXd::Zero(nx);
        cfg.prior_var = dyn(d.initial_state_var);
        break;
    case UncertaintyMode::initial_state:
        cfg.x0_var = dyn(d.initial_state_var);
        cfg.prior_var = cfg.x0_var;
        break;
    case UncertaintyMode::parameter_estimation:
        cfg.x0_var = dyn(d.estimation_state_var);
        cfg.prior_var = cfg.x0_var;
        break;
    }
    if (auto x0 = root.child("initial_state")) {
        cfg.x0_mean = x0->vector("mean", cfg.x0_mean, nx);
        const bool prior_given = x0->has("prior_var");
        cfg.x0_var = x0->vector("var", cfg.x0_var, nx);
        if (!prior_given && cfg.mode != UncertaintyMode::control_noise)
            cfg.prior_var = cfg.x0_var;
        cfg.prior_var = x0->vector("prior_var", cfg.prior_var, nx);
        x0->finish();
    }
    if ((cfg.x0_var.array() < 0.0).any())
        throw ConfigError("initial_state.var", "variances must be nonnegative");

    // filter
    cfg.use_filter = cfg.mode != UncertaintyMode::control_noise;
    cfg.measurement_var = estimating_mode ? d.estimation_measurement_var : d.measurement_var;
    cfg.artificial_var = estimating ? d.artificial_var_est : Eigen::VectorXd(d.artificial_var_no_est.head(nx));
    const Eigen::Index aug = nx + (estimating ? 1 : 0);
    if (auto f = root.child("filter")) {
        cfg.use_filter = f->get<bool>("enabled", cfg.use_filter);
        cfg.particle_count = f->get<std::size_t>("particle_count", cfg.particle_count);
        cfg.resample_threshold = f->get<double>("resample_threshold", cfg.resample_threshold);
        cfg.reflect_positive = f->get<bool>("reflect_positive", cfg.reflect_positive);
        cfg.measurement_var = f->vector("measurement_var", cfg.measurement_var, nx);
        cfg.artificial_var = f->vector("artificial_var", cfg.artificial_var, aug);
        f->finish();
    }
    if (estimating_mode && !cfg.use_filter)
        throw ConfigError("filter.enabled", "parameter_estimation needs the particle filter");
    if (cfg.use_filter && !(cfg.prior_var.array() > 0.0).all())
        throw ConfigError("initial_state.prior_var", "filter prior variances must be positive");
    if (cfg.use_filter) {
        FilterConfig probe;
        probe.particle_count = cfg.particle_count;
        probe.resample_threshold = cfg.resample_threshold;
        probe.measurement_noise_var = cfg.measurement_var;
        probe.artificial_noise_var = cfg.artificial_var;
        if (estimating)
            probe.estimated = {0};
        try {
            probe.validate(static_cast<int>(nx), Env::kParamDim);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("filter", e.what());
        }
    }

    // sampling width defaults to a quarter of the control range
    Eigen::VectorXd std_default = 0.25 * (cfg.control_upper - cfg.control_lower);
    cfg.mpc.fixed_std = std_default;
    if (root.has("mpc")) {
        ObjectReader m(root.raw("mpc"), "mpc");
        cfg.mpc.fixed_std = m.vector("sampling_std", std_default, nu);
        // other mpc keys were read in parse_common
    }
}

inline void parse_search(ObjectReader& s, SearchConfig& search)
{
    search.n_policies = s.get<std::size_t>("n_policies", search.n_policies);
    search.n_uncertainty = s.get<std::size_t>("n_uncertainty", search.n_uncertainty);
    search.iterations = s.get<std::size_t>("iterations", search.iterations);
    const double level = s.get<double>("risk_level", search.level.value());
    try {
        search.level = RiskLevel(level);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(s.field("risk_level"), e.what());
    }
    search.polyak = s.get<bool>("polyak", search.polyak);
    search.common_random_numbers = s.get<bool>("common_random_numbers", search.common_random_numbers);
    search.workers = s.get<std::size_t>("workers", search.workers);
    if (auto shape = s.child("shape")) {
        const std::string kind = shape->get<std::string>("kind", std::string(to_string(search.shape.kind)));
        try {
            search.shape.kind = parse_shape_kind(kind);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(shape->field("kind"), e.what());
        }
        search.shape.kappa = shape->get<double>("kappa", search.shape.kappa);
        search.shape.elite_fraction = shape->get<double>("elite_fraction", search.shape.elite_fraction);
        if (shape->has("lower_bound"))
            search.shape.lower_bound = shape->get<double>("lower_bound", 0.0);
        shape->finish();
        try {
            search.shape.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(s.field("shape"), e.what());
        }
    }
    if (auto sched = s.child("schedule")) {
        const std::string kind = sched->get<std::string>(
            "kind", search.schedule.kind == ScheduleKind::constant ? "constant" : "stochastic_approximation");
        if (kind == "constant")
            search.schedule.kind = ScheduleKind::constant;
        else if (kind == "stochastic_approximation")
            search.schedule.kind = ScheduleKind::stochastic_approximation;
        else
            throw ConfigError(sched->field("kind"), "unknown schedule '" + kind + "'");
        search.schedule.a = sched->get<double>("a", search.schedule.a);
        search.schedule.b = sched->get<double>("b", search.schedule.b);
        search.schedule.c = sched->get<double>("c", search.schedule.c);
        sched->finish();
        try {
            search.schedule.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(s.field("schedule"), e.what());
        }
    }
    s.finish();
    if (search.n_policies < 2)
        throw ConfigError(s.field("n_policies"), "must be at least 2");
    if (search.n_uncertainty < 1)
        throw ConfigError(s.field("n_uncertainty"), "must be at least 1");
    if (search.iterations < 1)
        throw ConfigError(s.field("iterations"), "must be at least 1");
    if (search.workers < 1)
        throw ConfigError(s.field("workers"), "must be at least 1");
}

inline void parse_mpc(ObjectReader& m, MpcConfig& mpc)
{
    mpc.horizon = m.get<std::size_t>("horizon", mpc.horizon);
    mpc.episode_length = m.get<std::size_t>("episode_length", mpc.episode_length);
    mpc.execute_steps = m.get<std::size_t>("execute_steps", mpc.execute_steps);
    mpc.warm_start = m.get<bool>("warm_start", mpc.warm_start);
    mpc.redraw_per_iteration = m.get<bool>("redraw_per_iteration", mpc.redraw_per_iteration);
    mpc.warmup_iterations = m.get<std::size_t>("warmup_iterations", mpc.warmup_iterations);
    const std::string fill = m.get<std::string>("shift_fill", mpc.fill == ShiftFill::zeros ? "zeros" : "copy_last");
    if (fill == "copy_last")
        mpc.fill = ShiftFill::copy_last;
    else if (fill == "zeros")
        mpc.fill = ShiftFill::zeros;
    else
        throw ConfigError(m.field("shift_fill"), "expected copy_last or zeros");
    const std::string exec = m.get<std::string>("execute", mpc.execute == ExecuteMode::sampled ? "sampled" : "mean");
    if (exec == "mean")
        mpc.execute = ExecuteMode::mean;
    else if (exec == "sampled")
        mpc.execute = ExecuteMode::sampled;
    else
        throw ConfigError(m.field("execute"), "expected mean or sampled");
    if (m.has("sampling_std"))
        m.raw("sampling_std"); // sized and read per system
    m.finish();
    if (mpc.horizon < 1)
        throw ConfigError(m.field("horizon"), "must be at least 1");
    if (mpc.episode_length < 1)
        throw ConfigError(m.field("episode_length"), "must be at least 1");
    if (mpc.execute_steps < 1 || mpc.execute_steps > mpc.horizon)
        throw ConfigError(m.field("execute_steps"), "must lie in [1, horizon]");
}

} // namespace detail

/// Resolve a parsed document into a fully populated config. Throws
/// ConfigError naming the first bad field.
inline ExperimentConfig parse_config(const json& doc)
{
    using namespace detail;
    ObjectReader root(doc, "");
    ExperimentConfig cfg;
    cfg.system = root.require<std::string>("system");
    cfg.mode = parse_mode(root.get<std::string>("mode", "control_noise"), "mode");
    cfg.episodes = root.get<std::size_t>("episodes", cfg.episodes);
    if (cfg.episodes < 1)
        throw ConfigError("episodes", "must be at least 1");
    cfg.seed = root.get<std::uint64_t>("seed", cfg.seed);
    cfg.output = root.get<std::string>("output", cfg.output.string());
    cfg.workers = root.get<std::size_t>("workers", cfg.workers);
    if (cfg.workers < 1)
        throw ConfigError("workers", "must be at least 1");
    cfg.risk_level = root.get<double>("risk_level", cfg.risk_level);
    if (!(cfg.risk_level > 0.0 && cfg.risk_level < 1.0))
        throw ConfigError("risk_level", "must lie in the open interval (0, 1)");

    const double default_level = cfg.mode == UncertaintyMode::control_noise ? 1.0 : 0.0;
    cfg.noise_levels = {default_level};
    if (root.has("noise_levels")) {
        const json& levels = root.raw("noise_levels");
        if (!levels.is_array() || levels.empty())
            throw ConfigError("noise_levels", "expected a nonempty list of numbers");
        cfg.noise_levels.clear();
        for (const auto& v : levels) {
            if (!v.is_number() || !(v.get<double>() >= 0.0) || !std::isfinite(v.get<double>()))
                throw ConfigError("noise_levels", "levels must be finite and nonnegative");
            cfg.noise_levels.push_back(v.get<double>());
        }
    }

    if (auto s = root.child("search"))
        parse_search(*s, cfg.mpc.search);
    if (auto m = root.child("mpc"))
        parse_mpc(*m, cfg.mpc);

    if (cfg.system == Pendulum::name)
        parse_system<Pendulum>(root, cfg);
    else if (cfg.system == Cartpole::name)
        parse_system<Cartpole>(root, cfg);
    else if (cfg.system == Quadcopter::name)
        parse_system<Quadcopter>(root, cfg);
    else
        throw ConfigError("system", "unknown system '" + cfg.system + "' (expected pendulum, cartpole or quadcopter)");

    if (!(cfg.mpc.fixed_std.array() > 0.0).all())
        throw ConfigError("mpc.sampling_std", "must be positive");
    root.finish();

    const double tail = static_cast<double>(cfg.mpc.search.n_uncertainty) * (1.0 - cfg.mpc.search.level.value());
    if (tail < 5.0)
    {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "search.n_uncertainty * (1 - search.risk_level) = %g < 5; per-policy CVaR estimates will be noisy",
                      tail);
        warn(buf);
    }
    return cfg;
}

/// Read a config file: `.json` is parsed as JSON, anything else as YAML.
inline json load_document(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("<file>", "cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    if (path.extension() == ".json") {
        try {
            return json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
        }
    }
    try {
        const YAML::Node node = YAML::Load(text);
        return detail::yaml_to_json(node);
    } catch (const YAML::Exception& e) {
        throw ConfigError("<file>", std::string("invalid YAML: ") + e.what());
    }
}

inline ExperimentConfig load_config(const std::filesystem::path& path)
{
    return parse_config(load_document(path));
}

/// Fully resolved config, every default materialized. parse_config of the
/// result reproduces the same config.
inline json to_json(const ExperimentConfig& cfg)
{
    using detail::vector_json;
    const auto& s = cfg.mpc.search;
    json shape = {{"kind", std::string(to_string(s.shape.kind))},
                  {"kappa", s.shape.kappa},
                  {"elite_fraction", s.shape.elite_fraction}};
    if (s.shape.lower_bound)
        shape["lower_bound"] = *s.shape.lower_bound;

    json params = json::object();
    auto put_params = [&]<typename Env>() {
        for (std::size_t i = 0; i < Env::param_names.size(); ++i)
            params[std::string(Env::param_names[i])] = cfg.params[static_cast<Eigen::Index>(i)];
    };
    if (cfg.system == Pendulum::name)
        put_params.template operator()<Pendulum>();
    else if (cfg.system == Cartpole::name)
        put_params.template operator()<Cartpole>();
    else if (cfg.system == Quadcopter::name)
        put_params.template operator()<Quadcopter>();

    json out = {
        {"system", cfg.system},
        {"mode", std::string(to_string(cfg.mode))},
        {"noise_levels", cfg.noise_levels},
        {"episodes", cfg.episodes},
        {"seed", cfg.seed},
        {"output", cfg.output.string()},
        {"workers", cfg.workers},
        {"risk_level", cfg.risk_level},
        {"search",
         {{"n_policies", s.n_policies},
          {"n_uncertainty", s.n_uncertainty},
          {"iterations", s.iterations},
          {"risk_level", s.level.value()},
          {"polyak", s.polyak},
          {"common_random_numbers", s.common_random_numbers},
          {"workers", s.workers},
          {"shape", shape},
          {"schedule",
           {{"kind", s.schedule.kind == ScheduleKind::constant ? "constant" : "stochastic_approximation"},
            {"a", s.schedule.a},
            {"b", s.schedule.b},
            {"c", s.schedule.c}}}}},
        {"mpc",
         {{"horizon", cfg.mpc.horizon},
          {"episode_length", cfg.mpc.episode_length},
          {"execute_steps", cfg.mpc.execute_steps},
          {"warm_start", cfg.mpc.warm_start},
          {"shift_fill", cfg.mpc.fill == ShiftFill::zeros ? "zeros" : "copy_last"},
          {"execute", cfg.mpc.execute == ExecuteMode::sampled ? "sampled" : "mean"},
          {"redraw_per_iteration", cfg.mpc.redraw_per_iteration},
          {"warmup_iterations", cfg.mpc.warmup_iterations},
          {"sampling_std", vector_json(cfg.mpc.fixed_std)}}},
        {"filter",
         {{"enabled", cfg.use_filter},
          {"particle_count", cfg.particle_count},
          {"resample_threshold", cfg.resample_threshold},
          {"reflect_positive", cfg.reflect_positive},
          {"measurement_var", vector_json(cfg.measurement_var)},
          {"artificial_var", vector_json(cfg.artificial_var)}}},
        {"env",
         {{"dt", cfg.dt},
          {"params", params},
          {"control_lower", vector_json(cfg.control_lower)},
          {"control_upper", vector_json(cfg.control_upper)},
          {"noise_profile", vector_json(cfg.noise_profile)}}},
        {"cost", {{"q", vector_json(cfg.q)}, {"r", vector_json(cfg.r)}, {"target", vector_json(cfg.target)}}},
        {"initial_state",
         {{"mean", vector_json(cfg.x0_mean)}, {"var", vector_json(cfg.x0_var)}, {"prior_var", vector_json(cfg.prior_var)}}},
    };
    if (cfg.mode == UncertaintyMode::parameter_estimation)
        out["estimation"] = {{"enabled", cfg.estimation.enabled},
                             {"parameter", cfg.estimation.parameter},
                             {"prior_mean", cfg.estimation.prior_mean},
                             {"prior_var", cfg.estimation.prior_var},
                             {"true_value", cfg.estimation.true_value}};
    return out;
}

} // namespace rs3::harness
