#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "rs3/defaults.hpp"
#include "rs3/harness/config.hpp"
#include "rs3/harness/io.hpp"
#include "rs3/risk.hpp"

namespace rs3::harness {

inline json risk_json(const RiskSummary& s, double gamma, std::size_t count)
{
    return {{"gamma", gamma}, {"count", count}, {"mean", s.mean}, {"var", s.var_hat}, {"cvar", s.cvar_hat}};
}

/// Mean/VaR/CVaR of a cost list file.
inline RiskSummary cost_file_stats(const std::filesystem::path& path, double gamma)
{
    const auto costs = read_costs_csv(path);
    return risk_summary(costs, RiskLevel(gamma));
}

namespace detail {

template <typename Vec>
std::string list(const Vec& v)
{
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out += (i ? ", " : "") + format_double(v[i]);
    return out + "]";
}

template <typename Names>
std::string names(const Names& n)
{
    std::string out = "[";
    for (std::size_t i = 0; i < n.size(); ++i)
        out += (i ? ", " : "") + std::string(n[i]);
    return out + "]";
}

template <System Env>
void describe_system(std::ostream& os)
{
    const auto d = default_spec<Env>();
    os << "system: " << Env::name << '\n'
       << "state: " << names(Env::state_names) << '\n'
       << "control: " << names(Env::control_names) << '\n'
       << "dt: " << format_double(d.env.dt) << '\n'
       << "params:\n";
    for (std::size_t i = 0; i < Env::param_names.size(); ++i)
        os << "  " << Env::param_names[i] << ": " << format_double(d.env.params[static_cast<Eigen::Index>(i)]) << '\n';
    os << "control_lower: " << list(d.env.control_lower) << '\n'
       << "control_upper: " << list(d.env.control_upper) << '\n'
       << "cost:\n"
       << "  q: " << list(d.cost.q) << '\n'
       << "  r: " << list(d.cost.r) << '\n'
       << "  target: " << list(d.cost.target) << '\n'
       << "initial_state: " << list(d.x0) << '\n'
       << "initial_state_var: " << list(d.initial_state_var) << '\n'
       << "measurement_var: " << list(d.measurement_var) << '\n'
       << "stochastic_noise_std: " << list(d.stochastic_noise_std) << '\n'
       << "artificial_var_no_est: " << list(d.artificial_var_no_est) << '\n'
       << "parameter_estimation:\n"
       << "  parameter: " << Env::param_names[static_cast<std::size_t>(d.parameter.index)] << '\n'
       << "  prior_mean: " << format_double(d.parameter.mean) << '\n'
       << "  prior_var: " << format_double(d.parameter.var) << '\n'
       << "  true_value: " << format_double(d.parameter.true_value) << '\n'
       << "  initial_state_var: " << list(d.estimation_state_var) << '\n'
       << "  measurement_var: " << list(d.estimation_measurement_var) << '\n'
       << "  artificial_var: " << list(d.artificial_var_est) << '\n';
}

} // namespace detail

/// Prints the shipped defaults of a system. Throws ConfigError for an
/// unknown name.
inline void describe(const std::string& system, std::ostream& os)
{
    if (system == Pendulum::name)
        detail::describe_system<Pendulum>(os);
    else if (system == Cartpole::name)
        detail::describe_system<Cartpole>(os);
    else if (system == Quadcopter::name)
        detail::describe_system<Quadcopter>(os);
    else
        throw ConfigError("system", "unknown system '" + system + "' (expected pendulum, cartpole or quadcopter)");
}

} // namespace rs3::harness
