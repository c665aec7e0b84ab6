#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Core>

#include "rs3/belief.hpp"
#include "rs3/dynamics.hpp"

namespace rs3 {

/// Prior and ground truth for one unknown model parameter.
struct ParameterPrior {
    int index = 0;
    double mean = 0.0;
    double var = 0.0;
    double true_value = 0.0;
};

/// Shipped constants for one system: plant, cost, start/target, and the
/// belief-space settings (priors, measurement noise, artificial process
/// noise) for each uncertainty mode. All noise entries are variances.
template <System Env>
struct SystemDefaults {
    Env env;
    QuadraticCost<Env> cost;
    typename Env::State x0;
    /// Initial-state distribution when the start is uncertain.
    typename Env::State initial_state_var;
    /// Initial-state spread used alongside parameter estimation.
    typename Env::State estimation_state_var;
    ParameterPrior parameter;
    Eigen::VectorXd measurement_var;
    Eigen::VectorXd estimation_measurement_var;
    /// Artificial noise on [x, phi] when the parameter is estimated.
    Eigen::VectorXd artificial_var_est;
    /// Artificial noise on [x, phi] otherwise; the last entry belongs to the
    /// (unestimated) parameter.
    Eigen::VectorXd artificial_var_no_est;
    /// Control-channel noise standard deviation for the stochastic-dynamics
    /// belief experiments.
    typename Env::Control stochastic_noise_std;
};

template <System Env>
SystemDefaults<Env> default_spec();

template <>
inline SystemDefaults<Pendulum> default_spec<Pendulum>()
{
    SystemDefaults<Pendulum> d;
    d.cost.q << 3.0, 0.01;
    d.cost.r << 0.01;
    d.cost.target << 0.0, 0.0;
    d.x0 << -std::numbers::pi, 0.0;
    d.initial_state_var << 0.5, 0.5;
    d.estimation_state_var << 0.1, 0.1;
    d.parameter = {Pendulum::kMass, 5.0, 4.0, 2.0};
    d.measurement_var = Eigen::Vector2d(0.7, 0.3);
    d.estimation_measurement_var = Eigen::Vector2d(1.0, 1.0);
    d.artificial_var_est = Eigen::Vector3d(1e-5, 1e-5, 1e-9);
    d.artificial_var_no_est = Eigen::Vector3d(0.2, 0.2, 0.0);
    d.stochastic_noise_std << 3.0;
    return d;
}

template <>
inline SystemDefaults<Cartpole> default_spec<Cartpole>()
{
    SystemDefaults<Cartpole> d;
    d.cost.q << 0.01, 0.1, 1.0, 0.1;
    d.cost.r << 0.001;
    d.cost.target.setZero();
    d.x0 << 0.0, 0.0, -std::numbers::pi, 0.0;
    d.initial_state_var << 0.5, 0.5, 0.08, 0.05;
    d.estimation_state_var.setConstant(1e-4);
    d.parameter = {Cartpole::kPoleMass, 5.0, 5.0, 0.1};
    d.measurement_var = (Eigen::VectorXd(4) << 1.0, 1.0, 0.25, 0.25).finished();
    d.estimation_measurement_var = d.measurement_var;
    d.artificial_var_est = (Eigen::VectorXd(5) << 0.001, 0.001, 0.001, 0.001, 1e-6).finished();
    // the shipped no-estimation matrix lists six entries for a five-entry
    // augmented state; the extra trailing zero is dropped
    d.artificial_var_no_est = (Eigen::VectorXd(5) << 0.1, 0.3, 0.3, 0.2, 1e-6).finished();
    d.stochastic_noise_std << 1.0;
    return d;
}

template <>
inline SystemDefaults<Quadcopter> default_spec<Quadcopter>()
{
    SystemDefaults<Quadcopter> d;
    d.cost.q << 5.0, 5.0, 5.0, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0, 0.1, 0.1, 0.1;
    d.cost.r << 0.0, 0.01, 0.01, 0.01;
    d.cost.target.setZero();
    d.cost.target.head<3>().setConstant(2.0);
    d.x0.setZero();
    d.initial_state_var << 0.3, 0.3, 0.3, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2;
    d.estimation_state_var.setConstant(1e-4);
    d.parameter = {Quadcopter::kDrag, 0.5, 0.5, 0.1};
    d.measurement_var =
        (Eigen::VectorXd(12) << 0.1, 0.1, 0.1, 0.01, 0.01, 0.01, 0.08, 0.08, 0.08, 0.01, 0.1, 0.01).finished();
    d.estimation_measurement_var = d.measurement_var;
    d.artificial_var_est = (Eigen::VectorXd(13) << 0.02, 0.02, 0.02, 0.03, 0.03, 0.03, 0.04, 0.04, 0.04, 0.04,
                            0.04, 0.04, 0.001)
                               .finished();
    d.artificial_var_no_est = (Eigen::VectorXd(13) << 0.05, 0.05, 0.05, 0.03, 0.03, 0.003, 0.04, 0.04, 0.04,
                               0.04, 0.04, 0.04, 1e-9)
                                  .finished();
    d.stochastic_noise_std << 1.0, 1.0, 1.0, std::sqrt(0.1);
    return d;
}

using AnyDefaults =
    std::variant<SystemDefaults<Pendulum>, SystemDefaults<Cartpole>, SystemDefaults<Quadcopter>>;

/// Default table entry by system name.
inline AnyDefaults default_specs(std::string_view system)
{
    if (system == Pendulum::name) return default_spec<Pendulum>();
    if (system == Cartpole::name) return default_spec<Cartpole>();
    if (system == Quadcopter::name) return default_spec<Quadcopter>();
    throw std::invalid_argument("unknown system '" + std::string(system) + "'");
}

} // namespace rs3
