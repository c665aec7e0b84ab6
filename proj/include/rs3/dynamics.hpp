#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string_view>

#include <Eigen/Core>

#include "rs3/rng.hpp"
#include "rs3/sampling.hpp"

namespace rs3 {

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(a + std::numbers::pi, two_pi);
    if (w <= 0.0)
        w += two_pi;
    return w - std::numbers::pi;
}

/// Fields shared by every built-in system: step size, physical parameters,
/// control box and control-channel noise. This is the environment spec; the
/// system classes add the equations of motion.
template <int NX, int NU, int NP>
struct SystemSpec {
    static constexpr int kStateDim = NX;
    static constexpr int kControlDim = NU;
    static constexpr int kParamDim = NP;
    using State = Eigen::Matrix<double, NX, 1>;
    using Control = Eigen::Matrix<double, NU, 1>;
    using Params = Eigen::Matrix<double, NP, 1>;

    double dt = 0.05;
    Params params = Params::Zero();
    Control control_lower = Control::Constant(-1.0);
    Control control_upper = Control::Constant(1.0);
    /// Standard deviation of additive Gaussian noise on each control channel.
    Control control_noise_std = Control::Zero();

    ControlBox box() const { return ControlBox(control_lower, control_upper); }
};

/// Gym-style pendulum, theta = 0 upright. State (theta, theta_dot),
/// params (mass, length, gravity), control torque.
class Pendulum : public SystemSpec<2, 1, 3> {
public:
    enum : int { kMass = 0, kLength = 1, kGravity = 2 };
    static constexpr std::string_view name = "pendulum";
    static constexpr std::array<std::string_view, 2> state_names{"theta", "theta_dot"};
    static constexpr std::array<std::string_view, 1> control_names{"torque"};
    static constexpr std::array<std::string_view, 3> param_names{"mass", "length", "gravity"};
    static constexpr std::array<bool, 2> angular{true, false};

    double max_speed = 8.0;

    Pendulum()
    {
        dt = 0.05;
        params << 1.0, 1.0, 10.0;
        control_lower << -10.0;
        control_upper << 10.0;
    }

    void validate() const
    {
        if (!(dt > 0.0) || !(params[kLength] > 0.0) || !(params[kMass] > 0.0))
            throw std::invalid_argument("pendulum needs dt, mass and length > 0");
    }

    // Velocity is updated first and the angle uses the new velocity, as in
    // Gym's Pendulum-v1.
    State propagate(const State& x, const Control& u, const Params& p) const
    {
        const double m = p[kMass];
        const double l = p[kLength];
        const double g = p[kGravity];
        const double acc = 3.0 * g / (2.0 * l) * std::sin(x[0]) + 3.0 / (m * l * l) * u[0];
        const double vel = std::clamp(x[1] + acc * dt, -max_speed, max_speed);
        State next;
        next << wrap_angle(x[0] + vel * dt), vel;
        return next;
    }

    State normalize(State x) const
    {
        x[0] = wrap_angle(x[0]);
        return x;
    }
};

/// Cart-pole with continuous force and no termination, Gym equations with
/// explicit Euler. State (x, x_dot, theta, theta_dot) with theta = 0
/// upright; params (cart mass, pole mass, pole half-length, gravity).
class Cartpole : public SystemSpec<4, 1, 4> {
public:
    enum : int { kCartMass = 0, kPoleMass = 1, kHalfLength = 2, kGravity = 3 };
    static constexpr std::string_view name = "cartpole";
    static constexpr std::array<std::string_view, 4> state_names{"x", "x_dot", "theta", "theta_dot"};
    static constexpr std::array<std::string_view, 1> control_names{"force"};
    static constexpr std::array<std::string_view, 4> param_names{"cart_mass", "pole_mass", "half_length",
                                                                 "gravity"};
    static constexpr std::array<bool, 4> angular{false, false, true, false};

    Cartpole()
    {
        dt = 0.02;
        params << 1.0, 0.1, 0.5, 9.8;
        control_lower << -15.0;
        control_upper << 15.0;
    }

    void validate() const
    {
        if (!(dt > 0.0) || !(params[kCartMass] > 0.0) || !(params[kPoleMass] > 0.0) ||
            !(params[kHalfLength] > 0.0))
            throw std::invalid_argument("cartpole needs dt, masses and length > 0");
    }

    State propagate(const State& s, const Control& u, const Params& p) const
    {
        const double mc = p[kCartMass];
        const double mp = p[kPoleMass];
        const double l = p[kHalfLength];
        const double g = p[kGravity];
        const double total = mc + mp;
        const double pml = mp * l;
        const double c = std::cos(s[2]);
        const double sn = std::sin(s[2]);
        const double temp = (u[0] + pml * s[3] * s[3] * sn) / total;
        const double theta_acc = (g * sn - c * temp) / (l * (4.0 / 3.0 - mp * c * c / total));
        const double x_acc = temp - pml * theta_acc * c / total;
        State next;
        next << s[0] + dt * s[1], s[1] + dt * x_acc, wrap_angle(s[2] + dt * s[3]), s[3] + dt * theta_acc;
        return next;
    }

    State normalize(State x) const
    {
        x[2] = wrap_angle(x[2]);
        return x;
    }
};

/// 12-state rigid-body quadrotor, z up. State (position, linear velocity,
/// roll/pitch/yaw, body rates); control (collective thrust, roll, pitch and
/// yaw torque); params (mass, drag, Ixx, Iyy, Izz, gravity). Translational
/// drag is -(drag/m) v.
class Quadcopter : public SystemSpec<12, 4, 6> {
public:
    enum : int { kMass = 0, kDrag = 1, kIxx = 2, kIyy = 3, kIzz = 4, kGravity = 5 };
    static constexpr std::string_view name = "quadcopter";
    static constexpr std::array<std::string_view, 12> state_names{
        "x", "y", "z", "vx", "vy", "vz", "roll", "pitch", "yaw", "roll_rate", "pitch_rate", "yaw_rate"};
    static constexpr std::array<std::string_view, 4> control_names{"thrust", "roll_torque", "pitch_torque",
                                                                   "yaw_torque"};
    static constexpr std::array<std::string_view, 6> param_names{"mass", "drag", "ixx", "iyy", "izz", "gravity"};
    static constexpr std::array<bool, 12> angular{};

    Quadcopter()
    {
        dt = 0.02;
        params << 1.0, 0.1, 0.5, 0.5, 1.0, 9.81;
        control_lower << 0.0, -10.0, -10.0, -1.0;
        control_upper << 20.0, 10.0, 10.0, 1.0;
    }

    void validate() const
    {
        if (!(dt > 0.0) || !(params[kMass] > 0.0) || !(params.segment<3>(kIxx).array() > 0.0).all())
            throw std::invalid_argument("quadcopter needs dt, mass and inertia > 0");
    }

    State propagate(const State& s, const Control& u, const Params& p) const
    {
        const double m = p[kMass];
        const double drag = p[kDrag];
        const double ixx = p[kIxx], iyy = p[kIyy], izz = p[kIzz];
        const double g = p[kGravity];

        const double cr = std::cos(s[6]), sr = std::sin(s[6]);
        const double cp = std::cos(s[7]), sp = std::sin(s[7]);
        const double cy = std::cos(s[8]), sy = std::sin(s[8]);
        const double thrust = u[0] / m;

        const double ax = thrust * (cr * sp * cy + sr * sy) - drag / m * s[3];
        const double ay = thrust * (cr * sp * sy - sr * cy) - drag / m * s[4];
        const double az = thrust * cr * cp - g - drag / m * s[5];

        const double pr = s[9], qr = s[10], rr = s[11];
        const double roll_dot = pr + (sr * qr + cr * rr) * sp / cp;
        const double pitch_dot = cr * qr - sr * rr;
        const double yaw_dot = (sr * qr + cr * rr) / cp;

        const double p_dot = (u[1] + (iyy - izz) * qr * rr) / ixx;
        const double q_dot = (u[2] + (izz - ixx) * pr * rr) / iyy;
        const double r_dot = (u[3] + (ixx - iyy) * pr * qr) / izz;

        State next = s;
        next.segment<3>(0) += dt * s.segment<3>(3);
        next[3] += dt * ax;
        next[4] += dt * ay;
        next[5] += dt * az;
        next[6] += dt * roll_dot;
        next[7] += dt * pitch_dot;
        next[8] += dt * yaw_dot;
        next[9] += dt * p_dot;
        next[10] += dt * q_dot;
        next[11] += dt * r_dot;
        return next;
    }

    State normalize(State x) const { return x; }
};

template <class E>
concept System = requires(const E& env, const typename E::State& x, const typename E::Control& u,
                          const typename E::Params& p) {
    { env.propagate(x, u, p) } -> std::same_as<typename E::State>;
    { env.normalize(x) } -> std::same_as<typename E::State>;
    { env.dt } -> std::convertible_to<double>;
    { env.control_noise_std } -> std::convertible_to<typename E::Control>;
    E::state_names.size();
    E::control_names.size();
    E::param_names.size();
};

/// Component-wise state error, wrapping angular components.
template <System Env>
typename Env::State state_error(const typename Env::State& x, const typename Env::State& target)
{
    typename Env::State e = x - target;
    for (int i = 0; i < Env::kStateDim; ++i)
        if (Env::angular[static_cast<std::size_t>(i)])
            e[i] = wrap_angle(e[i]);
    return e;
}

/// Diagonal quadratic cost l(x, u) = e^T Q e + u^T R u with e = x - target;
/// the terminal cost g equals l without the control term.
template <System Env>
struct QuadraticCost {
    using State = typename Env::State;
    using Control = typename Env::Control;

    State q = State::Zero();
    Control r = Control::Zero();
    State target = State::Zero();

    void validate() const
    {
        if ((q.array() < 0.0).any() || (r.array() < 0.0).any())
            throw std::invalid_argument("cost weights must be nonnegative");
    }

    double state_cost(const State& x) const
    {
        return state_error<Env>(x, target).cwiseAbs2().dot(q);
    }

    double stage(const State& x, const Control& u) const { return state_cost(x) + u.cwiseAbs2().dot(r); }

    double terminal(const State& x) const { return state_cost(x); }
};

template <System Env>
struct StepResult {
    typename Env::State state;
    typename Env::Control applied;
    bool clamped = false;
    bool finite = true;
};

/// One transition of the noisy plant: u_eff = clamp(u + noise .* std),
/// x' = f(x, u_eff; phi). `noise` holds standard-normal draws.
template <System Env>
StepResult<Env> step(const Env& env, const typename Env::State& x, const typename Env::Control& u,
                     const typename Env::Params& phi, const typename Env::Control& noise)
{
    StepResult<Env> r;
    r.clamped = (u.array() < env.control_lower.array()).any() || (u.array() > env.control_upper.array()).any();
    const typename Env::Control noisy = u + noise.cwiseProduct(env.control_noise_std);
    r.applied = noisy.cwiseMax(env.control_lower).cwiseMin(env.control_upper);
    r.state = env.propagate(x, r.applied, phi);
    r.finite = r.state.allFinite();
    return r;
}

/// Stateful per-stream sampler of control-channel noise. Consumes no random
/// numbers when the system is noise free.
template <System Env>
class ControlNoise {
public:
    ControlNoise(const Env& env, StreamKey key) : rng_(key), active_((env.control_noise_std.array() != 0.0).any())
    {
    }

    typename Env::Control next()
    {
        typename Env::Control n = Env::Control::Zero();
        if (active_)
            for (int j = 0; j < Env::kControlDim; ++j)
                n[j] = normal_(rng_);
        return n;
    }

private:
    Rng rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    bool active_;
};

template <System Env>
struct Trajectory {
    Eigen::MatrixXd states;   // (T+1) x n_x
    Eigen::MatrixXd controls; // T x n_u, as applied
    double cost = 0.0;
    bool finite = true;
    std::size_t clamped = 0;
};

/// Roll an open-loop control sequence forward and accumulate
/// sum_t l(x_t, u_t) + g(x_T). Returns +inf on a non-finite state.
template <System Env>
double rollout_cost(const Env& env, const QuadraticCost<Env>& cost, const Eigen::MatrixXd& controls,
                    const typename Env::State& x0, const typename Env::Params& phi, StreamKey noise_key)
{
    ControlNoise<Env> noise(env, noise_key);
    typename Env::State x = x0;
    double total = 0.0;
    for (Eigen::Index t = 0; t < controls.rows(); ++t) {
        const typename Env::Control u = controls.row(t).transpose();
        const auto r = step(env, x, u, phi, noise.next());
        total += cost.stage(x, r.applied);
        if (!r.finite)
            return std::numeric_limits<double>::infinity();
        x = r.state;
    }
    return total + cost.terminal(x);
}

/// As rollout_cost, keeping the state and applied-control logs.
template <System Env>
Trajectory<Env> rollout(const Env& env, const QuadraticCost<Env>& cost, const PolicyDraw& policy,
                        const typename Env::State& x0, const typename Env::Params& phi, StreamKey noise_key)
{
    const Eigen::Index horizon = policy.controls.rows();
    if (policy.controls.cols() != Env::kControlDim)
        throw std::invalid_argument("policy control dimension does not match the system");
    ControlNoise<Env> noise(env, noise_key);
    Trajectory<Env> traj;
    traj.states = Eigen::MatrixXd::Zero(horizon + 1, Env::kStateDim);
    traj.controls = Eigen::MatrixXd::Zero(horizon, Env::kControlDim);
    typename Env::State x = x0;
    traj.states.row(0) = x.transpose();
    for (Eigen::Index t = 0; t < horizon; ++t) {
        const typename Env::Control u = policy.controls.row(t).transpose();
        const auto r = step(env, x, u, phi, noise.next());
        traj.controls.row(t) = r.applied.transpose();
        traj.cost += cost.stage(x, r.applied);
        traj.clamped += r.clamped ? 1 : 0;
        x = r.state;
        traj.states.row(t + 1) = x.transpose();
        if (!r.finite) {
            traj.finite = false;
            traj.cost = std::numeric_limits<double>::infinity();
            traj.states.conservativeResize(t + 2, Eigen::NoChange);
            traj.controls.conservativeResize(t + 1, Eigen::NoChange);
            return traj;
        }
    }
    traj.cost += cost.terminal(x);
    return traj;
}

} // namespace rs3
