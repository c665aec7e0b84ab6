#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rs3/belief.hpp"
#include "rs3/dynamics.hpp"
#include "rs3/rng.hpp"
#include "rs3/sampling.hpp"
#include "rs3/search.hpp"

namespace rs3 {

enum class ShiftFill { copy_last, zeros };
enum class ExecuteMode { mean, sampled };

struct MpcConfig {
    std::size_t execute_steps = 1;
    std::size_t episode_length = 100;
    std::size_t horizon = 30;
    bool warm_start = true;
    ShiftFill fill = ShiftFill::copy_last;
    ExecuteMode execute = ExecuteMode::mean;
    /// Draw fresh uncertainty samples from the belief before every inner
    /// iteration instead of once per MPC step.
    bool redraw_per_iteration = false;
    /// Inner iterations for the first MPC step, which starts from cold
    /// means. Zero uses search.iterations.
    std::size_t warmup_iterations = 0;
    /// Exploration standard deviation per control channel.
    Eigen::VectorXd fixed_std;
    SearchConfig search;

    void validate(int control_dim) const
    {
        if (horizon < 1)
            throw std::invalid_argument("horizon must be at least 1");
        if (execute_steps < 1 || execute_steps > horizon)
            throw std::invalid_argument("execute_steps must lie in [1, horizon]");
        if (episode_length < 1)
            throw std::invalid_argument("episode_length must be at least 1");
        if (fixed_std.size() != control_dim || !(fixed_std.array() > 0.0).all())
            throw std::invalid_argument("fixed_std must be positive with one entry per control channel");
        search.validate();
    }
};

/// Receding-horizon shift: means_t <- means_{t+tau}; the trailing tau rows
/// are refilled by copying the last row (or zeroed).
inline NaturalParams shift(const NaturalParams& params, std::size_t tau, ShiftFill fill = ShiftFill::copy_last)
{
    const auto horizon = static_cast<std::size_t>(params.horizon());
    if (tau > horizon)
        throw std::invalid_argument("shift larger than the horizon");
    if (tau == 0)
        return params;
    NaturalParams out = params;
    const auto keep = static_cast<Eigen::Index>(horizon - tau);
    const auto t = static_cast<Eigen::Index>(tau);
    out.means.topRows(keep) = params.means.bottomRows(keep);
    if (fill == ShiftFill::copy_last)
        out.means.bottomRows(t).rowwise() = params.means.row(params.horizon() - 1);
    else
        out.means.bottomRows(t).setZero();
    return out;
}

/// Particle filter setup for one episode.
struct BeliefSetup {
    FilterConfig filter;
    GaussianPrior prior;
};

/// Everything logged over one closed-loop episode. Row t of the state and
/// belief matrices is the situation before control t is applied; row L is
/// the final state. stage_costs[t] = l(x_t, u_t) for t < L and the
/// terminal cost at t = L.
struct EpisodeRecord {
    Eigen::MatrixXd states;       // (L+1) x n_x
    Eigen::MatrixXd controls;     // L x n_u, as applied to the plant
    Eigen::MatrixXd observations; // (L+1) x n_x, row 0 is NaN
    Eigen::MatrixXd belief_mean;  // (L+1) x n_aug
    Eigen::MatrixXd belief_band;  // (L+1) x n_aug, three standard deviations
    std::vector<double> stage_costs;
    double total_cost = 0.0;
    std::size_t nonfinite_rollouts = 0;
    std::size_t filter_resets = 0;
    std::vector<std::string> belief_names;
};

template <System Env>
std::vector<std::string> belief_names(const std::vector<int>& estimated)
{
    std::vector<std::string> names(Env::state_names.begin(), Env::state_names.end());
    for (int idx : estimated)
        names.emplace_back(Env::param_names[static_cast<std::size_t>(idx)]);
    return names;
}

/// Closed-loop episode: draw M samples from the belief, optimize, apply the
/// first tau controls of the Polyak mean to the true plant, observe,
/// filter, shift, repeat. Without a belief setup the controller sees the
/// true state and its model's nominal parameters.
///
/// `truth` carries the true parameters and plant noise; `model` is what the
/// controller and the filter believe (nominal parameters, rollout noise).
template <System Env>
EpisodeRecord run_episode(const Env& truth, const Env& model, const QuadraticCost<Env>& cost,
                          const typename Env::State& x0, const MpcConfig& mpc,
                          const std::optional<BeliefSetup>& belief, StreamKey root)
{
    using State = typename Env::State;
    using Control = typename Env::Control;
    mpc.validate(Env::kControlDim);

    const std::size_t length = mpc.episode_length;
    const std::size_t nx = Env::kStateDim;
    const std::vector<int> estimated = belief ? belief->filter.estimated : std::vector<int>{};
    const auto n_aug = static_cast<Eigen::Index>(nx + estimated.size());

    std::optional<ParticleFilter<Env>> filter;
    if (belief)
        filter.emplace(model, belief->filter, belief->prior, root.child(1));

    EpisodeRecord rec;
    rec.states = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(length + 1), Env::kStateDim);
    rec.controls = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(length), Env::kControlDim);
    rec.observations = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(length + 1), Env::kStateDim,
                                                 std::numeric_limits<double>::quiet_NaN());
    rec.belief_mean = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(length + 1), n_aug);
    rec.belief_band = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(length + 1), n_aug);
    rec.stage_costs.assign(length + 1, 0.0);
    rec.belief_names = belief_names<Env>(estimated);

    auto record_belief = [&](std::size_t t, const State& x_true) {
        const auto row = static_cast<Eigen::Index>(t);
        if (filter) {
            const auto s = filter->summary();
            rec.belief_mean.row(row) = s.mean.transpose();
            rec.belief_band.row(row) = 3.0 * s.stddev.transpose();
        } else {
            rec.belief_mean.row(row) = x_true.transpose();
        }
    };

    NaturalParams iterate(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mpc.horizon), Env::kControlDim),
                          mpc.fixed_std);
    const ControlBox box = model.box();
    const Eigen::VectorXd meas_sd =
        belief ? Eigen::VectorXd(belief->filter.measurement_noise_var.cwiseSqrt())
               : Eigen::VectorXd(Eigen::VectorXd::Zero(Env::kStateDim));

    State x = truth.normalize(x0);
    rec.states.row(0) = x.transpose();
    record_belief(0, x);

    std::size_t t = 0;
    while (t < length) {
        const StreamKey step_key = root.child({2, t});
        std::vector<UncertaintySample<Env>> samples;
        SampleRedraw<Env> redraw;
        if (filter) {
            samples = filter->draw_uncertainty_samples(mpc.search.n_uncertainty, step_key.child(0));
            if (mpc.redraw_per_iteration)
                redraw = [&](std::size_t k, std::vector<UncertaintySample<Env>>& s) {
                    if (k > 0)
                        s = filter->draw_uncertainty_samples(mpc.search.n_uncertainty, step_key.child({0, k}));
                };
        } else {
            samples.assign(mpc.search.n_uncertainty, UncertaintySample<Env>{x, model.params});
        }

        SearchConfig search = mpc.search;
        if (t == 0 && mpc.warmup_iterations > 0)
            search.iterations = mpc.warmup_iterations;
        const auto result = optimize(search, iterate, std::move(samples), model, cost, step_key.child(1), redraw);
        rec.nonfinite_rollouts += result.nonfinite;

        Eigen::MatrixXd plan = result.polyak.means;
        if (mpc.execute == ExecuteMode::sampled) {
            Rng rng(step_key.child(2));
            plan = sample_policy(result.polyak, box, rng).controls;
        }

        const std::size_t tau = std::min(mpc.execute_steps, length - t);
        for (std::size_t j = 0; j < tau; ++j, ++t) {
            const Control u = plan.row(static_cast<Eigen::Index>(j)).transpose().cwiseMax(model.control_lower)
                                  .cwiseMin(model.control_upper);
            ControlNoise<Env> plant_noise(truth, root.child({3, t}));
            const auto r = step(truth, x, u, truth.params, plant_noise.next());
            if (!r.finite)
                throw std::runtime_error("true plant state became non-finite at step " + std::to_string(t));
            rec.controls.row(static_cast<Eigen::Index>(t)) = r.applied.transpose();
            rec.stage_costs[t] = cost.stage(x, r.applied);
            x = r.state;
            rec.states.row(static_cast<Eigen::Index>(t + 1)) = x.transpose();

            if (filter) {
                Rng obs_rng(root.child({4, t}));
                std::normal_distribution<double> normal(0.0, 1.0);
                State z = x;
                for (int d = 0; d < Env::kStateDim; ++d)
                    z[d] += meas_sd[d] * normal(obs_rng);
                z = truth.normalize(z);
                rec.observations.row(static_cast<Eigen::Index>(t + 1)) = z.transpose();
                filter->predict(u, root.child({5, t}));
                filter->update(z, root.child({6, t}));
            }
            record_belief(t + 1, x);
        }

        if (mpc.warm_start)
            iterate = shift(result.iterate, tau, mpc.fill);
        else
            iterate.means.setZero();
    }

    rec.stage_costs[length] = cost.terminal(x);
    if (filter)
        rec.filter_resets = filter->degenerate_updates();
    for (double c : rec.stage_costs)
        rec.total_cost += c;
    return rec;
}

} // namespace rs3
