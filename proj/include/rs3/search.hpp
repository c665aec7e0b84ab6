#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rs3/belief.hpp"
#include "rs3/dynamics.hpp"
#include "rs3/log.hpp"
#include "rs3/parallel.hpp"
#include "rs3/risk.hpp"
#include "rs3/rng.hpp"
#include "rs3/sampling.hpp"
#include "rs3/shaping.hpp"

namespace rs3 {

enum class ScheduleKind { stochastic_approximation, constant };

/// Step sizes alpha^k = a / (b + k)^c. With c in (0.5, 1] the sequence is
/// positive, vanishes and has a divergent sum. The constant kind returns a
/// for every k and carries no such guarantee.
struct StepSchedule {
    ScheduleKind kind = ScheduleKind::stochastic_approximation;
    double a = 1.0;
    double b = 10.0;
    double c = 0.6;

    void validate() const
    {
        if (!(a > 0.0))
            throw std::invalid_argument("schedule a must be positive");
        if (kind == ScheduleKind::stochastic_approximation) {
            if (!(b >= 0.0))
                throw std::invalid_argument("schedule b must be nonnegative");
            if (!(c > 0.5 && c <= 1.0))
                throw std::invalid_argument("schedule c must lie in (0.5, 1]");
        }
    }

    double alpha(std::size_t k) const
    {
        if (kind == ScheduleKind::constant)
            return a;
        // b + k must be positive; k starts at 0 so shift b = 0 by one
        const double base = b + static_cast<double>(k) + (b == 0.0 ? 1.0 : 0.0);
        return a / std::pow(base, c);
    }
};

struct SearchConfig {
    std::size_t n_policies = 64;
    std::size_t n_uncertainty = 16;
    std::size_t iterations = 4;
    RiskLevel level{0.9};
    ShapeSpec shape;
    StepSchedule schedule;
    bool polyak = true;
    /// Share the process-noise path of uncertainty sample m across all
    /// policies (stream key (k, m) instead of (k, n, m)).
    bool common_random_numbers = false;
    std::size_t workers = 1;

    void validate() const
    {
        if (n_policies < 2)
            throw std::invalid_argument("n_policies must be at least 2");
        if (n_uncertainty < 1)
            throw std::invalid_argument("n_uncertainty must be at least 1");
        shape.validate();
        schedule.validate();
    }
};

struct IterationReport {
    std::size_t iteration = 0;
    double alpha = 0.0;
    std::vector<double> cvars;
    double weight_entropy = 0.0;
    double delta_norm = 0.0;
    std::size_t nonfinite = 0;
};

/// C_n = empirical CVaR of row n.
inline std::vector<double> evaluate_policy_cvars(const CostSamples& costs, RiskLevel level)
{
    if (!costs.all_finite())
        throw std::invalid_argument("cost samples must be finite");
    std::vector<double> out(costs.rows());
    for (std::size_t n = 0; n < costs.rows(); ++n)
        out[n] = empirical_cvar(costs.row(n), level);
    return out;
}

/// Estimated gradient of the log-shaped objective with respect to the
/// natural parameters (up to the constant Sigma):
/// g_t = sum_n w_n (T(eta_t^n) - grad A(theta_t)), w = S(-C) / sum S(-C).
/// Reduction runs in policy order.
inline Eigen::MatrixXd estimate_gradient(const NaturalParams& params, std::span<const PolicyDraw> draws,
                                         std::span<const double> weights)
{
    if (draws.size() != weights.size() || draws.empty())
        throw std::invalid_argument("need one weight per policy draw");
    double total = 0.0;
    for (double w : weights)
        total += w;
    if (!(total > 0.0) || !std::isfinite(total))
        throw std::runtime_error("all shape weights are zero");
    const Eigen::MatrixXd expected = grad_log_partition(params);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(params.horizon(), params.control_dim());
    for (std::size_t n = 0; n < draws.size(); ++n)
        g += (weights[n] / total) * (sufficient_statistic(draws[n]) - expected);
    return g;
}

inline NaturalParams gradient_step(const NaturalParams& params, std::span<const PolicyDraw> draws,
                                   std::span<const double> cvars, const ShapeSpec& spec, double alpha)
{
    if (!(alpha > 0.0))
        throw std::invalid_argument("step size must be positive");
    if (draws.size() != cvars.size())
        throw std::invalid_argument("need one CVaR value per policy draw");
    std::vector<double> y(cvars.size());
    std::transform(cvars.begin(), cvars.end(), y.begin(), [](double c) { return -c; });
    const auto w = shape_weights(y, spec);
    NaturalParams next = params;
    next.means += alpha * estimate_gradient(params, draws, w);
    return next;
}

/// Arithmetic mean of the iterates.
inline Eigen::MatrixXd polyak_average(std::span<const Eigen::MatrixXd> history)
{
    if (history.empty())
        throw std::invalid_argument("polyak average of an empty history");
    Eigen::MatrixXd sum = history.front();
    for (std::size_t i = 1; i < history.size(); ++i)
        sum += history[i];
    return sum / static_cast<double>(history.size());
}

/// Running form of polyak_average.
class PolyakAverager {
public:
    void add(const Eigen::MatrixXd& iterate)
    {
        if (count_ == 0)
            mean_ = iterate;
        else
            mean_ += (iterate - mean_) / static_cast<double>(count_ + 1);
        ++count_;
    }

    std::size_t count() const noexcept { return count_; }
    const Eigen::MatrixXd& mean() const noexcept { return mean_; }

private:
    Eigen::MatrixXd mean_;
    std::size_t count_ = 0;
};

/// Replace non-finite entries by ten times the largest finite cost.
/// Returns the number of replaced entries.
inline std::size_t penalize_nonfinite(CostSamples& costs)
{
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t bad = 0;
    for (double v : costs.data()) {
        if (std::isfinite(v))
            worst = std::max(worst, v);
        else
            ++bad;
    }
    if (bad == 0)
        return 0;
    if (!std::isfinite(worst))
        throw std::runtime_error("every rollout in the batch diverged");
    const double penalty = worst > 0.0 ? 10.0 * worst : 1.0;
    for (double& v : costs.data())
        if (!std::isfinite(v))
            v = penalty;
    return bad;
}

template <System Env>
struct SearchResult {
    NaturalParams iterate;
    NaturalParams polyak;
    std::vector<IterationReport> reports;
    std::size_t nonfinite = 0;
};

/// Hook to replace the uncertainty samples before iteration k.
template <System Env>
using SampleRedraw = std::function<void(std::size_t k, std::vector<UncertaintySample<Env>>&)>;

/// K iterations of: sample N policies, roll each against all M uncertainty
/// samples with independent noise streams keyed (k, n, m), take row-wise
/// CVaR, and step the means. Returns the last iterate and the Polyak mean
/// of the iterates.
template <System Env>
SearchResult<Env> optimize(const SearchConfig& config, const NaturalParams& params,
                           std::vector<UncertaintySample<Env>> samples, const Env& env,
                           const QuadraticCost<Env>& cost, StreamKey key, const SampleRedraw<Env>& redraw = {})
{
    config.validate();
    params.validate();
    if (samples.size() != config.n_uncertainty)
        throw std::invalid_argument("expected " + std::to_string(config.n_uncertainty) + " uncertainty samples");
    if (params.control_dim() != Env::kControlDim)
        throw std::invalid_argument("parameter control dimension does not match the system");

    const ControlBox box = env.box();
    const std::size_t n_pol = config.n_policies;
    const std::size_t n_unc = config.n_uncertainty;

    SearchResult<Env> result{params, params, {}, 0};
    PolyakAverager average;
    CostSamples costs(n_pol, n_unc);

    for (std::size_t k = 0; k < config.iterations; ++k) {
        if (redraw)
            redraw(k, samples);
        const auto draws = sample_policies(result.iterate, box, n_pol, key.child({k, 0}));
        const StreamKey noise_key = key.child({k, 1});

        parallel_for(n_pol * n_unc, config.workers, [&](std::size_t idx) {
            const std::size_t n = idx / n_unc;
            const std::size_t m = idx % n_unc;
            costs(n, m) = rollout_cost(env, cost, draws[n].controls, samples[m].x, samples[m].phi,
                                       noise_key.child({config.common_random_numbers ? 0 : n, m}));
        });

        IterationReport report;
        report.iteration = k;
        report.alpha = config.schedule.alpha(k);
        report.nonfinite = penalize_nonfinite(costs);
        result.nonfinite += report.nonfinite;
        report.cvars = evaluate_policy_cvars(costs, config.level);

        std::vector<double> y(n_pol);
        std::transform(report.cvars.begin(), report.cvars.end(), y.begin(), [](double c) { return -c; });
        const auto weights = shape_weights(y, config.shape);
        const Eigen::MatrixXd g = estimate_gradient(result.iterate, draws, weights);
        const Eigen::MatrixXd delta = report.alpha * g;
        result.iterate.means += delta;
        report.delta_norm = delta.norm();

        double total = 0.0;
        for (double w : weights)
            total += w;
        for (double w : weights)
            if (w > 0.0)
                report.weight_entropy -= (w / total) * std::log(w / total);

        average.add(result.iterate.means);
        result.reports.push_back(std::move(report));
    }

    if (average.count() > 0 && config.polyak)
        result.polyak.means = average.mean();
    else
        result.polyak = result.iterate;
    return result;
}

} // namespace rs3
