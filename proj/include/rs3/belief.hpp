#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "rs3/dynamics.hpp"
#include "rs3/log.hpp"
#include "rs3/rng.hpp"

namespace rs3 {

/// One (initial state, parameter) realization handed to the optimizer.
template <System Env>
struct UncertaintySample {
    typename Env::State x;
    typename Env::Params phi;
};

/// Diagonal-Gaussian prior over the initial state and the estimated
/// parameter components. Zero variances are allowed (point masses).
struct GaussianPrior {
    Eigen::VectorXd state_mean;
    Eigen::VectorXd state_var;
    Eigen::VectorXd param_mean;
    Eigen::VectorXd param_var;
};

struct FilterConfig {
    std::size_t particle_count = 1000;
    /// Indices into the system's parameter vector that are estimated. The
    /// augmented particle is y = [x, phi[estimated]].
    std::vector<int> estimated;
    /// Variances of the artificial process noise on y (size n_x + |estimated|).
    Eigen::VectorXd artificial_noise_var;
    /// Variances of the additive measurement noise on the full state.
    Eigen::VectorXd measurement_noise_var;
    /// Resample when ESS < threshold * particle_count.
    double resample_threshold = 0.5;
    /// Reflect estimated parameters at zero to keep them positive.
    bool reflect_positive = false;

    void validate(int state_dim, int param_dim) const
    {
        if (particle_count < 2)
            throw std::invalid_argument("particle_count must be at least 2");
        for (int idx : estimated)
            if (idx < 0 || idx >= param_dim)
                throw std::invalid_argument("estimated parameter index out of range");
        const auto aug = static_cast<Eigen::Index>(state_dim + static_cast<int>(estimated.size()));
        if (artificial_noise_var.size() != aug)
            throw std::invalid_argument("artificial_noise_var must cover the augmented state");
        if (measurement_noise_var.size() != state_dim)
            throw std::invalid_argument("measurement_noise_var must cover the state");
        if ((artificial_noise_var.array() < 0.0).any())
            throw std::invalid_argument("artificial noise variances must be nonnegative");
        if (!(measurement_noise_var.array() > 0.0).all())
            throw std::invalid_argument("measurement noise variances must be positive");
        if (!(resample_threshold > 0.0 && resample_threshold <= 1.0))
            throw std::invalid_argument("resample_threshold must lie in (0, 1]");
    }
};

/// Weighted mean and standard deviation of the augmented belief. Angular
/// state components use the circular mean.
struct BeliefSummary {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;
};

/// Bootstrap particle filter over y = [x, phi_est] with artificial process
/// noise (phi follows a random walk) and a full-state Gaussian observation.
template <System Env>
class ParticleFilter {
public:
    using State = typename Env::State;
    using Control = typename Env::Control;
    using Params = typename Env::Params;
    static constexpr int kStateDim = Env::kStateDim;

    ParticleFilter(const Env& model, FilterConfig config, const GaussianPrior& prior, StreamKey key)
        : model_(model), config_(std::move(config))
    {
        config_.validate(kStateDim, Env::kParamDim);
        const auto n_est = static_cast<Eigen::Index>(config_.estimated.size());
        if (prior.state_mean.size() != kStateDim || prior.state_var.size() != kStateDim ||
            prior.param_mean.size() != n_est || prior.param_var.size() != n_est)
            throw std::invalid_argument("prior dimensions do not match the filter");
        if ((prior.state_var.array() < 0.0).any() || (prior.param_var.array() < 0.0).any())
            throw std::invalid_argument("prior variances must be nonnegative");

        const auto count = static_cast<Eigen::Index>(config_.particle_count);
        particles_.resize(augmented_dim(), count);
        weights_ = Eigen::VectorXd::Constant(count, 1.0 / static_cast<double>(count));

        Eigen::VectorXd mean(augmented_dim()), sd(augmented_dim());
        mean << prior.state_mean, prior.param_mean;
        sd << prior.state_var.cwiseSqrt(), prior.param_var.cwiseSqrt();
        Rng rng(key);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index i = 0; i < count; ++i) {
            for (Eigen::Index d = 0; d < augmented_dim(); ++d)
                particles_(d, i) = sd[d] > 0.0 ? mean[d] + sd[d] * normal(rng) : mean[d];
            normalize_column(i);
        }
    }

    Eigen::Index augmented_dim() const noexcept
    {
        return kStateDim + static_cast<Eigen::Index>(config_.estimated.size());
    }
    std::size_t size() const noexcept { return config_.particle_count; }
    const Eigen::MatrixXd& particles() const noexcept { return particles_; }
    const Eigen::VectorXd& weights() const noexcept { return weights_; }
    const FilterConfig& config() const noexcept { return config_; }
    std::size_t degenerate_updates() const noexcept { return degenerate_; }
    std::size_t resample_count() const noexcept { return resamples_; }

    State state(Eigen::Index i) const { return particles_.col(i).template head<kStateDim>(); }

    /// Full parameter vector of particle i: the model's nominal values with
    /// the estimated components overlaid.
    Params params(Eigen::Index i) const
    {
        Params p = model_.params;
        for (std::size_t k = 0; k < config_.estimated.size(); ++k)
            p[config_.estimated[k]] = particles_(kStateDim + static_cast<Eigen::Index>(k), i);
        return p;
    }

    /// Propagate every particle through the noise-free model with its own
    /// parameters, then add artificial noise to the augmented vector.
    void predict(const Control& u, StreamKey key)
    {
        const Control applied = u.cwiseMax(model_.control_lower).cwiseMin(model_.control_upper);
        const Eigen::VectorXd sd = config_.artificial_noise_var.cwiseSqrt();
        std::normal_distribution<double> normal(0.0, 1.0);
        bool lost = false;
        for (Eigen::Index i = 0; i < particles_.cols(); ++i) {
            const State next = model_.propagate(state(i), applied, params(i));
            particles_.col(i).template head<kStateDim>() = next;
            Rng rng(key.child(static_cast<std::uint64_t>(i)));
            for (Eigen::Index d = 0; d < augmented_dim(); ++d)
                if (sd[d] > 0.0)
                    particles_(d, i) += sd[d] * normal(rng);
            normalize_column(i);
            if (!particles_.col(i).allFinite()) {
                particles_.col(i).setZero();
                weights_[i] = 0.0;
                lost = true;
            }
        }
        if (lost)
            renormalize(key.child(~0ULL));
    }

    /// Reweight by the Gaussian likelihood of z given each particle's state,
    /// in the log domain, then resample systematically if ESS drops below
    /// the configured fraction.
    void update(const State& z, StreamKey key)
    {
        const Eigen::VectorXd inv_var = config_.measurement_noise_var.cwiseInverse();
        const Eigen::Index count = particles_.cols();
        Eigen::VectorXd logw(count);
        for (Eigen::Index i = 0; i < count; ++i) {
            if (weights_[i] <= 0.0) {
                logw[i] = -std::numeric_limits<double>::infinity();
                continue;
            }
            const State r = state_error<Env>(z, state(i));
            logw[i] = std::log(weights_[i]) - 0.5 * r.cwiseAbs2().dot(inv_var);
        }
        const double top = logw.maxCoeff();
        if (!std::isfinite(top)) {
            reset_uniform_weights();
            resample(key);
            return;
        }
        for (Eigen::Index i = 0; i < count; ++i)
            weights_[i] = std::exp(logw[i] - top);
        renormalize(key);
        if (effective_sample_size() < config_.resample_threshold * static_cast<double>(count))
            resample(key);
    }

    double effective_sample_size() const { return 1.0 / weights_.squaredNorm(); }

    /// Systematic (low-variance) resampling to equal weights.
    void resample(StreamKey key)
    {
        const Eigen::Index count = particles_.cols();
        Rng rng(key.child(0x5e5a3b1eULL));
        const double step = 1.0 / static_cast<double>(count);
        const double offset = rng.uniform01() * step;
        Eigen::MatrixXd next(particles_.rows(), count);
        double cumulative = weights_[0];
        Eigen::Index src = 0;
        for (Eigen::Index i = 0; i < count; ++i) {
            const double position = offset + static_cast<double>(i) * step;
            while (position > cumulative && src < count - 1)
                cumulative += weights_[++src];
            next.col(i) = particles_.col(src);
        }
        particles_ = std::move(next);
        weights_.setConstant(step);
        ++resamples_;
    }

    /// M draws with replacement, proportional to weight.
    std::vector<UncertaintySample<Env>> draw_uncertainty_samples(std::size_t m, StreamKey key) const
    {
        if (m == 0)
            throw std::invalid_argument("need at least one uncertainty sample");
        std::vector<double> cdf(static_cast<std::size_t>(weights_.size()));
        double acc = 0.0;
        for (Eigen::Index i = 0; i < weights_.size(); ++i)
            cdf[static_cast<std::size_t>(i)] = (acc += weights_[i]);
        Rng rng(key);
        std::vector<UncertaintySample<Env>> out;
        out.reserve(m);
        for (std::size_t k = 0; k < m; ++k) {
            const double u = rng.uniform01() * acc;
            auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
            auto idx = static_cast<Eigen::Index>(std::min<std::ptrdiff_t>(it - cdf.begin(), weights_.size() - 1));
            out.push_back({state(idx), params(idx)});
        }
        return out;
    }

    BeliefSummary summary() const
    {
        const Eigen::Index dim = augmented_dim();
        BeliefSummary s{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim)};
        for (Eigen::Index d = 0; d < dim; ++d) {
            const bool angular = d < kStateDim && Env::angular[static_cast<std::size_t>(d)];
            if (angular) {
                double sn = 0.0, cs = 0.0;
                for (Eigen::Index i = 0; i < particles_.cols(); ++i) {
                    sn += weights_[i] * std::sin(particles_(d, i));
                    cs += weights_[i] * std::cos(particles_(d, i));
                }
                s.mean[d] = std::atan2(sn, cs);
                double var = 0.0;
                for (Eigen::Index i = 0; i < particles_.cols(); ++i) {
                    const double e = wrap_angle(particles_(d, i) - s.mean[d]);
                    var += weights_[i] * e * e;
                }
                s.stddev[d] = std::sqrt(var);
            } else {
                s.mean[d] = particles_.row(d).dot(weights_);
                const double var = (particles_.row(d).array() - s.mean[d]).square().matrix().dot(weights_);
                s.stddev[d] = std::sqrt(std::max(var, 0.0));
            }
        }
        return s;
    }

private:
    void normalize_column(Eigen::Index i)
    {
        particles_.col(i).template head<kStateDim>() = model_.normalize(state(i));
        if (config_.reflect_positive)
            for (Eigen::Index d = kStateDim; d < augmented_dim(); ++d)
                particles_(d, i) = std::abs(particles_(d, i));
    }

    void reset_uniform_weights()
    {
        weights_.setConstant(1.0 / static_cast<double>(weights_.size()));
        ++degenerate_;
        warn("particle weights degenerated; reset to uniform");
    }

    void renormalize(StreamKey key)
    {
        const double total = weights_.sum();
        if (!(total > 0.0) || !std::isfinite(total)) {
            reset_uniform_weights();
            resample(key);
            return;
        }
        weights_ /= total;
    }

    Env model_;
    FilterConfig config_;
    Eigen::MatrixXd particles_;
    Eigen::VectorXd weights_;
    std::size_t degenerate_ = 0;
    std::size_t resamples_ = 0;
};

} // namespace rs3
