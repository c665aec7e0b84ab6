#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <boost/math/special_functions/erf.hpp>

#include "rs3/log.hpp"
#include "rs3/rng.hpp"

namespace rs3 {

/// Box constraint on each control channel.
struct ControlBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    ControlBox() = default;
    ControlBox(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi))
    {
        if (lower.size() != upper.size() || lower.size() == 0)
            throw std::invalid_argument("control box bounds must have equal, nonzero size");
        for (Eigen::Index j = 0; j < lower.size(); ++j)
            if (!(lower[j] < upper[j]))
                throw std::invalid_argument("control box needs lower < upper on every channel");
    }

    Eigen::Index dim() const noexcept { return lower.size(); }

    template <class Derived>
    bool contains(const Eigen::MatrixBase<Derived>& u) const
    {
        return (u.array() >= lower.array()).all() && (u.array() <= upper.array()).all();
    }

    template <class Derived>
    auto clamp(const Eigen::MatrixBase<Derived>& u) const
    {
        return u.cwiseMax(lower).cwiseMin(upper);
    }
};

/// Sampling-distribution parameters for an open-loop control sequence:
/// a fixed-variance Gaussian per time step. The means (T x n_u) are the
/// quantity the search updates; the natural parameter Sigma^-1 mu differs
/// from them by the constant Sigma, which the step size absorbs.
struct NaturalParams {
    Eigen::MatrixXd means;
    Eigen::VectorXd fixed_std;

    NaturalParams() = default;
    NaturalParams(Eigen::MatrixXd m, Eigen::VectorXd s) : means(std::move(m)), fixed_std(std::move(s))
    {
        validate();
    }

    Eigen::Index horizon() const noexcept { return means.rows(); }
    Eigen::Index control_dim() const noexcept { return means.cols(); }

    void validate() const
    {
        if (fixed_std.size() != means.cols())
            throw std::invalid_argument("fixed_std must have one entry per control channel");
        if (!(fixed_std.array() > 0.0).all())
            throw std::invalid_argument("fixed_std must be positive");
        if (!means.allFinite())
            throw std::invalid_argument("means must be finite");
    }
};

/// One sampled open-loop control sequence eta = {eta_0 .. eta_{T-1}}.
struct PolicyDraw {
    Eigen::MatrixXd controls;
};

/// Standard normal CDF and quantile.
inline double normal_cdf(double x)
{
    return 0.5 * boost::math::erfc(-x / std::numbers::sqrt2);
}

inline double normal_quantile(double p)
{
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

/// Draw from N(mean, std^2) truncated to [lo, hi] by inverse CDF. Returns
/// false in `ok` when the interval's probability mass underflowed and the
/// value was clamped to the nearer bound instead.
inline double sample_truncated_normal(double mean, double std, double lo, double hi, Rng& rng, bool& ok)
{
    ok = true;
    double a = (lo - mean) / std;
    double b = (hi - mean) / std;
    // work in the lower tail, where the CDF keeps relative precision
    const bool flip = a > 0.0;
    if (flip) {
        const double t = a;
        a = -b;
        b = -t;
    }
    const double pa = std::isfinite(a) ? normal_cdf(a) : 0.0;
    const double pb = std::isfinite(b) ? normal_cdf(b) : 1.0;
    if (!(pb > pa) || pa >= 1.0) {
        ok = false;
        return std::clamp(mean, lo, hi);
    }
    const double u = pa + rng.uniform01() * (pb - pa);
    double z = normal_quantile(std::clamp(u, std::numeric_limits<double>::min(), 1.0 - 0x1.0p-53));
    z = std::clamp(z, a, b);
    if (flip)
        z = -z;
    return std::clamp(mean + std * z, lo, hi);
}

inline PolicyDraw sample_policy(const NaturalParams& params, const ControlBox& box, Rng& rng,
                                std::size_t* clamped = nullptr)
{
    const Eigen::Index horizon = params.horizon();
    const Eigen::Index nu = params.control_dim();
    if (box.dim() != nu)
        throw std::invalid_argument("control box dimension does not match the parameters");
    PolicyDraw draw{Eigen::MatrixXd(horizon, nu)};
    for (Eigen::Index t = 0; t < horizon; ++t) {
        for (Eigen::Index j = 0; j < nu; ++j) {
            bool ok = true;
            draw.controls(t, j) = sample_truncated_normal(params.means(t, j), params.fixed_std[j],
                                                          box.lower[j], box.upper[j], rng, ok);
            if (!ok && clamped)
                ++*clamped;
        }
    }
    return draw;
}

/// N draws; draw n consumes its own substream key.child(n), so the result
/// does not depend on how draws are distributed over workers.
inline std::vector<PolicyDraw> sample_policies(const NaturalParams& params, const ControlBox& box,
                                               std::size_t count, StreamKey key)
{
    if (count == 0)
        throw std::invalid_argument("policy count must be at least 1");
    std::vector<PolicyDraw> draws;
    draws.reserve(count);
    std::size_t clamped = 0;
    for (std::size_t n = 0; n < count; ++n) {
        Rng rng(key.child(n));
        draws.push_back(sample_policy(params, box, rng, &clamped));
    }
    if (clamped > 0)
        warn("truncated-normal mass underflowed for " + std::to_string(clamped) +
             " control entries; clamped to the nearer bound");
    return draws;
}

/// T(eta) = eta for the fixed-variance Gaussian.
inline Eigen::MatrixXd sufficient_statistic(const PolicyDraw& draw)
{
    return draw.controls;
}

/// grad A(theta) = E[T(eta)] under the untruncated Gaussian, i.e. the means.
inline Eigen::MatrixXd grad_log_partition(const NaturalParams& params)
{
    return params.means;
}

} // namespace rs3
