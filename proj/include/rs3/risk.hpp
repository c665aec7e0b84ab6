#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace rs3 {

/// Risk level gamma, strictly inside (0, 1).
class RiskLevel {
public:
    explicit RiskLevel(double gamma) : gamma_(gamma)
    {
        if (!(gamma > 0.0 && gamma < 1.0))
            throw std::invalid_argument("risk level must lie in the open interval (0, 1)");
    }

    double value() const noexcept { return gamma_; }

private:
    double gamma_;
};

/// N x M matrix of trajectory costs, row n = policy draw, column m =
/// uncertainty realization. Row-major storage so each policy's costs form a
/// contiguous span.
class CostSamples {
public:
    CostSamples(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill)
    {
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("cost matrix needs at least one row and one column");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t n, std::size_t m) noexcept { return values_[n * cols_ + m]; }
    double operator()(std::size_t n, std::size_t m) const noexcept { return values_[n * cols_ + m]; }

    std::span<const double> row(std::size_t n) const noexcept
    {
        return {values_.data() + n * cols_, cols_};
    }

    std::span<double> data() noexcept { return values_; }
    std::span<const double> data() const noexcept { return values_; }

    bool all_finite() const noexcept
    {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

struct RiskSummary {
    double mean = 0.0;
    double var_hat = 0.0;
    double cvar_hat = 0.0;
};

namespace detail {

inline void require_samples(std::span<const double> costs)
{
    if (costs.empty())
        throw std::invalid_argument("no samples");
}

} // namespace detail

/// 1-based index k of the order statistic realizing
/// inf{x : (1/M) sum 1{J <= x} >= gamma}, i.e. the smallest k with k/M >= gamma.
/// The tolerance absorbs representation error in gamma*M for integral products
/// (0.95 * 20 must give 19, not 20).
inline std::size_t quantile_rank(std::size_t m, double gamma)
{
    const double scaled = gamma * static_cast<double>(m);
    const double k = std::ceil(scaled - 1e-9 * std::max(1.0, scaled));
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(k, 1.0)), 1, m);
}

/// Empirical quantile by the order-statistic rule. Works on a copy so the
/// caller's ordering (which carries seed provenance) is never touched. Ties
/// need no special handling: the k-th order statistic is well defined.
inline double empirical_quantile(std::span<const double> values, double level)
{
    detail::require_samples(values);
    std::vector<double> sorted(values.begin(), values.end());
    const std::size_t k = quantile_rank(sorted.size(), level);
    auto nth = sorted.begin() + static_cast<std::ptrdiff_t>(k - 1);
    std::nth_element(sorted.begin(), nth, sorted.end());
    return *nth;
}

/// Empirical Value-at-Risk: J_(k) with k = max(1, ceil(gamma M)).
inline double empirical_var(std::span<const double> costs, RiskLevel level)
{
    return empirical_quantile(costs, level.value());
}

/// Empirical CVaR: V + 1/(M(1-gamma)) * sum_m (J_m - V)^+.
inline double empirical_cvar(std::span<const double> costs, RiskLevel level)
{
    const double var = empirical_var(costs, level);
    double excess = 0.0;
    for (double c : costs)
        excess += std::max(c - var, 0.0);
    const double m = static_cast<double>(costs.size());
    return var + excess / (m * (1.0 - level.value()));
}

/// CVaR as min_t [ t + 1/(M(1-gamma)) sum (J - t)^+ ]. The objective is convex
/// and piecewise linear with breakpoints at the samples, so scanning the
/// sorted samples with suffix sums finds the exact minimum. Shares no code
/// with empirical_var and serves as its oracle.
inline double cvar_oracle_min_form(std::span<const double> costs, RiskLevel level)
{
    detail::require_samples(costs);
    std::vector<double> sorted(costs.begin(), costs.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double scale = 1.0 / (static_cast<double>(m) * (1.0 - level.value()));

    // suffix[i] = sum_{j >= i} sorted[j]
    std::vector<double> suffix(m + 1, 0.0);
    for (std::size_t i = m; i-- > 0;)
        suffix[i] = suffix[i + 1] + sorted[i];

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        const double t = sorted[i];
        // samples strictly above t start after the last duplicate of t
        std::size_t j = i + 1;
        while (j < m && sorted[j] == t)
            ++j;
        const double tail = suffix[j] - static_cast<double>(m - j) * t;
        best = std::min(best, t + scale * tail);
    }
    return best;
}

inline double sample_mean(std::span<const double> costs)
{
    detail::require_samples(costs);
    return std::accumulate(costs.begin(), costs.end(), 0.0) / static_cast<double>(costs.size());
}

inline RiskSummary risk_summary(std::span<const double> costs, RiskLevel level)
{
    return {sample_mean(costs), empirical_var(costs, level), empirical_cvar(costs, level)};
}

} // namespace rs3
