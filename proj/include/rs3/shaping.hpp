#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rs3/risk.hpp"

namespace rs3 {

enum class ShapeKind { identity, exponential, sigmoid };

/// Shape function applied to y = -CVaR before forming update weights.
struct ShapeSpec {
    ShapeKind kind = ShapeKind::exponential;
    double kappa = 1.0;
    /// Soft elite fraction, sigmoid only.
    double elite_fraction = 0.1;
    /// Fixed lower bound y_lb for the sigmoid. Batch minimum when unset.
    std::optional<double> lower_bound;

    void validate() const
    {
        if (kind != ShapeKind::identity && !(kappa > 0.0 && std::isfinite(kappa)))
            throw std::invalid_argument("shape kappa must be positive");
        if (kind == ShapeKind::sigmoid && !(elite_fraction > 0.0 && elite_fraction < 1.0))
            throw std::invalid_argument("shape elite_fraction must lie in (0, 1)");
    }
};

inline std::string_view to_string(ShapeKind kind)
{
    switch (kind) {
    case ShapeKind::identity: return "identity";
    case ShapeKind::exponential: return "exponential";
    case ShapeKind::sigmoid: return "sigmoid";
    }
    return "?";
}

inline ShapeKind parse_shape_kind(std::string_view name)
{
    if (name == "identity") return ShapeKind::identity;
    if (name == "exponential") return ShapeKind::exponential;
    if (name == "sigmoid") return ShapeKind::sigmoid;
    throw std::invalid_argument("unknown shape kind '" + std::string(name) + "'");
}

namespace detail {

inline double logistic(double z)
{
    if (z >= 0.0)
        return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

} // namespace detail

/// Unnormalized weights w_n = S(y_n). Every output is finite and
/// nonnegative, and at least one is positive. Only ratios w_n / sum(w) are
/// meaningful downstream, so each kind is free to rescale.
inline std::vector<double> shape_weights(std::span<const double> y, const ShapeSpec& spec)
{
    if (y.empty())
        throw std::invalid_argument("no values to shape");
    for (double v : y)
        if (!std::isfinite(v))
            throw std::invalid_argument("shape input must be finite");
    spec.validate();

    const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    std::vector<double> w(y.size());

    switch (spec.kind) {
    case ShapeKind::identity: {
        // shift keeps S bounded away from zero on nonpositive y = -CVaR
        const double eps = 1e-12 * (1.0 + (hi - lo));
        std::transform(y.begin(), y.end(), w.begin(), [&](double v) { return v - lo + eps; });
        break;
    }
    case ShapeKind::exponential:
        // max-subtraction: exp(k(y - max)) in (0, 1], ratio unchanged
        std::transform(y.begin(), y.end(), w.begin(),
                       [&](double v) { return std::exp(spec.kappa * (v - hi)); });
        break;
    case ShapeKind::sigmoid: {
        const double floor = spec.lower_bound.value_or(lo);
        const double threshold = empirical_quantile(y, 1.0 - spec.elite_fraction);
        std::transform(y.begin(), y.end(), w.begin(), [&](double v) {
            return std::max(v - floor, 0.0) * detail::logistic(spec.kappa * (v - threshold));
        });
        break;
    }
    }

    double total = 0.0;
    for (double v : w)
        total += v;
    if (!(total > 0.0) || !std::isfinite(total))
        std::fill(w.begin(), w.end(), 1.0);
    return w;
}

/// Weights scaled to sum to one.
inline std::vector<double> normalized_weights(std::span<const double> y, const ShapeSpec& spec)
{
    auto w = shape_weights(y, spec);
    double total = 0.0;
    for (double v : w)
        total += v;
    for (double& v : w)
        v /= total;
    return w;
}

} // namespace rs3
