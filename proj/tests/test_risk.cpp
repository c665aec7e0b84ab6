#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "rs3/risk.hpp"

using rs3::RiskLevel;

namespace {

std::vector<double> one_to(int n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1.0);
    return v;
}

// Brute-force min over t of the Rockafellar objective at every sample.
double brute_min_form(const std::vector<double>& x, double gamma)
{
    double best = 1e300;
    for (double t : x) {
        double tail = 0.0;
        for (double v : x)
            tail += std::max(v - t, 0.0);
        best = std::min(best, t + tail / (static_cast<double>(x.size()) * (1.0 - gamma)));
    }
    return best;
}

std::vector<double> random_costs(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_int_distribution<int> kind(0, 2);
    std::lognormal_distribution<double> heavy(0.0, 1.5);
    std::uniform_real_distribution<double> flat(0.0, 100.0);
    std::uniform_int_distribution<int> ties(0, 5);
    std::vector<double> v(n);
    const int k = kind(rng);
    for (auto& x : v)
        x = k == 0 ? heavy(rng) : k == 1 ? flat(rng) : static_cast<double>(ties(rng));
    return v;
}

} // namespace

TEST(RiskLevel, RejectsOutsideOpenInterval)
{
    EXPECT_THROW(RiskLevel(0.0), std::invalid_argument);
    EXPECT_THROW(RiskLevel(1.0), std::invalid_argument);
    EXPECT_THROW(RiskLevel(-0.1), std::invalid_argument);
    EXPECT_THROW(RiskLevel(std::nan("")), std::invalid_argument);
    EXPECT_DOUBLE_EQ(RiskLevel(0.9).value(), 0.9);
}

TEST(CostSamples, ShapeAndRows)
{
    rs3::CostSamples c(2, 3);
    c(1, 2) = 4.0;
    EXPECT_EQ(c.row(1).size(), 3u);
    EXPECT_EQ(c.row(1)[2], 4.0);
    EXPECT_TRUE(c.all_finite());
    c(0, 0) = std::numeric_limits<double>::infinity();
    EXPECT_FALSE(c.all_finite());
    EXPECT_THROW(rs3::CostSamples(0, 3), std::invalid_argument);
    EXPECT_THROW(rs3::CostSamples(3, 0), std::invalid_argument);
}

TEST(EmpiricalVar, Examples)
{
    EXPECT_EQ(rs3::empirical_var(one_to(10), RiskLevel(0.9)), 9.0);
    EXPECT_EQ(rs3::empirical_var(std::vector<double>(7, 2.5), RiskLevel(0.3)), 2.5);
    EXPECT_EQ(rs3::empirical_var(std::vector<double>{1, 2, 3, 4}, RiskLevel(0.5)), 2.0);
}

TEST(EmpiricalVar, QuantileRankAbsorbsRoundoff)
{
    EXPECT_EQ(rs3::quantile_rank(20, 0.95), 19u);
    EXPECT_EQ(rs3::quantile_rank(10, 0.9), 9u);
    EXPECT_EQ(rs3::quantile_rank(3, 0.01), 1u);
    EXPECT_EQ(rs3::quantile_rank(4, 0.76), 4u);
}

TEST(EmpiricalCvar, Examples)
{
    EXPECT_DOUBLE_EQ(rs3::empirical_cvar(one_to(10), RiskLevel(0.9)), 10.0);
    EXPECT_DOUBLE_EQ(rs3::empirical_cvar(std::vector<double>(5, 3.0), RiskLevel(0.75)), 3.0);
    EXPECT_DOUBLE_EQ(rs3::empirical_cvar(std::vector<double>{1, 2, 3, 4}, RiskLevel(0.5)), 3.5);
}

TEST(CvarOracle, Examples)
{
    EXPECT_DOUBLE_EQ(rs3::cvar_oracle_min_form(one_to(10), RiskLevel(0.9)), 10.0);
    EXPECT_DOUBLE_EQ(rs3::cvar_oracle_min_form(std::vector<double>{5}, RiskLevel(0.5)), 5.0);
    EXPECT_DOUBLE_EQ(rs3::cvar_oracle_min_form(std::vector<double>{1, 2, 3, 4}, RiskLevel(0.5)), 3.5);
}

TEST(RiskSummary, Examples)
{
    auto s = rs3::risk_summary(one_to(10), RiskLevel(0.9));
    EXPECT_DOUBLE_EQ(s.mean, 5.5);
    EXPECT_DOUBLE_EQ(s.var_hat, 9.0);
    EXPECT_DOUBLE_EQ(s.cvar_hat, 10.0);

    s = rs3::risk_summary(std::vector<double>{42.0}, RiskLevel(0.37));
    EXPECT_EQ(s.mean, 42.0);
    EXPECT_EQ(s.var_hat, 42.0);
    EXPECT_EQ(s.cvar_hat, 42.0);

    s = rs3::risk_summary(std::vector<double>{0, 0, 0, 100}, RiskLevel(0.75));
    EXPECT_DOUBLE_EQ(s.mean, 25.0);
    EXPECT_DOUBLE_EQ(s.var_hat, 0.0);
    EXPECT_DOUBLE_EQ(s.cvar_hat, 100.0);
}

TEST(Risk, EmptyInputThrows)
{
    const std::vector<double> empty;
    EXPECT_THROW(rs3::empirical_var(empty, RiskLevel(0.5)), std::invalid_argument);
    EXPECT_THROW(rs3::empirical_cvar(empty, RiskLevel(0.5)), std::invalid_argument);
    EXPECT_THROW(rs3::cvar_oracle_min_form(empty, RiskLevel(0.5)), std::invalid_argument);
    EXPECT_THROW(rs3::risk_summary(empty, RiskLevel(0.5)), std::invalid_argument);
    try {
        rs3::empirical_var(empty, RiskLevel(0.5));
    } catch (const std::invalid_argument& e) {
        EXPECT_STREQ(e.what(), "no samples");
    }
}

TEST(Risk, InputOrderUntouched)
{
    std::vector<double> v{5, 1, 4, 2, 3};
    const auto copy = v;
    rs3::risk_summary(v, RiskLevel(0.6));
    rs3::cvar_oracle_min_form(v, RiskLevel(0.6));
    EXPECT_EQ(v, copy);
}

TEST(RiskProperty, OrderingAgainstMeanAndVar)
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> size(1, 200);
    std::uniform_real_distribution<double> level(0.01, 0.99);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto x = random_costs(rng, size(rng));
        const RiskLevel g(level(rng));
        const auto s = rs3::risk_summary(x, g);
        const double tol = 1e-12 * (1.0 + std::abs(s.cvar_hat));
        ASSERT_GE(s.cvar_hat + tol, s.var_hat);
        ASSERT_GE(s.cvar_hat + tol, s.mean);
    }
}

TEST(RiskProperty, EstimatorMatchesMinFormWhenGammaMIntegral)
{
    std::mt19937_64 rng(12);
    const double gammas[] = {0.5, 0.75, 0.9, 0.95};
    std::uniform_int_distribution<int> pick(0, 3);
    for (int trial = 0; trial < 1000; ++trial) {
        const double g = gammas[pick(rng)];
        const std::size_t unit = g == 0.5 ? 2 : g == 0.75 ? 4 : g == 0.9 ? 10 : 20;
        std::uniform_int_distribution<std::size_t> mult(1, 200 / unit);
        const auto x = random_costs(rng, unit * mult(rng));
        const double a = rs3::empirical_cvar(x, RiskLevel(g));
        const double b = rs3::cvar_oracle_min_form(x, RiskLevel(g));
        ASSERT_NEAR(a, b, 1e-9 * std::max(1.0, std::abs(b)));
    }
}

TEST(RiskProperty, OracleMatchesBruteForce)
{
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<std::size_t> size(1, 60);
    std::uniform_real_distribution<double> level(0.05, 0.95);
    for (int trial = 0; trial < 500; ++trial) {
        const auto x = random_costs(rng, size(rng));
        const double g = level(rng);
        const double a = rs3::cvar_oracle_min_form(x, RiskLevel(g));
        ASSERT_NEAR(a, brute_min_form(x, g), 1e-9 * std::max(1.0, std::abs(a)));
    }
}

TEST(RiskProperty, VarPermutationInvariant)
{
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 300; ++trial) {
        auto x = random_costs(rng, 1 + trial % 50);
        const RiskLevel g(0.1 + 0.8 * (trial % 7) / 6.0);
        const double v = rs3::empirical_var(x, g);
        const double c = rs3::empirical_cvar(x, g);
        std::shuffle(x.begin(), x.end(), rng);
        ASSERT_EQ(rs3::empirical_var(x, g), v);
        ASSERT_NEAR(rs3::empirical_cvar(x, g), c, 1e-12 * std::max(1.0, std::abs(c)));
    }
}

TEST(RiskProperty, MonotoneInGamma)
{
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> level(0.01, 0.99);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto x = random_costs(rng, 1 + trial % 80);
        double g1 = level(rng), g2 = level(rng);
        if (g1 > g2)
            std::swap(g1, g2);
        ASSERT_LE(rs3::empirical_var(x, RiskLevel(g1)), rs3::empirical_var(x, RiskLevel(g2)));
        const double c1 = rs3::empirical_cvar(x, RiskLevel(g1));
        const double c2 = rs3::empirical_cvar(x, RiskLevel(g2));
        ASSERT_LE(c1, c2 + 1e-12 * std::max(1.0, std::abs(c2)));
    }
}

TEST(RiskProperty, CoherencyOfMinForm)
{
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<double> level(0.05, 0.95);
    std::uniform_real_distribution<double> shift(-50.0, 50.0);
    std::uniform_real_distribution<double> scale(0.0, 10.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 100);
        const auto x = random_costs(rng, n);
        auto y = random_costs(rng, n);
        const RiskLevel g(level(rng));
        const double rx = rs3::cvar_oracle_min_form(x, g);
        const double ry = rs3::cvar_oracle_min_form(y, g);
        const double tol = 1e-12 * (1.0 + std::abs(rx) + std::abs(ry));

        const double c = shift(rng);
        std::vector<double> xc(x), xa(x), xy(n), hi(n);
        for (auto& v : xc)
            v += c;
        ASSERT_NEAR(rs3::cvar_oracle_min_form(xc, g), rx + c, 1e-12 * (1.0 + std::abs(rx) + std::abs(c)));

        const double a = scale(rng);
        for (auto& v : xa)
            v *= a;
        ASSERT_NEAR(rs3::cvar_oracle_min_form(xa, g), a * rx, 1e-12 * (1.0 + a * std::abs(rx)));

        for (std::size_t i = 0; i < n; ++i) {
            xy[i] = x[i] + y[i];
            hi[i] = std::max(x[i], y[i]);
        }
        ASSERT_LE(rs3::cvar_oracle_min_form(xy, g), rx + ry + tol);
        ASSERT_LE(rx, rs3::cvar_oracle_min_form(hi, g) + tol);
    }
}
