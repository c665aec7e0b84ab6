#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "rs3/search.hpp"

using rs3::NaturalParams;
using rs3::PolicyDraw;
using rs3::ShapeKind;
using rs3::StreamKey;

namespace {

// x' = u, so a one-step plan lands exactly on its control.
class Integrator : public rs3::SystemSpec<1, 1, 1> {
public:
    static constexpr std::string_view name = "integrator";
    static constexpr std::array<std::string_view, 1> state_names{"x"};
    static constexpr std::array<std::string_view, 1> control_names{"u"};
    static constexpr std::array<std::string_view, 1> param_names{"unused"};
    static constexpr std::array<bool, 1> angular{false};

    Integrator()
    {
        dt = 1.0;
        control_lower[0] = -10.0;
        control_upper[0] = 10.0;
    }

    State propagate(const State&, const Control& u, const Params&) const { return u; }
    State normalize(State x) const { return x; }
};

rs3::QuadraticCost<Integrator> quadratic_to(double target)
{
    rs3::QuadraticCost<Integrator> c;
    c.q[0] = 1.0;
    c.target[0] = target;
    return c;
}

std::vector<rs3::UncertaintySample<Integrator>> at(double x0, std::size_t m)
{
    return std::vector<rs3::UncertaintySample<Integrator>>(
        m, {Integrator::State::Constant(x0), Integrator::Params::Zero()});
}

rs3::SearchConfig base_config()
{
    rs3::SearchConfig c;
    c.n_policies = 32;
    c.n_uncertainty = 1;
    c.iterations = 1;
    c.shape.kind = ShapeKind::exponential;
    c.shape.kappa = 1.0;
    c.schedule.kind = rs3::ScheduleKind::constant;
    c.schedule.a = 1.0;
    c.polyak = false;
    return c;
}

PolicyDraw scalar_draw(double v)
{
    return PolicyDraw{Eigen::MatrixXd::Constant(1, 1, v)};
}

} // namespace

TEST(StepSchedule, StochasticApproximationConditions)
{
    rs3::StepSchedule s;
    s.a = 2.0;
    s.b = 5.0;
    s.c = 0.75;
    double sum = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < 200000; ++k) {
        const double a = s.alpha(k);
        ASSERT_GT(a, 0.0);
        ASSERT_LT(a, prev);
        prev = a;
        sum += a;
    }
    EXPECT_LT(prev, 0.1);
    // partial sums of (b + k)^-0.75 grow like 4 K^0.25
    EXPECT_GT(sum, 2.0 * 4.0 * (std::pow(200005.0, 0.25) - std::pow(5.0, 0.25)) * 0.99);

    s.b = 0.0;
    EXPECT_TRUE(std::isfinite(s.alpha(0)));
    EXPECT_DOUBLE_EQ(s.alpha(0), 2.0);
}

TEST(StepSchedule, ConstantAndValidation)
{
    rs3::StepSchedule s;
    s.kind = rs3::ScheduleKind::constant;
    s.a = 0.3;
    EXPECT_EQ(s.alpha(0), 0.3);
    EXPECT_EQ(s.alpha(1000), 0.3);
    s.c = 2.0;
    EXPECT_NO_THROW(s.validate());

    rs3::StepSchedule bad;
    bad.c = 0.5;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad.c = 1.2;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad.c = 1.0;
    bad.a = 0.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(SearchConfig, Validation)
{
    auto c = base_config();
    c.n_policies = 1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = base_config();
    c.n_uncertainty = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(GradientStep, TwoPoliciesEqualCostsAverage)
{
    const NaturalParams p(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1));
    const std::vector<PolicyDraw> draws{scalar_draw(1.0), scalar_draw(3.0)};
    for (auto kind : {ShapeKind::identity, ShapeKind::exponential, ShapeKind::sigmoid}) {
        rs3::ShapeSpec s;
        s.kind = kind;
        const auto next = rs3::gradient_step(p, draws, std::vector<double>{5.0, 5.0}, s, 0.5);
        EXPECT_DOUBLE_EQ(next.means(0, 0), 0.5 * 2.0) << rs3::to_string(kind);
    }
}

TEST(GradientStep, TwoPoliciesHardThresholdPicksBest)
{
    const NaturalParams p(Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::VectorXd::Ones(1));
    const std::vector<PolicyDraw> draws{scalar_draw(4.0), scalar_draw(-2.0)};
    rs3::ShapeSpec s;
    s.kind = ShapeKind::sigmoid;
    s.kappa = 1e6;
    s.elite_fraction = 0.5;
    const auto next = rs3::gradient_step(p, draws, std::vector<double>{10.0, 1.0}, s, 1.0);
    EXPECT_NEAR(next.means(0, 0), -2.0, 1e-9);
    EXPECT_THROW(rs3::gradient_step(p, draws, std::vector<double>{1.0}, s, 1.0), std::invalid_argument);
    EXPECT_THROW(rs3::gradient_step(p, draws, std::vector<double>{1.0, 2.0}, s, 0.0), std::invalid_argument);
}

TEST(EstimateGradient, IdenticalCostsGiveSampleMeanMinusMean)
{
    std::mt19937_64 rng(31);
    std::normal_distribution<double> n01;
    const NaturalParams p(Eigen::MatrixXd::Constant(4, 2, 0.5), Eigen::VectorXd::Ones(2));
    std::vector<PolicyDraw> draws;
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(4, 2);
    for (int n = 0; n < 9; ++n) {
        Eigen::MatrixXd c(4, 2);
        for (Eigen::Index i = 0; i < c.size(); ++i)
            c(i) = n01(rng);
        avg += c / 9.0;
        draws.push_back({c});
    }
    for (auto kind : {ShapeKind::identity, ShapeKind::exponential, ShapeKind::sigmoid}) {
        rs3::ShapeSpec s;
        s.kind = kind;
        const auto next = rs3::gradient_step(p, draws, std::vector<double>(9, 7.25), s, 1.0);
        EXPECT_LT((next.means - avg).cwiseAbs().maxCoeff(), 1e-12) << rs3::to_string(kind);
    }
}

TEST(EstimateGradient, WeightScaleInvariant)
{
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> scale(1e-6, 1e6);
    for (int trial = 0; trial < 200; ++trial) {
        const NaturalParams p(Eigen::MatrixXd::Random(3, 2), Eigen::VectorXd::Ones(2));
        std::vector<PolicyDraw> draws;
        std::vector<double> w, ws;
        const double c = scale(rng);
        for (int n = 0; n < 2 + trial % 10; ++n) {
            draws.push_back({Eigen::MatrixXd::Random(3, 2)});
            w.push_back(u(rng) + 1e-3);
            ws.push_back(w.back() * c);
        }
        const auto a = rs3::estimate_gradient(p, draws, w);
        const auto b = rs3::estimate_gradient(p, draws, ws);
        ASSERT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + a.cwiseAbs().maxCoeff()));
    }
}

TEST(EstimateGradient, Errors)
{
    const NaturalParams p(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1));
    const std::vector<PolicyDraw> draws{scalar_draw(1.0), scalar_draw(2.0)};
    EXPECT_THROW(rs3::estimate_gradient(p, draws, std::vector<double>{1.0}), std::invalid_argument);
    EXPECT_THROW(rs3::estimate_gradient(p, draws, std::vector<double>{0.0, 0.0}), std::runtime_error);
}

TEST(Polyak, Examples)
{
    std::vector<Eigen::MatrixXd> h{Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::MatrixXd::Constant(1, 1, 3.0)};
    EXPECT_EQ(rs3::polyak_average(h)(0, 0), 2.0);
    h.push_back(Eigen::MatrixXd::Constant(1, 1, 8.0));
    EXPECT_DOUBLE_EQ(rs3::polyak_average(h)(0, 0), 4.0);
    EXPECT_THROW(rs3::polyak_average(std::vector<Eigen::MatrixXd>{}), std::invalid_argument);

    std::mt19937_64 rng(33);
    std::vector<Eigen::MatrixXd> many;
    rs3::PolyakAverager avg;
    for (int k = 0; k < 50; ++k) {
        many.push_back(Eigen::MatrixXd::Random(3, 2) * static_cast<double>(k));
        avg.add(many.back());
    }
    EXPECT_EQ(avg.count(), 50u);
    EXPECT_LT((avg.mean() - rs3::polyak_average(many)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PenalizeNonfinite, ReplacesWithTenTimesWorst)
{
    rs3::CostSamples c(2, 2);
    c(0, 0) = 1.0;
    c(0, 1) = std::numeric_limits<double>::infinity();
    c(1, 0) = 5.0;
    c(1, 1) = std::nan("");
    EXPECT_EQ(rs3::penalize_nonfinite(c), 2u);
    EXPECT_EQ(c(0, 1), 50.0);
    EXPECT_EQ(c(1, 1), 50.0);
    EXPECT_EQ(c(0, 0), 1.0);
    EXPECT_EQ(rs3::penalize_nonfinite(c), 0u);

    rs3::CostSamples z(1, 2);
    z(0, 0) = 0.0;
    z(0, 1) = std::numeric_limits<double>::infinity();
    rs3::penalize_nonfinite(z);
    EXPECT_EQ(z(0, 1), 1.0);

    rs3::CostSamples all(1, 2);
    all(0, 0) = all(0, 1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(rs3::penalize_nonfinite(all), std::runtime_error);
}

TEST(Optimize, ZeroIterationsLeaveParamsUnchanged)
{
    auto cfg = base_config();
    cfg.iterations = 0;
    cfg.polyak = true;
    const NaturalParams p(Eigen::MatrixXd::Constant(1, 1, -4.0), Eigen::VectorXd::Ones(1));
    const auto r = rs3::optimize(cfg, p, at(3.0, 1), Integrator{}, quadratic_to(3.0), StreamKey(1));
    EXPECT_EQ(r.iterate.means, p.means);
    EXPECT_EQ(r.polyak.means, p.means);
    EXPECT_TRUE(r.reports.empty());
}

TEST(Optimize, QuadraticConvergesToMinimizer)
{
    auto cfg = base_config();
    cfg.n_policies = 64;
    cfg.iterations = 300;
    cfg.polyak = true;
    cfg.schedule.kind = rs3::ScheduleKind::stochastic_approximation;
    cfg.schedule.a = 1.0;
    cfg.schedule.b = 1.0;
    cfg.schedule.c = 0.6;
    const NaturalParams p(Eigen::MatrixXd::Constant(1, 1, -6.0), Eigen::VectorXd::Ones(1));
    const auto r = rs3::optimize(cfg, p, at(3.0, 1), Integrator{}, quadratic_to(3.0), StreamKey(2));
    EXPECT_NEAR(r.iterate.means(0, 0), 3.0, 0.1);
    EXPECT_NEAR(r.polyak.means(0, 0), 3.0, 0.3);
    EXPECT_EQ(r.reports.size(), 300u);
    EXPECT_EQ(r.nonfinite, 0u);
}

TEST(Optimize, OneStepIsMppiUpdate)
{
    // one sample, unit step, exponential shape with kappa = 1/lambda:
    // mu' = sum_n exp(-S_n / lambda) eta_n / sum_n exp(-S_n / lambda)
    Integrator env;
    env.control_noise_std[0] = 0.4;
    const auto cost = quadratic_to(1.5);
    for (double lambda : {0.1, 1.0, 10.0}) {
        auto cfg = base_config();
        cfg.shape.kappa = 1.0 / lambda;
        const NaturalParams p(Eigen::MatrixXd::Constant(1, 1, 0.2), Eigen::VectorXd::Constant(1, 2.0));
        const StreamKey key(77);
        const auto r = rs3::optimize(cfg, p, at(0.0, 1), env, cost, key);

        const auto draws = rs3::sample_policies(p, env.box(), cfg.n_policies, key.child({0, 0}));
        std::vector<double> s(draws.size());
        for (std::size_t n = 0; n < draws.size(); ++n)
            s[n] = rs3::rollout_cost(env, cost, draws[n].controls, Integrator::State::Zero(),
                                     Integrator::Params::Zero(), key.child({0, 1}).child({n, 0}));
        const double best = *std::min_element(s.begin(), s.end());
        double num = 0.0, den = 0.0;
        for (std::size_t n = 0; n < draws.size(); ++n) {
            const double w = std::exp(-(s[n] - best) / lambda);
            num += w * draws[n].controls(0, 0);
            den += w;
        }
        EXPECT_NEAR(r.iterate.means(0, 0), num / den, 1e-12) << lambda;
    }
}

TEST(Optimize, WorkerCountDoesNotChangeResult)
{
    rs3::Pendulum env;
    env.control_noise_std[0] = 0.5;
    rs3::QuadraticCost<rs3::Pendulum> cost;
    cost.q << 1.0, 0.1;
    cost.r << 0.001;
    std::vector<rs3::UncertaintySample<rs3::Pendulum>> samples;
    for (int m = 0; m < 6; ++m)
        samples.push_back({rs3::Pendulum::State(0.3 * m - 0.8, 0.1), env.params});
    for (bool crn : {false, true}) {
        rs3::SearchConfig cfg = base_config();
        cfg.n_policies = 16;
        cfg.n_uncertainty = 6;
        cfg.iterations = 4;
        cfg.polyak = true;
        cfg.common_random_numbers = crn;
        const NaturalParams p(Eigen::MatrixXd::Zero(12, 1), Eigen::VectorXd::Constant(1, 1.0));
        cfg.workers = 1;
        const auto a = rs3::optimize(cfg, p, samples, env, cost, StreamKey(5));
        cfg.workers = 3;
        const auto b = rs3::optimize(cfg, p, samples, env, cost, StreamKey(5));
        EXPECT_EQ(a.iterate.means, b.iterate.means);
        EXPECT_EQ(a.polyak.means, b.polyak.means);
        for (std::size_t k = 0; k < a.reports.size(); ++k)
            EXPECT_EQ(a.reports[k].cvars, b.reports[k].cvars);
    }
}

TEST(Optimize, CommonRandomNumbersShareNoiseAcrossPolicies)
{
    // policies are all ~0 here, so costs differ only through the noise stream
    Integrator env;
    env.control_noise_std[0] = 1.0;
    auto cfg = base_config();
    cfg.n_policies = 8;
    const NaturalParams p(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, 1e-12));
    cfg.common_random_numbers = true;
    const auto shared = rs3::optimize(cfg, p, at(0.0, 1), env, quadratic_to(0.0), StreamKey(9));
    for (double c : shared.reports[0].cvars)
        EXPECT_NEAR(c, shared.reports[0].cvars[0], 1e-9);
    cfg.common_random_numbers = false;
    const auto indep = rs3::optimize(cfg, p, at(0.0, 1), env, quadratic_to(0.0), StreamKey(9));
    const auto& v = indep.reports[0].cvars;
    EXPECT_GT(*std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end()), 1e-3);
}

TEST(Optimize, RejectsWrongSampleCount)
{
    auto cfg = base_config();
    cfg.n_uncertainty = 3;
    const NaturalParams p(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1));
    EXPECT_THROW(rs3::optimize(cfg, p, at(0.0, 2), Integrator{}, quadratic_to(0.0), StreamKey(1)),
                 std::invalid_argument);
}
