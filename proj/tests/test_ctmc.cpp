#include "support.hpp"

#include <gtest/gtest.h>

using namespace lpsnet;

TEST(Ctmc, MM1Geometric)
{
    const auto ss = ctmc::steady_state(make_single_node(0.5, Exponential{1.0}, 1), 200);
    EXPECT_NEAR(ss.mean_queue[0], 1.0, 1e-8);
    EXPECT_NEAR(ss.mean_sojourn, 2.0, 1e-8);
    EXPECT_NEAR(ss.probabilities[0], 0.5, 1e-10);
    EXPECT_NEAR(ss.probabilities[3], 0.5 * 0.125, 1e-10);
    EXPECT_LT(ss.max_truncation_mass, 1e-50);
    EXPECT_NEAR(ss.delay_probability[0], 0.5, 1e-10);
    EXPECT_NEAR(ss.probabilities.sum(), 1.0, 1e-12);
}

TEST(Ctmc, ExponentialProcessorSharingMean)
{
    // Exponential service: every K gives E[V] = E[S] / (1 - rho).
    for (std::int64_t k : {1, 3, 7})
    {
        const auto ss = ctmc::steady_state(make_single_node(0.7, Exponential{1.0}, k), 300);
        EXPECT_NEAR(ss.mean_sojourn, 1.0 / 0.3, 1e-8) << k;
    }
}

TEST(Ctmc, TandemTotalPopulation)
{
    const auto model = lpsnet::testing::exp_tandem(0.7 / 3.0, 1.0, 2.0, 2, 4);
    const auto ss = ctmc::steady_state(model, 60);
    EXPECT_LT(ss.max_truncation_mass, 1e-6);
    EXPECT_NEAR(ss.mean_population, (0.7 / 3.0) * ss.mean_sojourn, 1e-12);
    EXPECT_NEAR(ss.probabilities.sum(), 1.0, 1e-12);
    EXPECT_GT(ss.mean_queue[1], ss.mean_queue[0]);
}

TEST(Ctmc, AgreesWithSimulator)
{
    const std::vector<std::pair<NetworkModel, std::size_t>> cases{
        {make_single_node(0.5, Exponential{1.0}, 1), 200},
        {make_single_node(0.7, Exponential{1.0}, 3), 300},
        {lpsnet::testing::exp_tandem(0.7 / 3.0, 1.0, 2.0, 2, 4), 60},
    };
    for (std::size_t k = 0; k < cases.size(); ++k)
    {
        const auto &[model, n] = cases[k];
        const auto ss = ctmc::steady_state(model, n);
        ASSERT_LT(ss.max_truncation_mass, 1e-6);
        sim::SimConfig c;
        c.seed = 7 + k;
        c.replications = 10;
        c.horizon = 300'000;
        c.confidence = 0.99;
        const auto est = sim::simulate(model, c);
        EXPECT_TRUE(est.mean_sojourn.covers(ss.mean_sojourn))
            << k << ": " << est.mean_sojourn.mean << " +/- " << est.mean_sojourn.half_width << " vs " << ss.mean_sojourn;
        for (std::size_t i = 0; i < model.size(); ++i)
        {
            EXPECT_TRUE(est.mean_queue[i].covers(ss.mean_queue[i])) << k << ' ' << i;
            EXPECT_TRUE(est.delay_probability[i].covers(ss.delay_probability[i])) << k << ' ' << i;
        }
    }
}

TEST(Ctmc, Refusals)
{
    EXPECT_THROW(ctmc::steady_state(make_single_node(0.5, fit_hyperexp(1.0, 2.0), 1), 10), ModelError);
    Matrix p = Matrix::Zero(3, 3);
    const NetworkModel big({Node{"a", 0.1, Exponential{1.0}, 1}, Node{"b", 0.1, Exponential{1.0}, 1},
                            Node{"c", 0.1, Exponential{1.0}, 1}},
                           p);
    EXPECT_THROW(ctmc::steady_state(big, 200), ModelError);
}
