#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <variant>

using namespace lpsnet;

TEST(HyperExpFit, MeanOneScvFour)
{
    const auto d = fit_hyperexp(1.0, 4.0);
    const auto &h = std::get<HyperExponential2>(d.variant());
    EXPECT_NEAR(h.p1, 0.8873, 1e-4);
    EXPECT_NEAR(h.rate1, 1.7746, 1e-4);
    EXPECT_NEAR(h.rate2, 0.2254, 1e-4);
    EXPECT_NEAR(h.p1 / h.rate1, (1.0 - h.p1) / h.rate2, 1e-12);
}

TEST(HyperExpFit, RoundTripsMoments)
{
    for (double m : {0.1, 0.5, 1.0, 2.0, 10.0})
    {
        for (double c2 : {1.0, 1.5, 2.0, 4.0, 10.0, 25.0, 100.0})
        {
            const auto d = fit_hyperexp(m, c2);
            EXPECT_NEAR(d.mean(), m, 1e-12 * m) << m << ' ' << c2;
            EXPECT_NEAR(d.scv(), c2, 1e-10 * c2) << m << ' ' << c2;
            EXPECT_NEAR(d.second_moment(), (1.0 + c2) * m * m, 1e-10 * (1.0 + c2) * m * m);
        }
    }
}

TEST(HyperExpFit, ScvOneIsExponential)
{
    EXPECT_TRUE(fit_hyperexp(2.0, 1.0).is_exponential());
}

TEST(HyperExpFit, RejectsBadInput)
{
    EXPECT_THROW(fit_hyperexp(1.0, 0.5), ModelError);
    EXPECT_THROW(fit_hyperexp(0.0, 2.0), ModelError);
    EXPECT_THROW(fit_hyperexp(-1.0, 2.0), ModelError);
}

TEST(Distributions, Moments)
{
    const ServiceDistribution e = Exponential{2.0};
    EXPECT_DOUBLE_EQ(e.moment(1), 2.0);
    EXPECT_DOUBLE_EQ(e.moment(2), 8.0);
    EXPECT_DOUBLE_EQ(e.residual_mean(), 2.0);
    EXPECT_THROW((void)e.moment(3), std::invalid_argument);

    const ServiceDistribution d = Deterministic{3.0};
    EXPECT_DOUBLE_EQ(d.moment(2), 9.0);
    EXPECT_DOUBLE_EQ(d.scv(), 0.0);
    Rng rng = Rng::stream(5, 0);
    EXPECT_DOUBLE_EQ(d.sample(rng), 3.0);
}

TEST(Distributions, RejectsInvalidParameters)
{
    EXPECT_THROW(ServiceDistribution(Exponential{0.0}), ModelError);
    EXPECT_THROW(ServiceDistribution(HyperExponential2{1.5, 1.0, 1.0}), ModelError);
    EXPECT_THROW(ServiceDistribution(HyperExponential2{0.5, -1.0, 1.0}), ModelError);
    EXPECT_THROW(ServiceDistribution(Deterministic{-1.0}), ModelError);
}

TEST(Distributions, SampleMeansWithinFiveStandardErrors)
{
    const std::vector<ServiceDistribution> cases{Exponential{1.5}, fit_hyperexp(2.0, 10.0), Deterministic{0.7}};
    Rng rng = Rng::stream(42, 7);
    constexpr int n = 1'000'000;
    for (const auto &d : cases)
    {
        double sum = 0.0, sum2 = 0.0;
        for (int k = 0; k < n; ++k)
        {
            const double x = d.sample(rng);
            sum += x;
            sum2 += x * x;
        }
        const double mean = sum / n;
        const double se = std::sqrt(std::max(d.second_moment() - d.mean() * d.mean(), 0.0) / n);
        EXPECT_LE(std::abs(mean - d.mean()), 5.0 * se + 1e-9 * d.mean()) << d.kind();
        if (d.second_moment() > d.mean() * d.mean())
            EXPECT_NEAR(sum2 / n, d.second_moment(), 0.05 * d.second_moment()) << d.kind();
    }
}

TEST(Rng, StreamsAreReproducibleAndDistinct)
{
    Rng a = Rng::stream(1, 2, 3), b = Rng::stream(1, 2, 3), c = Rng::stream(1, 2, 4);
    bool differ = false;
    for (int k = 0; k < 100; ++k)
    {
        const double x = a.uniform();
        EXPECT_EQ(x, b.uniform());
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
        differ |= x != c.uniform();
    }
    EXPECT_TRUE(differ);
}
