#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lpsnet;
using namespace lpsnet::fluid;

namespace
{
    // Critical exponential tandem, beta = (1, 2), fluid K = (0.6, 1.6).
    FluidModel critical_tandem()
    {
        Matrix p = Matrix::Zero(2, 2);
        p(0, 1) = 1.0;
        return FluidModel((Vector(2) << 1.0 / 3, 0.0).finished(),
                          (Vector(2) << 1.0, 2.0).finished(), p, (Vector(2) << 0.6, 1.6).finished());
    }

    FluidModel random_critical(std::mt19937_64 &gen, std::size_t j)
    {
        const auto m = lpsnet::testing::random_model(gen, j);
        std::uniform_real_distribution<double> u(0.2, 3.0);
        Vector k(static_cast<Eigen::Index>(j));
        for (auto &v : k)
            v = u(gen);
        return FluidModel::from(m, k, true);
    }

    Vector random_state(std::mt19937_64 &gen, Eigen::Index j, double scale)
    {
        std::uniform_real_distribution<double> u(0.0, scale);
        Vector x(j);
        for (auto &v : x)
            v = u(gen);
        return x;
    }
} // namespace

TEST(ShareVector, Examples)
{
    const Vector k = (Vector(2) << 1.0, 2.0).finished();
    const Vector r = share_vector((Vector(2) << 0.5, 3.0).finished(), k);
    EXPECT_NEAR(r[0], 0.2, 1e-15);
    EXPECT_NEAR(r[1], 0.8, 1e-15);
    EXPECT_EQ(share_vector(Vector::Zero(2), k), Vector::Zero(2));
    const Vector saturated = share_vector((Vector(2) << 5.0, 5.0).finished(), k);
    EXPECT_NEAR(saturated[0], 1.0 / 3.0, 1e-15);
}

TEST(ShareVector, SumsToOne)
{
    std::mt19937_64 gen(21);
    for (int n = 0; n < 1000; ++n)
    {
        const Eigen::Index j = 1 + n % 6;
        const Vector x = random_state(gen, j, 5.0);
        const Vector k = random_state(gen, j, 3.0).array() + 0.1;
        const Vector r = share_vector(x, k);
        EXPECT_NEAR(r.sum(), 1.0, 1e-15);
        EXPECT_TRUE((r.array() >= 0.0).all());
    }
}

TEST(Fluid, TandemParameters)
{
    const auto fm = critical_tandem();
    EXPECT_NEAR(fm.rho(), 1.0, 1e-15);
    EXPECT_EQ(fm.bottleneck().index, 0u);
    EXPECT_NEAR(fm.critical_point()[0], 0.6, 1e-15);
    EXPECT_NEAR(fm.critical_point()[1], 1.2, 1e-15);
    EXPECT_NEAR(fm.critical_workload(), 4.2, 1e-14);
}

TEST(Fluid, TandemLyapunovHandValue)
{
    // (I - P^T)^{-1} = [[1, 0], [1, 1]] so L = d1^2 + d1 d2 + d2^2.
    const auto fm = critical_tandem();
    const Vector x = (Vector(2) << 2.0, 0.5).finished();
    const double w = fluid_workload(fm, x);
    EXPECT_NEAR(w, 3.0 * 2.0 + 2.0 * 0.5, 1e-15);
    const Vector d = x - invariant_point(fm, w);
    EXPECT_NEAR(lyapunov(fm, x, w), d[0] * d[0] + d[0] * d[1] + d[1] * d[1], 1e-13);
    EXPECT_TRUE(fm.lyapunov_positive());
}

TEST(Fluid, DriftVanishesOnManifold)
{
    std::mt19937_64 gen(22);
    for (int n = 0; n < 60; ++n)
    {
        const auto fm = n == 0 ? critical_tandem() : random_critical(gen, 1 + n % 5);
        for (double f : {0.01, 0.3, 1.0, 2.0, 7.5})
        {
            const Vector x = invariant_point(fm, f * fm.critical_workload());
            EXPECT_LE(drift(fm, x).cwiseAbs().maxCoeff(), 1e-12) << n << ' ' << f;
        }
    }
}

TEST(Fluid, LiftingMapGrid)
{
    std::mt19937_64 gen(23);
    for (int n = 0; n < 20; ++n)
    {
        const auto fm = n == 0 ? critical_tandem() : random_critical(gen, 1 + n % 5);
        const double ws = fm.critical_workload();
        for (int g = 0; g < 100; ++g)
        {
            const double w = 3.0 * ws * g / 99.0;
            EXPECT_NEAR(fluid_workload(fm, lifting_map(fm, w)), w, 1e-12 * std::max(1.0, w));
        }
        EXPECT_LE((invariant_point(fm, ws) - fm.critical_point()).cwiseAbs().maxCoeff(), 1e-15 * ws + 1e-300);
        EXPECT_THROW((void)invariant_point(fm, -1.0), std::invalid_argument);
    }
}

TEST(Fluid, ManifoldIsInvariant)
{
    const auto fm = critical_tandem();
    for (double f : {0.5, 1.0, 2.0})
    {
        const Vector x0 = invariant_point(fm, f * fm.critical_workload());
        const auto traj = integrate(fm, x0, FluidConfig{100.0, std::nullopt, 100, true});
        for (const auto &s : traj.samples)
            EXPECT_LE(s.distance, 1e-9) << f << " t=" << s.t;
        EXPECT_LE(traj.max_workload_drift, 1e-9 * fm.critical_workload());
    }
}

TEST(Fluid, WorkloadConservedAlongCriticalTrajectories)
{
    std::mt19937_64 gen(24);
    for (int n = 0; n < 40; ++n)
    {
        const auto fm = random_critical(gen, 1 + n % 5);
        const Vector x0 = random_state(gen, fm.size(), 4.0) + Vector::Constant(fm.size(), 0.1);
        const auto traj = integrate(fm, x0, FluidConfig{50.0, std::nullopt, 200, false});
        const double w0 = fluid_workload(fm, x0);
        EXPECT_LE(traj.max_workload_drift, 1e-6 * w0) << n;
    }
}

TEST(Fluid, LyapunovMonotoneForTwoNodeNetworks)
{
    std::mt19937_64 gen(25);
    for (int n = 0; n < 40; ++n)
    {
        const auto fm = n == 0 ? critical_tandem() : random_critical(gen, 2);
        const Vector x0 = random_state(gen, 2, 5.0);
        const auto traj = integrate(fm, x0, FluidConfig{60.0, std::nullopt, 50, false});
        EXPECT_TRUE(traj.lyapunov_monotone) << n;
        for (const auto &s : traj.samples)
            EXPECT_GE(s.lyapunov, -1e-12);
    }
}

TEST(Fluid, RandomStartsConverge)
{
    std::mt19937_64 gen(26);
    int converged = 0;
    for (int n = 0; n < 60; ++n)
    {
        const auto fm = n % 3 == 0 ? critical_tandem() : random_critical(gen, 2 + n % 3);
        const Vector x0 = random_state(gen, fm.size(), 6.0) + Vector::Constant(fm.size(), 0.05);
        const auto c = integrate_until_converged(fm, x0, 1e-4);
        EXPECT_TRUE(c.converged) << n << " distance " << c.distance << " t " << c.t;
        converged += c.converged ? 1 : 0;
        EXPECT_NEAR(fluid_workload(fm, c.x), fluid_workload(fm, x0), 1e-6 * fluid_workload(fm, x0));
    }
    EXPECT_EQ(converged, 60);
}

TEST(Fluid, RichardsonCheckPassesAtDefaultStep)
{
    const auto fm = critical_tandem();
    const auto traj = integrate(fm, (Vector(2) << 4.0, 0.0).finished());
    ASSERT_TRUE(traj.richardson_gap.has_value());
    EXPECT_LE(*traj.richardson_gap, 1e-7);
    EXPECT_TRUE(traj.warnings.empty());
}

TEST(Fluid, RejectsBadInput)
{
    const auto fm = critical_tandem();
    EXPECT_THROW(integrate(fm, Vector::Zero(3)), std::invalid_argument);
    EXPECT_THROW(integrate(fm, (Vector(2) << -1.0, 0.0).finished()), std::invalid_argument);
    EXPECT_THROW(integrate(fm, Vector::Zero(2), FluidConfig{0.0}), std::invalid_argument);
}

TEST(Fluid, FromModelWithCriticalRescaling)
{
    const auto m = lpsnet::testing::exp_tandem(0.2, 1.0, 2.0, 3, 8);
    const auto fm = FluidModel::from(m, std::nullopt, true);
    EXPECT_TRUE(fm.is_critical());
    EXPECT_EQ(fm.servers()[1], 8.0);
}
