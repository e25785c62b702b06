#pragma once

#include "lpsnet/lpsnet.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace lpsnet::testing
{
    // Random substochastic routing with row sums in [0, 0.9] and at least one
    // positive external rate. Services are exponential unless `mixed`.
    inline NetworkModel random_model(std::mt19937_64 &gen, std::size_t j, bool mixed = false)
    {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Matrix p = Matrix::Zero(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
        for (Eigen::Index a = 0; a < p.rows(); ++a)
        {
            double total = 0.0;
            for (Eigen::Index b = 0; b < p.cols(); ++b)
            {
                p(a, b) = u(gen) < 0.6 ? u(gen) : 0.0;
                total += p(a, b);
            }
            const double target = 0.9 * u(gen);
            if (total > 0.0)
                p.row(a) *= target / total;
        }
        std::vector<Node> nodes;
        for (std::size_t i = 0; i < j; ++i)
        {
            const double mean = 0.2 + 2.0 * u(gen);
            ServiceDistribution s = Exponential{mean};
            if (mixed)
            {
                const double pick = u(gen);
                if (pick < 0.33)
                    s = fit_hyperexp(mean, 1.0 + 9.0 * u(gen));
                else if (pick < 0.66)
                    s = Deterministic{mean};
            }
            const double lambda = (i == 0 || u(gen) < 0.5) ? 0.1 + u(gen) : 0.0;
            nodes.push_back(Node{"n" + std::to_string(i), lambda, s, 1 + static_cast<std::int64_t>(u(gen) * 8)});
        }
        return NetworkModel(std::move(nodes), p);
    }

    // Random model rescaled to total load `rho`.
    inline NetworkModel random_stable_model(std::mt19937_64 &gen, std::size_t j, double rho, bool mixed = false)
    {
        return with_load(random_model(gen, j, mixed), rho);
    }

    inline NetworkModel exp_tandem(double lambda, double b1, double b2, std::int64_t k1, std::int64_t k2)
    {
        return make_tandem(lambda, Exponential{b1}, Exponential{b2}, k1, k2);
    }
} // namespace lpsnet::testing
