#pragma once

#include "lpsnet/error.hpp"
#include "lpsnet/linalg.hpp"
#include "lpsnet/model.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace lpsnet::ctmc
{
    inline constexpr std::size_t kMaxStates = 1'000'000;

    struct SteadyState
    {
        std::size_t truncation = 0;
        Vector probabilities; // mixed-radix index, node 0 fastest
        std::vector<double> mean_queue;
        double mean_population = 0.0;
        double mean_sojourn = 0.0;                  // Little's law
        std::vector<double> truncation_mass;        // P(x_i = N)
        double max_truncation_mass = 0.0;
        std::vector<double> delay_probability;      // as seen by arrivals to node i
        std::vector<double> busy_probability;       // time-stationary P(x_i >= K_i)
    };

    /// Stationary law of the exponential network truncated to {0..N}^J.
    ///
    /// Arrivals (external or routed) into a node already holding N jobs are
    /// suppressed; the returned truncation masses bound the resulting error.
    inline SteadyState steady_state(const NetworkModel &model, std::size_t truncation)
    {
        require_valid(model);
        if (!model.all_exponential())
            throw ModelError("CTMC oracle needs exponential service at every node");
        if (truncation < 1)
            throw ModelError("truncation level must be at least 1");
        const std::size_t j = model.size();
        const std::size_t base = truncation + 1;
        std::size_t states = 1;
        for (std::size_t i = 0; i < j; ++i)
        {
            if (states > kMaxStates / base)
                throw ModelError("CTMC state space exceeds 1e6 states");
            states *= base;
        }

        const Vector lambda = model.arrival_rates();
        const Vector mu = model.mean_service().cwiseInverse();
        const Vector servers = model.servers();
        const Vector exit = model.exit_probabilities();
        const Matrix &p = model.routing();

        std::vector<std::size_t> stride(j);
        for (std::size_t i = 0, s = 1; i < j; ++i, s *= base)
            stride[i] = s;

        // Q^T with row 0 replaced by the normalization sum(pi) = 1.
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(states * (2 * j + j * j + 1));
        std::vector<std::size_t> x(j, 0);
        auto transition = [&](std::size_t from, std::size_t to, double rate) {
            if (rate <= 0.0 || from == to)
                return;
            if (to != 0)
                triplets.emplace_back(static_cast<int>(to), static_cast<int>(from), rate);
            if (from != 0)
                triplets.emplace_back(static_cast<int>(from), static_cast<int>(from), -rate);
        };
        std::vector<double> completion(j);
        for (std::size_t s = 0; s < states; ++s)
        {
            triplets.emplace_back(0, static_cast<int>(s), 1.0);
            double busy = 0.0;
            for (std::size_t i = 0; i < j; ++i)
                busy += std::min(static_cast<double>(x[i]), servers[static_cast<Eigen::Index>(i)]);
            for (std::size_t i = 0; i < j; ++i)
            {
                const auto ii = static_cast<Eigen::Index>(i);
                completion[i] = busy > 0.0 ? mu[ii] * std::min(static_cast<double>(x[i]), servers[ii]) / busy : 0.0;
            }
            for (std::size_t i = 0; i < j; ++i)
            {
                const auto ii = static_cast<Eigen::Index>(i);
                if (x[i] < truncation)
                    transition(s, s + stride[i], lambda[ii]);
                if (x[i] == 0)
                    continue;
                transition(s, s - stride[i], completion[i] * exit[ii]);
                for (std::size_t k = 0; k < j; ++k)
                {
                    if (k == i || x[k] >= truncation)
                        continue;
                    transition(s, s - stride[i] + stride[k], completion[i] * p(ii, static_cast<Eigen::Index>(k)));
                }
            }
            for (std::size_t i = 0; i < j; ++i)
            {
                if (++x[i] < base)
                    break;
                x[i] = 0;
            }
        }

        Eigen::SparseMatrix<double> qt(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states));
        qt.setFromTriplets(triplets.begin(), triplets.end());
        qt.makeCompressed();
        triplets.clear();
        triplets.shrink_to_fit();

        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(qt);
        if (lu.info() != Eigen::Success)
            throw NumericError("CTMC generator factorization failed");
        Vector rhs = Vector::Zero(static_cast<Eigen::Index>(states));
        rhs[0] = 1.0;
        SteadyState out;
        out.truncation = truncation;
        out.probabilities = lu.solve(rhs);
        if (lu.info() != Eigen::Success || !all_finite(out.probabilities))
            throw NumericError("CTMC stationary solve failed");

        out.mean_queue.assign(j, 0.0);
        out.truncation_mass.assign(j, 0.0);
        out.busy_probability.assign(j, 0.0);
        std::vector<double> arrival_flow(j, 0.0), delayed_flow(j, 0.0);
        std::fill(x.begin(), x.end(), 0);
        for (std::size_t s = 0; s < states; ++s)
        {
            const double pi = out.probabilities[static_cast<Eigen::Index>(s)];
            double busy = 0.0;
            for (std::size_t i = 0; i < j; ++i)
                busy += std::min(static_cast<double>(x[i]), servers[static_cast<Eigen::Index>(i)]);
            for (std::size_t i = 0; i < j; ++i)
            {
                const auto ii = static_cast<Eigen::Index>(i);
                out.mean_queue[i] += pi * static_cast<double>(x[i]);
                if (x[i] == truncation)
                    out.truncation_mass[i] += pi;
                if (static_cast<double>(x[i]) >= servers[ii])
                    out.busy_probability[i] += pi;
                // flow into node k out of state s, and whether it finds K_k busy
                const double done = busy > 0.0 ? mu[ii] * std::min(static_cast<double>(x[i]), servers[ii]) / busy : 0.0;
                for (std::size_t k = 0; k < j; ++k)
                {
                    const double rate = done * p(ii, static_cast<Eigen::Index>(k));
                    if (rate <= 0.0)
                        continue;
                    const double seen = static_cast<double>(x[k]) - (k == i ? 1.0 : 0.0);
                    arrival_flow[k] += pi * rate;
                    if (seen >= servers[static_cast<Eigen::Index>(k)])
                        delayed_flow[k] += pi * rate;
                }
                arrival_flow[i] += pi * lambda[ii];
                if (static_cast<double>(x[i]) >= servers[ii])
                    delayed_flow[i] += pi * lambda[ii];
            }
            for (std::size_t i = 0; i < j; ++i)
            {
                if (++x[i] < base)
                    break;
                x[i] = 0;
            }
        }
        for (std::size_t i = 0; i < j; ++i)
        {
            out.mean_population += out.mean_queue[i];
            out.max_truncation_mass = std::max(out.max_truncation_mass, out.truncation_mass[i]);
            out.delay_probability.push_back(arrival_flow[i] > 0.0 ? delayed_flow[i] / arrival_flow[i] : 0.0);
        }
        out.mean_sojourn = out.mean_population / lambda.sum();
        return out;
    }
} // namespace lpsnet::ctmc
