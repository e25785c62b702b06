#pragma once

#include "lpsnet/distributions.hpp"
#include "lpsnet/heavy_traffic.hpp"
#include "lpsnet/model.hpp"
#include "lpsnet/sim.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace lpsnet::table1
{
    /// One published tandem experiment: hyper-exponential service at both
    /// nodes, total load 0.7, with the reference approximation and
    /// simulation values for E[V].
    struct Row
    {
        double beta1, beta2;
        double scv1, scv2;
        std::int64_t k1, k2;
        double approximation;
        double simulation;
    };

    inline constexpr double kLoad = 0.7;
    inline constexpr double kApproxTolerance = 0.01;  // absolute, values are 2-decimal roundings
    inline constexpr double kSimRelTolerance = 0.05;  // relative
    inline constexpr double kSimPassFraction = 14.0 / 16.0;

    inline constexpr std::array<Row, 16> kRows{{
        {1, 2, 4, 4, 3, 7, 10.24, 10.41},
        {1, 2, 4, 10, 4, 6, 11.37, 10.71},
        {1, 2, 10, 4, 4, 6, 10.77, 10.57},
        {1, 2, 10, 10, 4, 6, 11.58, 10.87},
        {2, 1, 4, 4, 6, 4, 10.24, 10.49},
        {2, 1, 4, 10, 6, 4, 10.38, 10.70},
        {2, 1, 10, 4, 6, 4, 10.78, 10.98},
        {2, 1, 10, 10, 6, 4, 10.91, 11.18},
        {1, 10, 4, 4, 2, 8, 38.86, 37.43},
        {1, 10, 4, 10, 2, 8, 43.20, 37.83},
        {1, 10, 10, 4, 2, 8, 38.91, 37.53},
        {1, 10, 10, 10, 2, 8, 43.24, 37.97},
        {10, 1, 4, 4, 8, 2, 38.52, 38.88},
        {10, 1, 4, 10, 8, 2, 38.56, 39.11},
        {10, 1, 10, 4, 8, 2, 42.46, 40.77},
        {10, 1, 10, 10, 8, 2, 42.50, 41.00},
    }};

    inline NetworkModel make_model(const Row &row)
    {
        const double lambda = kLoad / (row.beta1 + row.beta2);
        return make_tandem(lambda, fit_hyperexp(row.beta1, row.scv1), fit_hyperexp(row.beta2, row.scv2), row.k1,
                           row.k2);
    }

    struct RowResult
    {
        std::size_t row = 0; // 1-based
        Row reference{};
        std::size_t bottleneck = 0;
        double approximation = 0.0;
        bool approximation_ok = false;
        std::optional<sim::SimEstimates> simulation;
        bool simulation_ok = false;
    };

    struct Report
    {
        std::vector<RowResult> rows;
        std::size_t approximation_passed = 0;
        std::size_t simulation_passed = 0;
        bool simulated = false;

        [[nodiscard]] std::size_t simulation_required() const
        {
            return static_cast<std::size_t>(std::ceil(kSimPassFraction * static_cast<double>(rows.size()) - 1e-12));
        }
        [[nodiscard]] bool approximation_policy() const { return approximation_passed == rows.size(); }
        [[nodiscard]] bool simulation_policy() const { return !simulated || simulation_passed >= simulation_required(); }
        [[nodiscard]] bool passed() const { return approximation_policy() && simulation_policy(); }
    };

    inline bool simulation_matches(const sim::SimEstimates &e, double reference)
    {
        return std::abs(e.mean_sojourn.mean - reference) <= kSimRelTolerance * reference ||
               e.mean_sojourn.covers(reference);
    }

    /// Evaluates the given 1-based rows; simulates them when `config` is set.
    inline Report run(const std::vector<std::size_t> &rows, const std::optional<sim::SimConfig> &config)
    {
        Report report;
        report.simulated = config.has_value();
        for (std::size_t index : rows)
        {
            if (index < 1 || index > kRows.size())
                throw std::out_of_range("table row must be in 1..16");
            RowResult r;
            r.row = index;
            r.reference = kRows[index - 1];
            const NetworkModel model = make_model(r.reference);
            r.bottleneck = find_bottleneck(model).index;
            r.approximation = ht::mean_sojourn(model);
            r.approximation_ok = std::abs(r.approximation - r.reference.approximation) <= kApproxTolerance;
            report.approximation_passed += r.approximation_ok ? 1 : 0;
            if (config)
            {
                r.simulation = sim::simulate(model, *config);
                r.simulation_ok = simulation_matches(*r.simulation, r.reference.simulation);
                report.simulation_passed += r.simulation_ok ? 1 : 0;
            }
            report.rows.push_back(std::move(r));
        }
        return report;
    }

    inline std::vector<std::size_t> all_rows()
    {
        std::vector<std::size_t> v;
        for (std::size_t i = 1; i <= kRows.size(); ++i)
            v.push_back(i);
        return v;
    }
} // namespace lpsnet::table1
