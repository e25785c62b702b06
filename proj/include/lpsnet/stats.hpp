#pragma once

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace lpsnet::stats
{
    struct Estimate
    {
        double mean = 0.0;
        double half_width = std::numeric_limits<double>::infinity(); // infinite with fewer than two samples
        double std_dev = 0.0;
        std::size_t n = 0;

        [[nodiscard]] bool covers(double value) const noexcept { return std::abs(value - mean) <= half_width; }
        [[nodiscard]] double lower() const noexcept { return mean - half_width; }
        [[nodiscard]] double upper() const noexcept { return mean + half_width; }
    };

    // Two-sided Student-t quantile t_{(1+level)/2, dof}.
    inline double t_quantile(double level, std::size_t dof)
    {
        const boost::math::students_t dist(static_cast<double>(dof));
        return boost::math::quantile(dist, 0.5 * (1.0 + level));
    }

    /// Mean of independent replication values with a Student-t confidence interval.
    inline Estimate estimate(const std::vector<double> &xs, double level)
    {
        Estimate e;
        e.n = xs.size();
        if (xs.empty())
            return e;
        double sum = 0.0;
        for (double x : xs)
            sum += x;
        e.mean = sum / static_cast<double>(e.n);
        if (e.n < 2)
            return e;
        double ss = 0.0;
        for (double x : xs)
            ss += (x - e.mean) * (x - e.mean);
        e.std_dev = std::sqrt(ss / static_cast<double>(e.n - 1));
        e.half_width = t_quantile(level, e.n - 1) * e.std_dev / std::sqrt(static_cast<double>(e.n));
        return e;
    }
} // namespace lpsnet::stats
