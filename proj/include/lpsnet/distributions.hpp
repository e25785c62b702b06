#pragma once

#include "lpsnet/error.hpp"
#include "lpsnet/rng.hpp"

#include <cmath>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

namespace lpsnet
{
    struct Exponential
    {
        double mean;
    };

    // Two-phase mixture: phase 1 with probability p1 and rate rate1, otherwise rate2.
    struct HyperExponential2
    {
        double p1;
        double rate1;
        double rate2;
    };

    struct Deterministic
    {
        double value;
    };

    /// Service requirement of a job at one node.
    ///
    /// Immutable; the first two moments and the mean residual time
    /// beta_e = E[B^2] / (2 E[B]) are computed once at construction.
    class ServiceDistribution
    {
    public:
        using Variant = std::variant<Exponential, HyperExponential2, Deterministic>;

        ServiceDistribution()
            : ServiceDistribution(Exponential{1.0})
        {
        }

        ServiceDistribution(Exponential e)
            : v_(e)
        {
            if (!(e.mean > 0.0) || !std::isfinite(e.mean))
                throw ModelError("exponential mean must be positive and finite");
            mean_ = e.mean;
            second_ = 2.0 * e.mean * e.mean;
        }

        ServiceDistribution(HyperExponential2 h)
            : v_(h)
        {
            if (!(h.p1 > 0.0 && h.p1 < 1.0))
                throw ModelError("hyper-exponential p1 must lie in (0, 1)");
            if (!(h.rate1 > 0.0) || !(h.rate2 > 0.0) || !std::isfinite(h.rate1) || !std::isfinite(h.rate2))
                throw ModelError("hyper-exponential rates must be positive and finite");
            const double p2 = 1.0 - h.p1;
            mean_ = h.p1 / h.rate1 + p2 / h.rate2;
            second_ = 2.0 * (h.p1 / (h.rate1 * h.rate1) + p2 / (h.rate2 * h.rate2));
        }

        ServiceDistribution(Deterministic d)
            : v_(d)
        {
            if (!(d.value > 0.0) || !std::isfinite(d.value))
                throw ModelError("deterministic service time must be positive and finite");
            mean_ = d.value;
            second_ = d.value * d.value;
        }

        [[nodiscard]] const Variant &variant() const noexcept { return v_; }

        [[nodiscard]] bool is_exponential() const noexcept { return std::holds_alternative<Exponential>(v_); }

        [[nodiscard]] std::string_view kind() const noexcept
        {
            return std::visit(
                [](const auto &d) -> std::string_view {
                    using T = std::decay_t<decltype(d)>;
                    if constexpr (std::is_same_v<T, Exponential>)
                        return "exponential";
                    else if constexpr (std::is_same_v<T, HyperExponential2>)
                        return "hyperexp2";
                    else
                        return "deterministic";
                },
                v_);
        }

        [[nodiscard]] double mean() const noexcept { return mean_; }
        [[nodiscard]] double second_moment() const noexcept { return second_; }
        [[nodiscard]] double residual_mean() const noexcept { return second_ / (2.0 * mean_); }
        [[nodiscard]] double scv() const noexcept { return second_ / (mean_ * mean_) - 1.0; }

        [[nodiscard]] double moment(int order) const
        {
            if (order == 1)
                return mean_;
            if (order == 2)
                return second_;
            throw std::invalid_argument("moment order must be 1 or 2");
        }

        double sample(Rng &rng) const noexcept
        {
            return std::visit(
                [&rng](const auto &d) -> double {
                    using T = std::decay_t<decltype(d)>;
                    if constexpr (std::is_same_v<T, Exponential>)
                        return rng.exponential(1.0 / d.mean);
                    else if constexpr (std::is_same_v<T, HyperExponential2>)
                        return rng.exponential(rng.uniform() < d.p1 ? d.rate1 : d.rate2);
                    else
                        return d.value;
                },
                v_);
        }

    private:
        Variant v_;
        double mean_ = 0.0;
        double second_ = 0.0;
    };

    /// Balanced-means two-phase hyper-exponential with the given mean and
    /// squared coefficient of variation (p1/rate1 == p2/rate2).
    /// scv == 1 yields an Exponential; scv < 1 is rejected.
    inline ServiceDistribution fit_hyperexp(double mean, double scv)
    {
        if (!(mean > 0.0) || !std::isfinite(mean))
            throw ModelError("hyper-exponential fit: mean must be positive");
        if (!(scv >= 1.0) || !std::isfinite(scv))
            throw ModelError("hyper-exponential fit: scv must be >= 1");
        if (scv == 1.0)
            return Exponential{mean};
        const double p1 = 0.5 * (1.0 + std::sqrt((scv - 1.0) / (scv + 1.0)));
        return HyperExponential2{p1, 2.0 * p1 / mean, 2.0 * (1.0 - p1) / mean};
    }
} // namespace lpsnet
