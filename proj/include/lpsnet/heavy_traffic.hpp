#pragma once

#include "lpsnet/error.hpp"
#include "lpsnet/model.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpsnet::ht
{
    // The heavy-traffic parameterization uses drift theta = 1, so the
    // virtual system matching load rho has index n* = 1 / (1 - rho), the
    // normalized stationary workload W* is exponential with mean m, and the
    // fluid server counts are (1 - rho) K.

    namespace detail
    {
        struct Inputs
        {
            DerivedQuantities d;
            std::size_t b = 0; // bottleneck index
            double k = 0.0;    // servers at the bottleneck
            double rho_b = 0.0;
            double tau_b = 0.0;
            double exponent = 0.0; // rho K / rho_b
        };

        inline Inputs inputs(const NetworkModel &model)
        {
            Inputs in{derive(model)};
            if (!in.d.stable)
                throw UnstableModelError("heavy-traffic approximations require rho < 1 (rho = " +
                                         lpsnet::detail::fmt_num(in.d.rho) + ")");
            in.b = in.d.bottleneck.index;
            const auto bi = static_cast<Eigen::Index>(in.b);
            in.k = static_cast<double>(model.node(in.b).servers);
            in.rho_b = in.d.rho_i[bi];
            in.tau_b = in.d.tau[bi];
            in.exponent = in.d.rho * in.k / in.rho_b;
            return in;
        }

        inline double bracket(double pd, double m, double tau_b) { return (1.0 - pd) + pd * m / tau_b; }
    } // namespace detail

    struct DelayProbability
    {
        double corrected = 0.0; // rho^(rho K_i* / rho_i*)
        double raw = 0.0;       // exp(-(1 - rho) rho K_i* / rho_i*) = P(W* > w*)
    };

    /// Probability that a job finds all servers of the bottleneck busy.
    inline DelayProbability delay_probability(const NetworkModel &model)
    {
        const auto in = detail::inputs(model);
        return {std::pow(in.d.rho, in.exponent), std::exp(-(1.0 - in.d.rho) * in.exponent)};
    }

    /// E[V] ~ E[S] / (1 - rho) * [(1 - p_d) + p_d m / tau_i*].
    inline double mean_sojourn(const NetworkModel &model)
    {
        const auto in = detail::inputs(model);
        const double pd = std::pow(in.d.rho, in.exponent);
        return in.d.service.mean / (1.0 - in.d.rho) * detail::bracket(pd, in.d.service.m, in.tau_b);
    }

    /// E[V] straight from Little's law and E[sum Delta(W*)], before both
    /// corrections (exp(-(1 - rho)) ~ rho and the extra factor rho).
    inline double mean_sojourn_raw(const NetworkModel &model)
    {
        const auto in = detail::inputs(model);
        const double pd = std::exp(-(1.0 - in.d.rho) * in.exponent);
        return in.d.service.mean / (in.d.rho * (1.0 - in.d.rho)) * detail::bracket(pd, in.d.service.m, in.tau_b);
    }

    /// Single-node limited processor sharing approximation with p_d = rho^K.
    inline double avi_itzhak_halfin(const NetworkModel &model)
    {
        if (model.size() != 1)
            throw ModelError("Avi-Itzhak-Halfin approximation needs a single node");
        const auto d = derive(model);
        if (!d.stable)
            throw UnstableModelError("Avi-Itzhak-Halfin approximation requires rho < 1");
        const double pd = std::pow(d.rho, static_cast<double>(model.node(0).servers));
        return (1.0 - pd) * d.service.mean / (1.0 - d.rho) + pd * d.service.m / (1.0 - d.rho);
    }

    inline bool is_tandem(const NetworkModel &model)
    {
        if (model.size() != 2)
            return false;
        const Matrix &p = model.routing();
        return model.node(1).arrival_rate == 0.0 && model.node(0).arrival_rate > 0.0 && p(0, 0) == 0.0 &&
               p(0, 1) == 1.0 && p(1, 0) == 0.0 && p(1, 1) == 0.0;
    }

    /// m for the two-node tandem from per-node residual times:
    /// (rho_1 / rho)(beta_1^e + beta_2) + (rho_2 / rho) beta_2^e.
    inline double tandem_m(const NetworkModel &model)
    {
        if (!is_tandem(model))
            throw ModelError("tandem_m needs a two-node tandem (lambda_2 = 0, p_12 = 1, p_20 = 1)");
        const Utilization u = utilization(model);
        const auto &s1 = model.node(0).service;
        const auto &s2 = model.node(1).service;
        return u.per_node[0] / u.total * (s1.residual_mean() + s2.mean()) + u.per_node[1] / u.total * s2.residual_mean();
    }

    /// Approximate stationary law of the number of jobs at one node,
    /// X_i = Delta_i(W*) / (1 - rho) in actual-system units.
    ///
    /// Non-bottleneck nodes scale linearly with W* up to their cap
    /// K_i* rho_i / rho_i* and carry an atom there; the bottleneck grows
    /// linearly to K_i* and then has an exponential tail.
    class QueueLengthLaw
    {
    public:
        QueueLengthLaw(const NetworkModel &model, std::size_t node)
        {
            if (node >= model.size())
                throw std::out_of_range("node index out of range");
            const auto in = detail::inputs(model);
            const auto i = static_cast<Eigen::Index>(node);
            rho_ = in.d.rho;
            m_ = in.d.service.m;
            exponent_ = (1.0 - in.d.rho) * in.exponent; // w* / m
            p_raw_ = std::exp(-exponent_);
            p_corrected_ = std::pow(in.d.rho, in.exponent);
            bottleneck_ = node == in.b;
            reachable_ = in.d.rho_i[i] > 0.0;
            cap_ = in.k * in.d.rho_i[i] / in.rho_b;
            tail_rate_ = (1.0 - in.d.rho) * in.tau_b / m_;
        }

        [[nodiscard]] bool is_bottleneck() const noexcept { return bottleneck_; }
        // Level reached when W* hits w*: K for the bottleneck, the atom location otherwise.
        [[nodiscard]] double cap() const noexcept { return cap_; }

        /// P(X_i > x).
        [[nodiscard]] double tail(double x) const
        {
            if (!(x >= 0.0))
                throw std::invalid_argument("queue level must be >= 0");
            if (!reachable_)
                return 0.0;
            if (x <= cap_)
                return std::exp(-exponent_ * x / cap_);
            if (!bottleneck_)
                return 0.0;
            return p_raw_ * std::exp(-(x - cap_) * tail_rate_);
        }

        /// E[X_i] under the law above.
        [[nodiscard]] double mean_raw() const noexcept { return mean_with(p_raw_); }

        /// rho * E[X_i] with p_d = rho^(rho K / rho_i*); these sum to lambda E[V].
        [[nodiscard]] double mean_corrected() const noexcept { return rho_ * mean_with(p_corrected_); }

    private:
        [[nodiscard]] double mean_with(double pd) const noexcept
        {
            if (!reachable_)
                return 0.0;
            double mean = cap_ * (1.0 - pd) / exponent_;
            if (bottleneck_)
                mean += pd / tail_rate_;
            return mean;
        }

        double rho_ = 0.0, m_ = 0.0, exponent_ = 0.0, p_raw_ = 0.0, p_corrected_ = 0.0;
        double cap_ = 0.0, tail_rate_ = 0.0;
        bool bottleneck_ = false, reachable_ = false;
    };

    struct QueueLengthPoint
    {
        double tail = 0.0;
        double mean_raw = 0.0;
        double mean_corrected = 0.0;
    };

    inline QueueLengthPoint queue_length_law(const NetworkModel &model, std::size_t node, double x)
    {
        const QueueLengthLaw law(model, node);
        return {law.tail(x), law.mean_raw(), law.mean_corrected()};
    }

    struct HeavyTrafficSummary
    {
        double theta = 1.0;
        double n_star = 0.0;
        double w_mean = 0.0; // sigma^2 / (2 theta) = m
        double w_star = 0.0;
        std::size_t bottleneck = 0;
        bool bottleneck_tie = false;
        double p_d = 0.0;
        double p_d_raw = 0.0;
        double mean_sojourn = 0.0;
        double mean_sojourn_raw = 0.0;
        std::vector<double> mean_queue;     // corrected, sums to lambda E[V]
        std::vector<double> mean_queue_raw; // exact means of QueueLengthLaw
        double mean_population = 0.0;       // sum of mean_queue
        std::vector<std::string> warnings;
    };

    inline HeavyTrafficSummary summarize(const NetworkModel &model)
    {
        const auto in = detail::inputs(model);
        HeavyTrafficSummary s;
        s.n_star = 1.0 / (1.0 - in.d.rho);
        s.w_mean = in.d.service.sigma2 / (2.0 * s.theta);
        s.w_star = *in.d.w_star;
        s.bottleneck = in.b;
        s.bottleneck_tie = in.d.bottleneck.tie;
        const auto pd = delay_probability(model);
        s.p_d = pd.corrected;
        s.p_d_raw = pd.raw;
        s.mean_sojourn = mean_sojourn(model);
        s.mean_sojourn_raw = mean_sojourn_raw(model);
        for (std::size_t i = 0; i < model.size(); ++i)
        {
            const QueueLengthLaw law(model, i);
            s.mean_queue.push_back(law.mean_corrected());
            s.mean_queue_raw.push_back(law.mean_raw());
            s.mean_population += s.mean_queue.back();
        }
        for (const auto &w : in.d.warnings)
            s.warnings.push_back(w.message);
        return s;
    }
} // namespace lpsnet::ht
