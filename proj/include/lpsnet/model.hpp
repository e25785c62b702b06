#pragma once

#include "lpsnet/distributions.hpp"
#include "lpsnet/error.hpp"
#include "lpsnet/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace lpsnet
{
    struct Node
    {
        std::string name;
        double arrival_rate = 0.0;
        ServiceDistribution service;
        std::int64_t servers = 1;
    };

    /// Open network of multi-server nodes whose busy servers share one CPU.
    ///
    /// Node i receives Poisson arrivals at rate lambda_i, serves at most K_i
    /// jobs at once, and routes a finished job to node j with probability
    /// P(i, j); the row deficit is the exit probability. The constructor only
    /// checks shapes: use validate() for the full list of structural problems.
    class NetworkModel
    {
    public:
        NetworkModel(std::vector<Node> nodes, Matrix routing)
            : nodes_(std::move(nodes))
            , routing_(std::move(routing))
        {
            if (nodes_.empty())
                throw ModelError("network needs at least one node");
            const auto j = static_cast<Eigen::Index>(nodes_.size());
            if (routing_.size() == 0)
                routing_ = Matrix::Zero(j, j);
            if (routing_.rows() != j || routing_.cols() != j)
                throw ModelError("routing matrix must be " + std::to_string(j) + "x" + std::to_string(j));
        }

        [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
        [[nodiscard]] const std::vector<Node> &nodes() const noexcept { return nodes_; }
        [[nodiscard]] const Node &node(std::size_t i) const { return nodes_.at(i); }
        [[nodiscard]] const Matrix &routing() const noexcept { return routing_; }

        [[nodiscard]] Vector arrival_rates() const
        {
            return collect([](const Node &n) { return n.arrival_rate; });
        }
        [[nodiscard]] Vector mean_service() const
        {
            return collect([](const Node &n) { return n.service.mean(); });
        }
        [[nodiscard]] Vector second_moment_service() const
        {
            return collect([](const Node &n) { return n.service.second_moment(); });
        }
        [[nodiscard]] Vector servers() const
        {
            return collect([](const Node &n) { return static_cast<double>(n.servers); });
        }
        [[nodiscard]] Vector exit_probabilities() const
        {
            return Vector::Ones(routing_.rows()) - routing_.rowwise().sum();
        }

        [[nodiscard]] bool all_exponential() const noexcept
        {
            for (const auto &n : nodes_)
                if (!n.service.is_exponential())
                    return false;
            return true;
        }

        // Copy with every external arrival rate multiplied by `factor`.
        [[nodiscard]] NetworkModel scaled_arrivals(double factor) const
        {
            auto nodes = nodes_;
            for (auto &n : nodes)
                n.arrival_rate *= factor;
            return {std::move(nodes), routing_};
        }

        [[nodiscard]] NetworkModel with_servers(std::size_t i, std::int64_t k) const
        {
            auto nodes = nodes_;
            nodes.at(i).servers = k;
            return {std::move(nodes), routing_};
        }

    private:
        template <class F>
        Vector collect(F f) const
        {
            Vector v(static_cast<Eigen::Index>(nodes_.size()));
            for (std::size_t i = 0; i < nodes_.size(); ++i)
                v[static_cast<Eigen::Index>(i)] = f(nodes_[i]);
            return v;
        }

        std::vector<Node> nodes_;
        Matrix routing_;
    };

    enum class Severity
    {
        Warning,
        Error
    };

    struct Violation
    {
        Severity severity;
        std::string message;
    };

    namespace detail
    {
        inline std::string fmt_num(double v)
        {
            std::ostringstream os;
            os << v;
            return os.str();
        }

        inline Matrix i_minus(const Matrix &p) { return Matrix::Identity(p.rows(), p.cols()) - p; }
    } // namespace detail

    /// gamma = (I - P^T)^{-1} lambda.
    inline Vector solve_traffic(const NetworkModel &model)
    {
        const Matrix &p = model.routing();
        const CheckedLu lu(detail::i_minus(p.transpose()), "I - P^T");
        Vector gamma = lu.solve(model.arrival_rates());
        if (!all_finite(gamma))
            throw NumericError("traffic equations produced a non-finite solution");
        return gamma;
    }

    struct RemainingWork
    {
        Vector tau;  // mean remaining total work of a job now at node i
        Vector tau2; // second moment of the same
    };

    /// tau = (I - P)^{-1} beta,  tau2 = (I - P)^{-1} (beta2 + 2 beta .* (P tau)).
    /// Valid for any per-node service distribution with finite second moment.
    inline RemainingWork remaining_work_moments(const NetworkModel &model)
    {
        const Matrix &p = model.routing();
        const CheckedLu lu(detail::i_minus(p), "I - P");
        const Vector beta = model.mean_service();
        RemainingWork rw;
        rw.tau = lu.solve(beta);
        const Vector rhs = model.second_moment_service() + 2.0 * beta.cwiseProduct(p * rw.tau);
        rw.tau2 = lu.solve(rhs);
        return rw;
    }

    struct ServiceMoments
    {
        double mean = 0.0;   // E[S]
        double second = 0.0; // E[S^2]
        double m = 0.0;      // E[S^2] / (2 E[S]), mean residual total service
        double sigma2 = 0.0; // E[S^2] / E[S]
        double scv = 0.0;    // E[S^2] / E[S]^2 - 1
    };

    /// Moments of the total (phase-type / semi-Markov) service requirement S,
    /// weighting each entry node by a_i = lambda_i / sum(lambda).
    inline ServiceMoments total_service_moments(const NetworkModel &model)
    {
        const Vector lambda = model.arrival_rates();
        const double total = lambda.sum();
        if (!(total > 0.0))
            throw ModelError("total external arrival rate must be positive");
        const Vector a = lambda / total;
        const RemainingWork rw = remaining_work_moments(model);
        ServiceMoments s;
        s.mean = a.dot(rw.tau);
        s.second = a.dot(rw.tau2);
        s.m = s.second / (2.0 * s.mean);
        s.sigma2 = s.second / s.mean;
        s.scv = s.second / (s.mean * s.mean) - 1.0;
        return s;
    }

    struct Utilization
    {
        double total = 0.0; // rho = beta^T gamma
        Vector per_node;    // rho_i = beta_i gamma_i
        bool stable = false;
    };

    inline Utilization utilization(const NetworkModel &model)
    {
        Utilization u;
        u.per_node = model.mean_service().cwiseProduct(solve_traffic(model));
        u.total = u.per_node.sum();
        u.stable = u.total < 1.0;
        return u;
    }

    struct Bottleneck
    {
        std::size_t index = 0;
        bool tie = false;
        double ratio = 0.0;                // K_i* / rho_i*
        std::vector<std::size_t> excluded; // nodes with zero load
    };

    inline constexpr double kBottleneckTieTolerance = 1e-9;

    /// argmin_j K_j / rho_j over nodes with rho_j > 0 (equivalently mu_j K_j / gamma_j).
    /// Ties within a relative 1e-9 go to the lowest index and set `tie`.
    inline Bottleneck find_bottleneck(const Vector &servers, const Vector &rho_i)
    {
        Bottleneck b;
        bool found = false;
        for (Eigen::Index j = 0; j < rho_i.size(); ++j)
        {
            if (!(rho_i[j] > 0.0))
            {
                b.excluded.push_back(static_cast<std::size_t>(j));
                continue;
            }
            const double r = servers[j] / rho_i[j];
            if (!found || r < b.ratio)
            {
                b.index = static_cast<std::size_t>(j);
                b.ratio = r;
                found = true;
            }
        }
        if (!found)
            throw ModelError("no node receives traffic; bottleneck undefined");
        for (Eigen::Index j = 0; j < rho_i.size(); ++j)
        {
            if (static_cast<std::size_t>(j) == b.index || !(rho_i[j] > 0.0))
                continue;
            const double r = servers[j] / rho_i[j];
            if (std::abs(r - b.ratio) <= kBottleneckTieTolerance * b.ratio)
                b.tie = true;
        }
        return b;
    }

    inline Bottleneck find_bottleneck(const NetworkModel &model)
    {
        return find_bottleneck(model.servers(), utilization(model).per_node);
    }

    /// Critical workload in actual-system units, w* = (1 - rho) K_i* rho m / rho_i*.
    inline double critical_workload(const NetworkModel &model)
    {
        const Utilization u = utilization(model);
        if (!u.stable)
            throw UnstableModelError("critical workload requires rho < 1 (rho = " + detail::fmt_num(u.total) + ")");
        const Bottleneck b = find_bottleneck(model.servers(), u.per_node);
        const ServiceMoments s = total_service_moments(model);
        const auto i = static_cast<Eigen::Index>(b.index);
        return (1.0 - u.total) * static_cast<double>(model.node(b.index).servers) * u.total * s.m / u.per_node[i];
    }

    /// The geometric form (1 - rho) sum_j rho_j tau_j K_i* / rho_i*.
    /// Equals critical_workload() when every node has exponential service.
    inline double critical_workload_sum_form(const NetworkModel &model)
    {
        const Utilization u = utilization(model);
        if (!u.stable)
            throw UnstableModelError("critical workload requires rho < 1");
        const Bottleneck b = find_bottleneck(model.servers(), u.per_node);
        const RemainingWork rw = remaining_work_moments(model);
        const auto i = static_cast<Eigen::Index>(b.index);
        return (1.0 - u.total) * u.per_node.dot(rw.tau) * static_cast<double>(model.node(b.index).servers) /
               u.per_node[i];
    }

    /// Every violated structural invariant; empty for a well-formed stable model.
    inline std::vector<Violation> validate(const NetworkModel &model)
    {
        std::vector<Violation> out;
        auto error = [&out](std::string msg) { out.push_back({Severity::Error, std::move(msg)}); };
        auto warning = [&out](std::string msg) { out.push_back({Severity::Warning, std::move(msg)}); };

        bool any_arrivals = false;
        for (std::size_t i = 0; i < model.size(); ++i)
        {
            const Node &n = model.node(i);
            if (!std::isfinite(n.arrival_rate) || n.arrival_rate < 0.0)
                error("node " + std::to_string(i) + " has invalid arrival rate " + detail::fmt_num(n.arrival_rate));
            else if (n.arrival_rate > 0.0)
                any_arrivals = true;
            if (n.servers < 1)
                error("node " + std::to_string(i) + " has " + std::to_string(n.servers) + " servers (need >= 1)");
        }
        if (!any_arrivals)
            error("no node has a positive external arrival rate");

        const Matrix &p = model.routing();
        bool routing_ok = true;
        for (Eigen::Index i = 0; i < p.rows(); ++i)
        {
            for (Eigen::Index j = 0; j < p.cols(); ++j)
            {
                if (!std::isfinite(p(i, j)) || p(i, j) < 0.0 || p(i, j) > 1.0)
                {
                    error("routing entry (" + std::to_string(i) + ", " + std::to_string(j) + ") = " +
                          detail::fmt_num(p(i, j)) + " outside [0, 1]");
                    routing_ok = false;
                }
            }
            const double row = p.row(i).sum();
            if (row > 1.0 + 1e-12)
            {
                error("routing row " + std::to_string(i) + " sums to " + detail::fmt_num(row) + " > 1");
                routing_ok = false;
            }
        }

        if (is_singular(detail::i_minus(p.transpose())))
        {
            error("I - P^T singular");
            return out;
        }
        if (!routing_ok || !any_arrivals)
            return out;

        const Utilization u = utilization(model);
        for (Eigen::Index j = 0; j < u.per_node.size(); ++j)
            if (!(u.per_node[j] > 0.0))
                warning("node " + std::to_string(j) + " receives no traffic and is ignored for the bottleneck");
        if (!u.stable)
            warning("unstable: rho = " + detail::fmt_num(u.total) + " >= 1");
        else
        {
            const Bottleneck b = find_bottleneck(model.servers(), u.per_node);
            if (b.tie)
                warning("bottleneck tie: several nodes share the minimal K/rho; node " + std::to_string(b.index) +
                        " used");
        }
        return out;
    }

    inline bool has_errors(const std::vector<Violation> &v)
    {
        for (const auto &x : v)
            if (x.severity == Severity::Error)
                return true;
        return false;
    }

    // Throws ModelError listing every error-level violation.
    inline void require_valid(const NetworkModel &model)
    {
        const auto v = validate(model);
        std::string msg;
        for (const auto &x : v)
        {
            if (x.severity != Severity::Error)
                continue;
            if (!msg.empty())
                msg += "; ";
            msg += x.message;
        }
        if (!msg.empty())
        {
            if (msg == "I - P^T singular")
                throw SingularMatrixError(msg);
            throw ModelError(msg);
        }
    }

    /// Copy of the model with all external rates rescaled so the CPU load equals `rho`.
    inline NetworkModel with_load(const NetworkModel &model, double rho)
    {
        if (!(rho > 0.0) || !std::isfinite(rho))
            throw ModelError("target load must be positive");
        const double current = utilization(model).total;
        if (!(current > 0.0))
            throw ModelError("cannot rescale a model with zero load");
        return model.scaled_arrivals(rho / current);
    }

    /// Everything computable in closed form from a model.
    struct DerivedQuantities
    {
        double lambda_total = 0.0;
        Vector a; // entry distribution lambda / lambda_total
        Vector gamma;
        Vector rho_i;
        double rho = 0.0;
        bool stable = false;
        Vector tau;
        Vector tau2;
        ServiceMoments service;
        Bottleneck bottleneck;
        std::optional<double> w_star; // only when stable
        std::vector<Violation> warnings;
    };

    inline DerivedQuantities derive(const NetworkModel &model)
    {
        require_valid(model);
        DerivedQuantities d;
        const Vector lambda = model.arrival_rates();
        d.lambda_total = lambda.sum();
        d.a = lambda / d.lambda_total;
        d.gamma = solve_traffic(model);
        d.rho_i = model.mean_service().cwiseProduct(d.gamma);
        d.rho = d.rho_i.sum();
        d.stable = d.rho < 1.0;
        const RemainingWork rw = remaining_work_moments(model);
        d.tau = rw.tau;
        d.tau2 = rw.tau2;
        d.service = total_service_moments(model);
        d.bottleneck = find_bottleneck(model.servers(), d.rho_i);
        if (d.stable)
            d.w_star = critical_workload(model);
        for (auto &v : validate(model))
            if (v.severity == Severity::Warning)
                d.warnings.push_back(std::move(v));
        return d;
    }

    // Two-node tandem: all traffic enters node 0, moves to node 1, then leaves.
    inline NetworkModel make_tandem(double lambda, ServiceDistribution s1, ServiceDistribution s2, std::int64_t k1,
                                    std::int64_t k2)
    {
        Matrix p = Matrix::Zero(2, 2);
        p(0, 1) = 1.0;
        return NetworkModel({Node{"node1", lambda, s1, k1}, Node{"node2", 0.0, s2, k2}}, p);
    }

    inline NetworkModel make_single_node(double lambda, ServiceDistribution s, std::int64_t k)
    {
        return NetworkModel({Node{"node1", lambda, s, k}}, Matrix::Zero(1, 1));
    }
} // namespace lpsnet
