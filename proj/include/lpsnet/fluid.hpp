#pragma once

#include "lpsnet/error.hpp"
#include "lpsnet/linalg.hpp"
#include "lpsnet/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lpsnet::fluid
{
    /// CPU share of each node: R_i(x) = min(x_i, K_i) / sum_j min(x_j, K_j).
    /// An empty system leaves the CPU idle, R(0) = 0.
    inline Vector share_vector(const Vector &x, const Vector &servers)
    {
        Vector busy = x.cwiseMax(0.0).cwiseMin(servers);
        const double total = busy.sum();
        if (!(total > 0.0))
            return Vector::Zero(x.size());
        return busy / total;
    }

    /// Parameters of the fluid model: rates, routing and (fluid) server counts.
    ///
    /// The server counts are taken as given; mapping an actual system to its
    /// fluid counterpart ((1 - rho) K) is done by the caller.
    class FluidModel
    {
    public:
        FluidModel(Vector lambda, Vector beta, Matrix routing, Vector servers)
            : lambda_(std::move(lambda))
            , beta_(std::move(beta))
            , routing_(std::move(routing))
            , servers_(std::move(servers))
        {
            const Eigen::Index j = lambda_.size();
            if (j == 0 || beta_.size() != j || servers_.size() != j || routing_.rows() != j || routing_.cols() != j)
                throw ModelError("fluid model dimensions disagree");
            if ((beta_.array() <= 0.0).any())
                throw ModelError("fluid model needs positive mean service times");
            if ((servers_.array() <= 0.0).any())
                throw ModelError("fluid model needs positive server counts");
            mu_ = beta_.cwiseInverse();
            const Matrix id = Matrix::Identity(j, j);
            const CheckedLu lu_t(id - routing_.transpose(), "I - P^T");
            gamma_ = lu_t.solve(lambda_);
            lyap_ = lu_t.inverse();
            tau_ = CheckedLu(id - routing_, "I - P").solve(beta_);
            rho_i_ = beta_.cwiseProduct(gamma_);
            rho_ = rho_i_.sum();
            bottleneck_ = find_bottleneck(servers_, rho_i_);
            const auto b = static_cast<Eigen::Index>(bottleneck_.index);
            anchor_ = rho_i_ * (servers_[b] / rho_i_[b]);
            w_star_ = tau_.dot(anchor_);
            const Matrix sym = 0.5 * (lyap_ + lyap_.transpose());
            lyap_min_eig_ = Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
        }

        /// Fluid parameters of a network. `servers` overrides K (e.g. (1 - rho) K);
        /// `critical` rescales lambda so that rho = 1 exactly.
        static FluidModel from(const NetworkModel &model, std::optional<Vector> servers = std::nullopt,
                               bool critical = false)
        {
            Vector lambda = model.arrival_rates();
            if (critical)
            {
                const double rho = utilization(model).total;
                if (!(rho > 0.0))
                    throw ModelError("cannot rescale a zero-load model to critical load");
                lambda /= rho;
            }
            return FluidModel(lambda, model.mean_service(), model.routing(), servers ? *servers : model.servers());
        }

        [[nodiscard]] Eigen::Index size() const noexcept { return lambda_.size(); }
        [[nodiscard]] const Vector &lambda() const noexcept { return lambda_; }
        [[nodiscard]] const Vector &beta() const noexcept { return beta_; }
        [[nodiscard]] const Vector &mu() const noexcept { return mu_; }
        [[nodiscard]] const Matrix &routing() const noexcept { return routing_; }
        [[nodiscard]] const Vector &servers() const noexcept { return servers_; }
        [[nodiscard]] const Vector &gamma() const noexcept { return gamma_; }
        [[nodiscard]] const Vector &tau() const noexcept { return tau_; }
        [[nodiscard]] const Vector &rho_i() const noexcept { return rho_i_; }
        [[nodiscard]] double rho() const noexcept { return rho_; }
        [[nodiscard]] const Bottleneck &bottleneck() const noexcept { return bottleneck_; }
        // Manifold point where the bottleneck exactly fills its servers.
        [[nodiscard]] const Vector &critical_point() const noexcept { return anchor_; }
        [[nodiscard]] double critical_workload() const noexcept { return w_star_; }
        // (I - P^T)^{-1}, the Lyapunov quadratic form.
        [[nodiscard]] const Matrix &lyapunov_matrix() const noexcept { return lyap_; }
        [[nodiscard]] double lyapunov_min_eigenvalue() const noexcept { return lyap_min_eig_; }
        [[nodiscard]] bool lyapunov_positive() const noexcept { return lyap_min_eig_ > 0.0; }
        [[nodiscard]] bool is_critical(double tol = 1e-12) const noexcept { return std::abs(rho_ - 1.0) <= tol; }

    private:
        Vector lambda_, beta_;
        Matrix routing_;
        Vector servers_, mu_, gamma_, tau_, rho_i_, anchor_;
        Matrix lyap_;
        double rho_ = 0.0;
        double w_star_ = 0.0;
        double lyap_min_eig_ = 0.0;
        Bottleneck bottleneck_;
    };

    /// Psi(x) = lambda - mu R(x) + P^T (mu R(x)).
    inline Vector drift(const FluidModel &fm, const Vector &x)
    {
        const Vector out = fm.mu().cwiseProduct(share_vector(x, fm.servers()));
        return fm.lambda() - out + fm.routing().transpose() * out;
    }

    /// Fluid workload tau^T x.
    inline double fluid_workload(const FluidModel &fm, const Vector &x) { return fm.tau().dot(x); }

    /// The unique point of the invariant manifold carrying workload w.
    ///
    /// Below w* every node sits at (w / w*) of the critical point; above it the
    /// other nodes stay pinned and the excess queues at the bottleneck.
    inline Vector invariant_point(const FluidModel &fm, double w)
    {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("workload must be finite and >= 0");
        const double ws = fm.critical_workload();
        Vector x = fm.critical_point() * (std::min(w, ws) / ws);
        const auto b = static_cast<Eigen::Index>(fm.bottleneck().index);
        if (w > ws)
            x[b] += (w - ws) / fm.tau()[b];
        return x;
    }

    /// Lifting map Delta(w): reconstructs the queue-length vector from the scalar workload.
    inline Vector lifting_map(const FluidModel &fm, double w) { return invariant_point(fm, w); }

    /// (x - x^dagger(w))^T (I - P^T)^{-1} (x - x^dagger(w)).
    inline double lyapunov(const FluidModel &fm, const Vector &x, double w)
    {
        const Vector d = x - invariant_point(fm, w);
        return d.dot(fm.lyapunov_matrix() * d);
    }

    /// Sup-norm distance to the manifold point at the same workload.
    inline double distance_to_manifold(const FluidModel &fm, const Vector &x)
    {
        return (x - invariant_point(fm, std::max(0.0, fluid_workload(fm, x)))).cwiseAbs().maxCoeff();
    }

    struct FluidConfig
    {
        double horizon = 100.0;
        std::optional<double> step; // default min(1e-3 T, 1e-2 / rate scale)
        std::size_t stride = 100;   // record every stride-th step (plus t = 0 and t = T)
        bool richardson_check = true;
    };

    struct FluidSample
    {
        double t = 0.0;
        Vector x;
        double workload = 0.0;
        double lyapunov = 0.0;
        double distance = 0.0;
    };

    struct FluidTrajectory
    {
        std::vector<FluidSample> samples;
        double step = 0.0;
        bool lyapunov_monotone = true;
        double max_workload_drift = 0.0; // max_t |W(t) - W(0)| over samples
        std::optional<double> richardson_gap;
        std::vector<std::string> warnings;

        [[nodiscard]] const FluidSample &back() const { return samples.back(); }
    };

    inline double default_step(const FluidModel &fm, double horizon)
    {
        const double scale = std::max({fm.mu().maxCoeff(), fm.lambda().maxCoeff(), 1e-300});
        return std::min(1e-3 * horizon, 1e-2 / scale);
    }

    namespace detail
    {
        inline Vector rk4_step(const FluidModel &fm, const Vector &x, double h)
        {
            const Vector k1 = drift(fm, x);
            const Vector k2 = drift(fm, x + 0.5 * h * k1);
            const Vector k3 = drift(fm, x + 0.5 * h * k2);
            const Vector k4 = drift(fm, x + h * k3);
            return (x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).cwiseMax(0.0);
        }

        inline Vector advance(const FluidModel &fm, Vector x, double horizon, double h,
                              std::vector<FluidSample> *samples, std::size_t stride)
        {
            const auto steps = static_cast<std::size_t>(std::ceil(horizon / h - 1e-9));
            const double hh = horizon / static_cast<double>(steps);
            auto record = [&](double t, const Vector &s) {
                if (!samples)
                    return;
                const double w = fluid_workload(fm, s);
                samples->push_back({t, s, w, lyapunov(fm, s, std::max(0.0, w)), distance_to_manifold(fm, s)});
            };
            record(0.0, x);
            for (std::size_t k = 1; k <= steps; ++k)
            {
                x = rk4_step(fm, x, hh);
                if (!all_finite(x))
                    throw NumericError("fluid state became non-finite at t = " +
                                       std::to_string(static_cast<double>(k) * hh));
                if (k == steps || (stride > 0 && k % stride == 0))
                    record(static_cast<double>(k) * hh, x);
            }
            return x;
        }
    } // namespace detail

    /// Classical RK4 on X' = Psi(X) with projection onto x >= 0.
    inline FluidTrajectory integrate(const FluidModel &fm, const Vector &x0, const FluidConfig &config = {})
    {
        if (!(config.horizon > 0.0))
            throw std::invalid_argument("fluid horizon must be positive");
        if (x0.size() != fm.size())
            throw std::invalid_argument("initial state has wrong dimension");
        if ((x0.array() < 0.0).any() || !all_finite(x0))
            throw std::invalid_argument("initial state must be finite and nonnegative");
        const double h = config.step.value_or(default_step(fm, config.horizon));
        if (!(h > 0.0))
            throw std::invalid_argument("fluid step must be positive");

        FluidTrajectory traj;
        traj.step = h;
        const Vector end = detail::advance(fm, x0, config.horizon, h, &traj.samples, config.stride);

        const double w0 = traj.samples.front().workload;
        for (std::size_t k = 0; k < traj.samples.size(); ++k)
        {
            traj.max_workload_drift = std::max(traj.max_workload_drift, std::abs(traj.samples[k].workload - w0));
            if (k > 0)
            {
                const double prev = traj.samples[k - 1].lyapunov;
                // relative 1e-9 plus a roundoff floor scaled to the state magnitude
                const double floor = 1e-24 * std::max(1.0, traj.samples[k].x.squaredNorm());
                if (traj.samples[k].lyapunov > prev + 1e-9 * std::abs(prev) + floor)
                    traj.lyapunov_monotone = false;
            }
        }
        if (!fm.lyapunov_positive())
            traj.warnings.push_back("symmetric part of (I - P^T)^-1 is not positive definite; Lyapunov value may be "
                                    "negative");
        if (!traj.lyapunov_monotone)
            traj.warnings.push_back("Lyapunov value increased between samples");
        if (config.richardson_check)
        {
            const Vector fine = detail::advance(fm, x0, config.horizon, 0.5 * h, nullptr, 0);
            const double gap = (fine - end).cwiseAbs().maxCoeff() / std::max(1.0, end.cwiseAbs().maxCoeff());
            traj.richardson_gap = gap;
            if (gap > 1e-7)
                traj.warnings.push_back("step-halving check failed: gap " + std::to_string(gap));
        }
        return traj;
    }

    struct Convergence
    {
        Vector x;
        double t = 0.0;
        double distance = 0.0; // to x^dagger(W(x0))
        bool converged = false;
    };

    /// Integrate until within `tol` of x^dagger(W(x0)), doubling the horizon
    /// from `t_initial` until the total time reaches `t_cap`.
    inline Convergence integrate_until_converged(const FluidModel &fm, const Vector &x0, double tol = 1e-4,
                                                 double t_initial = 50.0, double t_cap = 1e5)
    {
        const Vector target = invariant_point(fm, fluid_workload(fm, x0));
        Convergence c{x0, 0.0, (x0 - target).cwiseAbs().maxCoeff(), false};
        double segment = t_initial;
        while (true)
        {
            if (c.distance < tol)
            {
                c.converged = true;
                return c;
            }
            if (c.t >= t_cap)
                return c;
            const double len = std::min(segment, t_cap - c.t);
            c.x = detail::advance(fm, c.x, len, default_step(fm, len), nullptr, 0);
            c.t += len;
            c.distance = (c.x - target).cwiseAbs().maxCoeff();
            segment *= 2.0;
        }
    }
} // namespace lpsnet::fluid
