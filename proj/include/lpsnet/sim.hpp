#pragma once

#include "lpsnet/distributions.hpp"
#include "lpsnet/error.hpp"
#include "lpsnet/model.hpp"
#include "lpsnet/rng.hpp"
#include "lpsnet/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <deque>
#include <exception>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace lpsnet::sim
{
    struct SimConfig
    {
        std::uint64_t seed = 1;
        std::size_t replications = 10;
        std::uint64_t horizon = 1'000'000; // completed jobs per replication, warmup included
        double warmup_fraction = 0.2;
        double confidence = 0.95;
        unsigned threads = 0; // 0: hardware concurrency

        [[nodiscard]] std::uint64_t warmup_jobs() const noexcept
        {
            return static_cast<std::uint64_t>(std::floor(warmup_fraction * static_cast<double>(horizon)));
        }

        void check() const
        {
            if (replications < 1)
                throw std::invalid_argument("need at least one replication");
            if (horizon < 1)
                throw std::invalid_argument("horizon must be positive");
            if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
                throw std::invalid_argument("warmup fraction must lie in [0, 1)");
            if (!(confidence > 0.0 && confidence < 1.0))
                throw std::invalid_argument("confidence level must lie in (0, 1)");
        }
    };

    // Substream purposes for Rng::stream(seed, replication, purpose * J + node).
    enum class Stream : std::uint64_t
    {
        Arrivals = 0,
        Service = 1,
        Routing = 2
    };

    struct ReplicationResult
    {
        double mean_sojourn = 0.0;
        std::uint64_t jobs = 0; // sojourns measured
        std::vector<double> delay_probability;
        std::vector<std::uint64_t> arrivals; // node arrivals after warmup
        std::vector<std::uint64_t> delayed;
        std::vector<double> mean_queue; // time averages after warmup
        double mean_population = 0.0;
        double measured_time = 0.0;
        double end_time = 0.0;
    };

    /// Hooks into the event loop; all optional. Used for tracing and for
    /// checking invariants in tests.
    struct NullObserver
    {
        template <class State>
        void before_event(const State &) noexcept
        {
        }
        template <class State>
        void after_event(const State &) noexcept
        {
        }
        void on_admit(std::size_t, double) noexcept {}
        void on_route(std::uint64_t, std::size_t) noexcept {}
        void on_exit(std::uint64_t, double, double) noexcept {}
    };

    /// One replication of the layered network.
    ///
    /// Each node admits up to K_i jobs FCFS; all B admitted jobs in the
    /// system share the CPU equally, so each depletes its remaining work at
    /// rate 1/B. A virtual clock V with dV/dt = 1/B turns this into fixed
    /// finishing tags (V at admission + requirement) kept in a min-heap.
    template <class Observer = NullObserver>
    class Replication
    {
    public:
        struct InService
        {
            double tag;
            std::uint32_t node;
            std::uint64_t seq;
            std::uint32_t slot;
        };

        Replication(const NetworkModel &model, const SimConfig &config, std::size_t index, Observer &observer)
            : model_(model)
            , config_(config)
            , obs_(observer)
            , j_(model.size())
        {
            const auto jj = static_cast<std::uint64_t>(j_);
            for (std::size_t i = 0; i < j_; ++i)
            {
                const Node &n = model.node(i);
                arrival_rng_.push_back(Rng::stream(config.seed, index, static_cast<std::uint64_t>(Stream::Arrivals) * jj + i));
                service_rng_.push_back(Rng::stream(config.seed, index, static_cast<std::uint64_t>(Stream::Service) * jj + i));
                routing_rng_.push_back(Rng::stream(config.seed, index, static_cast<std::uint64_t>(Stream::Routing) * jj + i));
                servers_.push_back(n.servers);
                rates_.push_back(n.arrival_rate);
                next_arrival_.push_back(n.arrival_rate > 0.0 ? arrival_rng_[i].exponential(n.arrival_rate)
                                                             : std::numeric_limits<double>::infinity());
                std::vector<double> cum(j_);
                double acc = 0.0;
                for (std::size_t k = 0; k < j_; ++k)
                {
                    acc += model.routing()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
                    cum[k] = acc;
                }
                cumulative_.push_back(std::move(cum));
            }
            population_.assign(j_, 0);
            in_service_.assign(j_, 0);
            waiting_.resize(j_);
            area_.assign(j_, 0.0);
            arrivals_.assign(j_, 0);
            delayed_.assign(j_, 0);
            warmup_jobs_ = config.warmup_jobs();
            measuring_ = warmup_jobs_ == 0;
        }

        ReplicationResult run()
        {
            while (completed_ < config_.horizon)
            {
                std::size_t a = 0;
                double t_arr = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < j_; ++i)
                {
                    if (next_arrival_[i] < t_arr)
                    {
                        t_arr = next_arrival_[i];
                        a = i;
                    }
                }
                double t_comp = std::numeric_limits<double>::infinity();
                if (!heap_.empty())
                    t_comp = now_ + std::max(0.0, heap_.front().tag - virtual_) * static_cast<double>(busy_);
                const double next = std::min(t_comp, t_arr);
                if (!std::isfinite(next))
                    throw NumericError("simulation clock cannot advance: " + dump());
                advance(next);
                obs_.before_event(*this);
                if (t_comp <= t_arr)
                    complete();
                else
                    external_arrival(a);
                obs_.after_event(*this);
            }
            return result();
        }

        // Read-only state, for observers.
        [[nodiscard]] double time() const noexcept { return now_; }
        [[nodiscard]] double virtual_time() const noexcept { return virtual_; }
        [[nodiscard]] std::int64_t busy() const noexcept { return busy_; }
        [[nodiscard]] std::size_t size() const noexcept { return j_; }
        [[nodiscard]] std::int64_t population(std::size_t i) const noexcept { return population_[i]; }
        [[nodiscard]] std::int64_t in_service(std::size_t i) const noexcept { return in_service_[i]; }
        [[nodiscard]] std::int64_t servers(std::size_t i) const noexcept { return servers_[i]; }
        [[nodiscard]] const std::vector<InService> &in_service_entries() const noexcept { return heap_; }

        // Total remaining work of admitted jobs.
        [[nodiscard]] double remaining_work() const noexcept
        {
            double s = 0.0;
            for (const auto &e : heap_)
                s += e.tag - virtual_;
            return s;
        }

    private:
        struct Job
        {
            std::uint64_t id;
            double entry;
            double node_arrival;
            double work;
        };

        static bool later(const InService &a, const InService &b) noexcept
        {
            if (a.tag != b.tag)
                return a.tag > b.tag;
            if (a.node != b.node)
                return a.node > b.node;
            return a.seq > b.seq;
        }

        void advance(double t)
        {
            const double dt = t - now_;
            if (measuring_)
                for (std::size_t i = 0; i < j_; ++i)
                    area_[i] += static_cast<double>(population_[i]) * dt;
            if (busy_ > 0)
                virtual_ += dt / static_cast<double>(busy_);
            now_ = t;
        }

        std::uint32_t allocate(double entry)
        {
            std::uint32_t slot;
            if (!free_.empty())
            {
                slot = free_.back();
                free_.pop_back();
            }
            else
            {
                slot = static_cast<std::uint32_t>(jobs_.size());
                jobs_.emplace_back();
            }
            jobs_[slot] = Job{next_id_++, entry, 0.0, 0.0};
            return slot;
        }

        void admit(std::size_t i, std::uint32_t slot)
        {
            ++in_service_[i];
            ++busy_;
            obs_.on_admit(i, jobs_[slot].node_arrival);
            heap_.push_back({virtual_ + jobs_[slot].work, static_cast<std::uint32_t>(i), seq_++, slot});
            std::push_heap(heap_.begin(), heap_.end(), later);
        }

        void arrive_at(std::size_t i, std::uint32_t slot)
        {
            Job &job = jobs_[slot];
            job.node_arrival = now_;
            job.work = model_.node(i).service.sample(service_rng_[i]);
            obs_.on_route(job.id, i);
            if (measuring_)
            {
                ++arrivals_[i];
                if (population_[i] >= servers_[i])
                    ++delayed_[i];
            }
            ++population_[i];
            if (in_service_[i] < servers_[i])
                admit(i, slot);
            else
                waiting_[i].push_back(slot);
        }

        void external_arrival(std::size_t i)
        {
            next_arrival_[i] = now_ + arrival_rng_[i].exponential(rates_[i]);
            arrive_at(i, allocate(now_));
        }

        void complete()
        {
            std::pop_heap(heap_.begin(), heap_.end(), later);
            const InService done = heap_.back();
            heap_.pop_back();
            virtual_ = done.tag;
            const std::size_t i = done.node;
            --in_service_[i];
            --population_[i];
            --busy_;
            if (busy_ == 0)
                virtual_ = 0.0; // idle CPU: restart the virtual clock to keep tags small
            if (!waiting_[i].empty())
            {
                const std::uint32_t next = waiting_[i].front();
                waiting_[i].pop_front();
                admit(i, next);
            }

            const double u = routing_rng_[i].uniform();
            const auto &cum = cumulative_[i];
            for (std::size_t k = 0; k < j_; ++k)
            {
                if (u < cum[k])
                {
                    arrive_at(k, done.slot);
                    return;
                }
            }
            leave(done.slot);
        }

        void leave(std::uint32_t slot)
        {
            const Job &job = jobs_[slot];
            obs_.on_exit(job.id, job.entry, now_);
            if (measuring_)
            {
                sojourn_sum_ += now_ - job.entry;
                ++sojourn_count_;
            }
            free_.push_back(slot);
            ++completed_;
            if (!measuring_ && completed_ >= warmup_jobs_)
            {
                measuring_ = true;
                measure_start_ = now_;
            }
        }

        ReplicationResult result() const
        {
            ReplicationResult r;
            r.jobs = sojourn_count_;
            r.mean_sojourn = sojourn_count_ ? sojourn_sum_ / static_cast<double>(sojourn_count_) : 0.0;
            r.measured_time = now_ - measure_start_;
            r.end_time = now_;
            r.arrivals = arrivals_;
            r.delayed = delayed_;
            for (std::size_t i = 0; i < j_; ++i)
            {
                r.delay_probability.push_back(
                    arrivals_[i] ? static_cast<double>(delayed_[i]) / static_cast<double>(arrivals_[i]) : 0.0);
                r.mean_queue.push_back(r.measured_time > 0.0 ? area_[i] / r.measured_time : 0.0);
                r.mean_population += r.mean_queue.back();
            }
            return r;
        }

        std::string dump() const
        {
            std::ostringstream os;
            os.precision(17);
            os << "t=" << now_ << " V=" << virtual_ << " B=" << busy_ << " completed=" << completed_ << " x=(";
            for (std::size_t i = 0; i < j_; ++i)
                os << (i ? "," : "") << population_[i];
            os << ") heap=" << heap_.size();
            return os.str();
        }

        const NetworkModel &model_;
        const SimConfig &config_;
        Observer &obs_;
        std::size_t j_;

        std::vector<Rng> arrival_rng_, service_rng_, routing_rng_;
        std::vector<std::int64_t> servers_;
        std::vector<double> rates_;
        std::vector<double> next_arrival_;
        std::vector<std::vector<double>> cumulative_;

        std::vector<Job> jobs_;
        std::vector<std::uint32_t> free_;
        std::vector<std::deque<std::uint32_t>> waiting_;
        std::vector<InService> heap_;
        std::vector<std::int64_t> population_, in_service_;
        std::int64_t busy_ = 0;
        double now_ = 0.0;
        double virtual_ = 0.0;
        std::uint64_t seq_ = 0;
        std::uint64_t next_id_ = 0;

        std::uint64_t completed_ = 0;
        std::uint64_t warmup_jobs_ = 0;
        bool measuring_ = false;
        double measure_start_ = 0.0;
        double sojourn_sum_ = 0.0;
        std::uint64_t sojourn_count_ = 0;
        std::vector<double> area_;
        std::vector<std::uint64_t> arrivals_, delayed_;
    };

    template <class Observer>
    ReplicationResult simulate_replication(const NetworkModel &model, const SimConfig &config, std::size_t index,
                                           Observer &observer)
    {
        Replication<Observer> rep(model, config, index, observer);
        return rep.run();
    }

    inline ReplicationResult simulate_replication(const NetworkModel &model, const SimConfig &config,
                                                  std::size_t index)
    {
        NullObserver obs;
        return simulate_replication(model, config, index, obs);
    }

    /// Writes one CSV line per departed job: id, entry, exit, node path.
    class TraceObserver : public NullObserver
    {
    public:
        explicit TraceObserver(std::ostream &out)
            : out_(out)
        {
            out_.precision(17);
            out_ << "job_id,entry,exit,path\n";
        }

        void on_route(std::uint64_t id, std::size_t node) { paths_[id].push_back(node); }

        void on_exit(std::uint64_t id, double entry, double exit)
        {
            out_ << id << ',' << entry << ',' << exit << ',';
            const auto it = paths_.find(id);
            if (it != paths_.end())
            {
                for (std::size_t k = 0; k < it->second.size(); ++k)
                    out_ << (k ? ">" : "") << it->second[k];
                paths_.erase(it);
            }
            out_ << '\n';
        }

    private:
        std::ostream &out_;
        std::unordered_map<std::uint64_t, std::vector<std::size_t>> paths_;
    };

    struct SimEstimates
    {
        stats::Estimate mean_sojourn;
        std::vector<stats::Estimate> delay_probability;
        std::vector<stats::Estimate> mean_queue;
        stats::Estimate mean_population;
        double lambda_total = 0.0;
        std::size_t replications = 0;
        std::uint64_t horizon = 0;
        std::uint64_t warmup_jobs = 0;
        double confidence = 0.0;
        std::uint64_t seed = 0;
        std::string rng;
        std::vector<ReplicationResult> per_replication;
        std::vector<std::string> warnings;
    };

    inline SimEstimates merge(const NetworkModel &model, const SimConfig &config,
                              std::vector<ReplicationResult> reps)
    {
        SimEstimates e;
        const std::size_t j = model.size();
        auto column = [&reps](auto f) {
            std::vector<double> v;
            v.reserve(reps.size());
            for (const auto &r : reps)
                v.push_back(f(r));
            return v;
        };
        e.mean_sojourn = stats::estimate(column([](const ReplicationResult &r) { return r.mean_sojourn; }),
                                         config.confidence);
        for (std::size_t i = 0; i < j; ++i)
        {
            e.delay_probability.push_back(stats::estimate(
                column([i](const ReplicationResult &r) { return r.delay_probability[i]; }), config.confidence));
            e.mean_queue.push_back(stats::estimate(column([i](const ReplicationResult &r) { return r.mean_queue[i]; }),
                                                   config.confidence));
        }
        e.mean_population = stats::estimate(column([](const ReplicationResult &r) { return r.mean_population; }),
                                            config.confidence);
        e.lambda_total = model.arrival_rates().sum();
        e.replications = reps.size();
        e.horizon = config.horizon;
        e.warmup_jobs = config.warmup_jobs();
        e.confidence = config.confidence;
        e.seed = config.seed;
        e.rng = std::string(Rng::algorithm);
        e.per_replication = std::move(reps);
        return e;
    }

    /// Independent replications, merged in replication order. Results do not
    /// depend on the number of threads. When `trace` is given, replication 0
    /// writes its per-job trace there.
    inline SimEstimates simulate(const NetworkModel &model, const SimConfig &config, std::ostream *trace = nullptr)
    {
        config.check();
        require_valid(model);
        const Utilization u = utilization(model);

        std::vector<ReplicationResult> results(config.replications);
        std::size_t first = 0;
        if (trace)
        {
            TraceObserver obs(*trace);
            results[0] = simulate_replication(model, config, 0, obs);
            first = 1;
        }
        unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
        threads = static_cast<unsigned>(std::min<std::size_t>(threads, config.replications - first));
        if (threads <= 1)
        {
            for (std::size_t r = first; r < config.replications; ++r)
                results[r] = simulate_replication(model, config, r);
        }
        else
        {
            std::atomic<std::size_t> next{first};
            std::vector<std::exception_ptr> errors(threads);
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < threads; ++t)
            {
                pool.emplace_back([&, t] {
                    try
                    {
                        for (std::size_t r = next++; r < config.replications; r = next++)
                            results[r] = simulate_replication(model, config, r);
                    }
                    catch (...)
                    {
                        errors[t] = std::current_exception();
                    }
                });
            }
            for (auto &th : pool)
                th.join();
            for (auto &err : errors)
                if (err)
                    std::rethrow_exception(err);
        }

        SimEstimates e = merge(model, config, std::move(results));
        if (!u.stable)
            e.warnings.push_back("unstable: rho = " + lpsnet::detail::fmt_num(u.total) +
                                 " >= 1; estimates will not converge");
        return e;
    }
} // namespace lpsnet::sim
