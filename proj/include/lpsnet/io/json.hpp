#pragma once

#include "lpsnet/ctmc.hpp"
#include "lpsnet/heavy_traffic.hpp"
#include "lpsnet/model.hpp"
#include "lpsnet/sim.hpp"
#include "lpsnet/stats.hpp"
#include "lpsnet/table1.hpp"

#include <json.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace lpsnet::io
{
    using Json = nlohmann::ordered_json;

    inline constexpr int kSchemaVersion = 1;

    inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

    inline Json to_json(const Vector &v)
    {
        Json a = Json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i)
            a.push_back(number(v[i]));
        return a;
    }

    inline Json to_json(const std::vector<double> &v)
    {
        Json a = Json::array();
        for (double x : v)
            a.push_back(number(x));
        return a;
    }

    inline Json to_json(const stats::Estimate &e)
    {
        return Json{{"mean", number(e.mean)}, {"half_width", number(e.half_width)}, {"n", e.n}};
    }

    inline Json warnings_json(const std::vector<std::string> &w)
    {
        Json a = Json::array();
        for (const auto &s : w)
            a.push_back(s);
        return a;
    }

    inline Json to_json(const DerivedQuantities &d)
    {
        Json j;
        j["lambda_total"] = number(d.lambda_total);
        j["gamma"] = to_json(d.gamma);
        j["rho_i"] = to_json(d.rho_i);
        j["rho"] = number(d.rho);
        j["stable"] = d.stable;
        j["tau"] = to_json(d.tau);
        j["tau2"] = to_json(d.tau2);
        j["ES"] = number(d.service.mean);
        j["ES2"] = number(d.service.second);
        j["m"] = number(d.service.m);
        j["sigma2"] = number(d.service.sigma2);
        j["scv_S"] = number(d.service.scv);
        j["bottleneck"] = d.bottleneck.index;
        j["bottleneck_tie"] = d.bottleneck.tie;
        j["w_star"] = d.w_star ? number(*d.w_star) : Json(nullptr);
        std::vector<std::string> w;
        for (const auto &v : d.warnings)
            w.push_back(v.message);
        j["warnings"] = warnings_json(w);
        return j;
    }

    inline Json to_json(const ht::HeavyTrafficSummary &s, bool raw)
    {
        Json j;
        j["theta"] = number(s.theta);
        j["n_star"] = number(s.n_star);
        j["w_mean"] = number(s.w_mean);
        j["w_star"] = number(s.w_star);
        j["bottleneck"] = s.bottleneck;
        j["bottleneck_tie"] = s.bottleneck_tie;
        j["p_d"] = number(s.p_d);
        j["EV"] = number(s.mean_sojourn);
        j["mean_queue"] = to_json(s.mean_queue);
        j["mean_population"] = number(s.mean_population);
        if (raw)
        {
            j["p_d_raw"] = number(s.p_d_raw);
            j["EV_raw"] = number(s.mean_sojourn_raw);
            j["mean_queue_raw"] = to_json(s.mean_queue_raw);
        }
        j["warnings"] = warnings_json(s.warnings);
        return j;
    }

    inline Json to_json(const sim::SimEstimates &e)
    {
        Json j;
        j["schema_version"] = kSchemaVersion;
        j["kind"] = "simulation";
        j["rng"] = Json{{"algorithm", e.rng}, {"seed", e.seed}};
        j["replications"] = e.replications;
        j["horizon_jobs"] = e.horizon;
        j["warmup_jobs"] = e.warmup_jobs;
        j["confidence"] = number(e.confidence);
        j["lambda_total"] = number(e.lambda_total);
        j["mean_sojourn"] = to_json(e.mean_sojourn);
        Json dp = Json::array(), mq = Json::array();
        for (const auto &x : e.delay_probability)
            dp.push_back(to_json(x));
        for (const auto &x : e.mean_queue)
            mq.push_back(to_json(x));
        j["delay_probability"] = dp;
        j["mean_queue"] = mq;
        j["mean_population"] = to_json(e.mean_population);
        Json reps = Json::array();
        for (const auto &r : e.per_replication)
        {
            reps.push_back(Json{{"mean_sojourn", number(r.mean_sojourn)},
                                {"jobs", r.jobs},
                                {"delay_probability", to_json(r.delay_probability)},
                                {"mean_queue", to_json(r.mean_queue)},
                                {"measured_time", number(r.measured_time)}});
        }
        j["per_replication"] = reps;
        j["warnings"] = warnings_json(e.warnings);
        return j;
    }

    inline Json to_json(const ctmc::SteadyState &s)
    {
        Json j;
        j["schema_version"] = kSchemaVersion;
        j["kind"] = "ctmc";
        j["truncation"] = s.truncation;
        j["states"] = s.probabilities.size();
        j["mean_queue"] = to_json(s.mean_queue);
        j["mean_population"] = number(s.mean_population);
        j["mean_sojourn"] = number(s.mean_sojourn);
        j["delay_probability"] = to_json(s.delay_probability);
        j["truncation_mass"] = to_json(s.truncation_mass);
        j["max_truncation_mass"] = number(s.max_truncation_mass);
        return j;
    }

    inline Json to_json(const table1::Report &r)
    {
        Json j;
        j["schema_version"] = kSchemaVersion;
        j["kind"] = "validation";
        Json rows = Json::array();
        for (const auto &x : r.rows)
        {
            Json row;
            row["row"] = x.row;
            row["parameters"] = Json{{"beta1", x.reference.beta1}, {"beta2", x.reference.beta2},
                                     {"scv1", x.reference.scv1},   {"scv2", x.reference.scv2},
                                     {"K1", x.reference.k1},       {"K2", x.reference.k2}};
            row["bottleneck"] = x.bottleneck;
            row["approximation"] = number(x.approximation);
            row["reference_approximation"] = number(x.reference.approximation);
            row["approximation_ok"] = x.approximation_ok;
            row["reference_simulation"] = number(x.reference.simulation);
            if (x.simulation)
            {
                row["simulation"] = to_json(x.simulation->mean_sojourn);
                row["simulation_ok"] = x.simulation_ok;
            }
            else
            {
                row["simulation"] = nullptr;
                row["simulation_ok"] = nullptr;
            }
            rows.push_back(row);
        }
        j["rows"] = rows;
        j["approximation_passed"] = r.approximation_passed;
        j["simulation_passed"] = r.simulated ? Json(r.simulation_passed) : Json(nullptr);
        j["simulation_required"] = r.simulation_required();
        j["passed"] = r.passed();
        return j;
    }
} // namespace lpsnet::io
