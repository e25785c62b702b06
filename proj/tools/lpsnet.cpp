// lpsnet: command-line front end for the layered processor-sharing network
// engines (closed-form analysis, fluid model, simulation, CTMC oracle) and the
// built-in Table 1 validation harness.
//
// Exit codes: 0 ok, 1 usage, 2 model error, 3 numeric failure.

#include "lpsnet/io/json.hpp"
#include "lpsnet/io/model_file.hpp"
#include "lpsnet/lpsnet.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace
{
    using lpsnet::io::Json;

    enum ExitCode : int
    {
        kOk = 0,
        kUsage = 1,
        kModel = 2,
        kNumeric = 3
    };

    struct ModelArgs
    {
        std::string path;
        std::optional<std::string> scenario;
        std::optional<double> load;

        void add(CLI::App *cmd)
        {
            cmd->add_option("model", path, "Model file (YAML)")->required();
            cmd->add_option("--scenario", scenario, "Apply a named scenario from the model file");
            cmd->add_option("--load", load, "Rescale arrival rates to this total CPU load");
        }

        [[nodiscard]] lpsnet::NetworkModel resolve() const
        {
            const auto file = lpsnet::io::load_model(path);
            auto model = file.model_for(scenario);
            if (load)
                model = lpsnet::with_load(model, *load);
            return model;
        }
    };

    class Output
    {
    public:
        explicit Output(const std::string &path)
        {
            if (!path.empty())
            {
                file_.open(path);
                if (!file_)
                    throw std::runtime_error("cannot open output file '" + path + "'");
            }
        }
        std::ostream &stream() { return file_.is_open() ? static_cast<std::ostream &>(file_) : std::cout; }

    private:
        std::ofstream file_;
    };

    void print_warnings(const std::vector<std::string> &warnings)
    {
        for (const auto &w : warnings)
            std::cerr << "warning: " << w << '\n';
    }

    Json model_json(const lpsnet::NetworkModel &model)
    {
        Json nodes = Json::array();
        for (const auto &n : model.nodes())
        {
            nodes.push_back(Json{{"name", n.name},
                                 {"arrival_rate", n.arrival_rate},
                                 {"servers", n.servers},
                                 {"service", Json{{"type", std::string(n.service.kind())},
                                                  {"mean", n.service.mean()},
                                                  {"second_moment", n.service.second_moment()},
                                                  {"scv", n.service.scv()}}}});
        }
        Json routing = Json::array();
        for (Eigen::Index i = 0; i < model.routing().rows(); ++i)
            routing.push_back(lpsnet::io::to_json(lpsnet::Vector(model.routing().row(i).transpose())));
        return Json{{"nodes", nodes}, {"routing", routing}};
    }

    int cmd_analyze(const ModelArgs &args, bool raw, const std::string &out_path)
    {
        const auto model = args.resolve();
        const auto derived = lpsnet::derive(model);
        Json j;
        j["schema_version"] = lpsnet::io::kSchemaVersion;
        j["kind"] = "analysis";
        j["model"] = model_json(model);
        j["derived"] = lpsnet::io::to_json(derived);
        j["unstable"] = !derived.stable;
        if (derived.stable)
        {
            const auto summary = lpsnet::ht::summarize(model);
            j["heavy_traffic"] = lpsnet::io::to_json(summary, raw);
            j["EV"] = summary.mean_sojourn;
            print_warnings(summary.warnings);
        }
        else
        {
            j["heavy_traffic"] = nullptr;
            j["EV"] = nullptr;
            std::cerr << "warning: model is unstable (rho = " << derived.rho << "); no approximations\n";
        }
        Output out(out_path);
        out.stream() << j.dump(2) << '\n';
        return kOk;
    }

    struct FluidArgs
    {
        std::vector<double> x0;
        std::optional<double> manifold;
        double horizon = 100.0;
        bool critical = false;
        bool virtual_servers = false;
        std::vector<double> servers;
        std::optional<double> step;
        std::size_t stride = 100;
        bool no_richardson = false;
    };

    int cmd_fluid(const ModelArgs &margs, const FluidArgs &a, const std::string &out_path)
    {
        const auto model = margs.resolve();
        lpsnet::require_valid(model);
        std::optional<lpsnet::Vector> k;
        if (!a.servers.empty())
        {
            if (a.servers.size() != model.size())
                throw lpsnet::ModelError("--servers needs one value per node");
            k = Eigen::Map<const lpsnet::Vector>(a.servers.data(), static_cast<Eigen::Index>(a.servers.size()));
        }
        else if (a.virtual_servers)
        {
            const double rho = lpsnet::utilization(model).total;
            if (!(rho < 1.0))
                throw lpsnet::UnstableModelError("--virtual needs rho < 1");
            k = (1.0 - rho) * model.servers();
        }
        const auto fm = lpsnet::fluid::FluidModel::from(model, k, a.critical);

        lpsnet::Vector x0;
        if (a.manifold)
            x0 = lpsnet::fluid::invariant_point(fm, *a.manifold);
        else if (!a.x0.empty())
        {
            if (a.x0.size() != model.size())
                throw lpsnet::ModelError("--x0 needs one value per node");
            x0 = Eigen::Map<const lpsnet::Vector>(a.x0.data(), static_cast<Eigen::Index>(a.x0.size()));
        }
        else
            x0 = lpsnet::Vector::Zero(static_cast<Eigen::Index>(model.size()));

        lpsnet::fluid::FluidConfig cfg;
        cfg.horizon = a.horizon;
        cfg.step = a.step;
        cfg.stride = a.stride;
        cfg.richardson_check = !a.no_richardson;
        const auto traj = lpsnet::fluid::integrate(fm, x0, cfg);
        print_warnings(traj.warnings);

        Output out(out_path);
        auto &os = out.stream();
        os << std::setprecision(17);
        os << "t";
        for (std::size_t i = 0; i < model.size(); ++i)
            os << ",x_" << (i + 1);
        os << ",workload,lyapunov,dist_manifold\n";
        for (const auto &s : traj.samples)
        {
            os << s.t;
            for (Eigen::Index i = 0; i < s.x.size(); ++i)
                os << ',' << s.x[i];
            os << ',' << s.workload << ',' << s.lyapunov << ',' << s.distance << '\n';
        }
        return kOk;
    }

    struct SimArgs
    {
        std::uint64_t seed = 1;
        std::size_t reps = 10;
        double jobs = 1e6;
        double warmup = 0.2;
        double confidence = 0.95;
        unsigned threads = 0;
        std::string trace;

        void add(CLI::App *cmd)
        {
            cmd->add_option("--seed", seed, "Root RNG seed")->capture_default_str();
            cmd->add_option("--reps", reps, "Independent replications")->capture_default_str();
            cmd->add_option("--jobs", jobs, "Completed jobs per replication (warmup included)")
                ->capture_default_str();
            cmd->add_option("--warmup", warmup, "Fraction of jobs discarded as warmup")->capture_default_str();
            cmd->add_option("--confidence", confidence, "Confidence level of the intervals")->capture_default_str();
            cmd->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
        }

        [[nodiscard]] lpsnet::sim::SimConfig config() const
        {
            if (!(jobs >= 1.0))
                throw std::invalid_argument("--jobs must be >= 1");
            lpsnet::sim::SimConfig c;
            c.seed = seed;
            c.replications = reps;
            c.horizon = static_cast<std::uint64_t>(jobs);
            c.warmup_fraction = warmup;
            c.confidence = confidence;
            c.threads = threads;
            return c;
        }
    };

    int cmd_simulate(const ModelArgs &margs, const SimArgs &a, const std::string &out_path)
    {
        const auto model = margs.resolve();
        std::optional<std::ofstream> trace;
        if (!a.trace.empty())
        {
            trace.emplace(a.trace);
            if (!*trace)
                throw std::runtime_error("cannot open trace file '" + a.trace + "'");
        }
        const auto est = lpsnet::sim::simulate(model, a.config(), trace ? &*trace : nullptr);
        print_warnings(est.warnings);
        Output out(out_path);
        out.stream() << lpsnet::io::to_json(est).dump(2) << '\n';
        return kOk;
    }

    int cmd_ctmc(const ModelArgs &margs, std::size_t truncation, const std::string &out_path)
    {
        const auto model = margs.resolve();
        const auto ss = lpsnet::ctmc::steady_state(model, truncation);
        Output out(out_path);
        out.stream() << lpsnet::io::to_json(ss).dump(2) << '\n';
        return kOk;
    }

    std::string sig6(double v)
    {
        std::ostringstream os;
        os << std::setprecision(6) << v;
        return os.str();
    }

    int cmd_validate(std::vector<std::size_t> rows, bool no_sim, const SimArgs &a, const std::string &json_path)
    {
        if (rows.empty())
            rows = lpsnet::table1::all_rows();
        std::optional<lpsnet::sim::SimConfig> cfg;
        if (!no_sim)
            cfg = a.config();
        const auto report = lpsnet::table1::run(rows, cfg);

        std::printf("%-4s %-24s %-3s %10s %10s %-4s %10s %10s %10s %-4s\n", "row", "(b1,b2,c1,c2,K1,K2)", "i*",
                    "approx", "reference", "ok", "sim", "+/-", "reference", "ok");
        for (const auto &r : report.rows)
        {
            const auto &p = r.reference;
            std::ostringstream params;
            params << '(' << p.beta1 << ',' << p.beta2 << ',' << p.scv1 << ',' << p.scv2 << ',' << p.k1 << ','
                   << p.k2 << ')';
            std::string sim = "-", hw = "-", sim_ok = "-";
            if (r.simulation)
            {
                sim = sig6(r.simulation->mean_sojourn.mean);
                hw = sig6(r.simulation->mean_sojourn.half_width);
                sim_ok = r.simulation_ok ? "yes" : "NO";
            }
            std::printf("%-4zu %-24s %-3zu %10s %10s %-4s %10s %10s %10s %-4s\n", r.row, params.str().c_str(),
                        r.bottleneck + 1, sig6(r.approximation).c_str(), sig6(p.approximation).c_str(),
                        r.approximation_ok ? "yes" : "NO", sim.c_str(), hw.c_str(), sig6(p.simulation).c_str(),
                        sim_ok.c_str());
        }
        std::printf("approximation: %zu/%zu within +/-%g\n", report.approximation_passed, report.rows.size(),
                    lpsnet::table1::kApproxTolerance);
        if (report.simulated)
            std::printf("simulation:    %zu/%zu within %g%% or covered by the CI (need %zu)\n",
                        report.simulation_passed, report.rows.size(), 100.0 * lpsnet::table1::kSimRelTolerance,
                        report.simulation_required());
        std::printf("%s\n", report.passed() ? "PASS" : "FAIL");

        if (!json_path.empty())
        {
            std::ofstream f(json_path);
            if (!f)
                throw std::runtime_error("cannot open output file '" + json_path + "'");
            f << lpsnet::io::to_json(report).dump(2) << '\n';
        }
        return report.passed() ? kOk : kNumeric;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Analysis, fluid, heavy-traffic and simulation engines for layered processor-sharing networks"};
    app.require_subcommand(1);

    std::string out_path;

    ModelArgs analyze_model;
    bool raw = false;
    auto *analyze = app.add_subcommand("analyze", "Closed-form quantities and heavy-traffic approximations (JSON)");
    analyze_model.add(analyze);
    analyze->add_flag("--raw", raw, "Also report the uncorrected approximations");
    analyze->add_option("-o,--output", out_path, "Write JSON here instead of stdout");

    ModelArgs fluid_model;
    FluidArgs fluid_args;
    auto *fluid = app.add_subcommand("fluid", "Integrate the fluid model (CSV trajectory)");
    fluid_model.add(fluid);
    auto *x0_opt = fluid->add_option("--x0", fluid_args.x0, "Initial state, comma separated")->delimiter(',');
    fluid->add_option("--manifold", fluid_args.manifold, "Start on the invariant manifold at this workload")
        ->excludes(x0_opt);
    fluid->add_option("--horizon", fluid_args.horizon, "Integration horizon T")->capture_default_str();
    fluid->add_flag("--critical", fluid_args.critical, "Rescale arrival rates so that rho = 1");
    auto *servers_opt =
        fluid->add_option("--servers", fluid_args.servers, "Fluid server counts, comma separated")->delimiter(',');
    fluid->add_flag("--virtual", fluid_args.virtual_servers, "Use (1 - rho) K as fluid server counts")
        ->excludes(servers_opt);
    fluid->add_option("--step", fluid_args.step, "RK4 step (default min(1e-3 T, 1e-2 / rate scale))");
    fluid->add_option("--stride", fluid_args.stride, "Output every n-th step")->capture_default_str();
    fluid->add_flag("--no-richardson", fluid_args.no_richardson, "Skip the step-halving check");
    fluid->add_option("-o,--output", out_path, "Write CSV here instead of stdout");

    ModelArgs sim_model;
    SimArgs sim_args;
    auto *simulate = app.add_subcommand("simulate", "Discrete-event simulation (JSON)");
    sim_model.add(simulate);
    sim_args.add(simulate);
    simulate->add_option("--trace", sim_args.trace, "Per-job CSV trace of replication 0");
    simulate->add_option("-o,--output", out_path, "Write JSON here instead of stdout");

    ModelArgs ctmc_model;
    std::size_t truncation = 50;
    auto *ctmc = app.add_subcommand("ctmc", "Exact truncated-CTMC steady state, exponential service only (JSON)");
    ctmc_model.add(ctmc);
    ctmc->add_option("--truncation,-N", truncation, "Per-node population cap N")->capture_default_str();
    ctmc->add_option("-o,--output", out_path, "Write JSON here instead of stdout");

    std::vector<std::size_t> rows;
    bool no_sim = false;
    SimArgs val_args;
    std::string json_path;
    auto *validate = app.add_subcommand("validate", "Reproduce the 16-row tandem validation table");
    validate->add_option("--rows", rows, "1-based rows to run, comma separated")->delimiter(',');
    validate->add_flag("--no-sim", no_sim, "Only check the approximation column");
    val_args.add(validate);
    validate->add_option("--json", json_path, "Also write the report as JSON");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return kUsage;
    }

    try
    {
        if (*analyze)
            return cmd_analyze(analyze_model, raw, out_path);
        if (*fluid)
            return cmd_fluid(fluid_model, fluid_args, out_path);
        if (*simulate)
            return cmd_simulate(sim_model, sim_args, out_path);
        if (*ctmc)
            return cmd_ctmc(ctmc_model, truncation, out_path);
        if (*validate)
            return cmd_validate(rows, no_sim, val_args, json_path);
    }
    catch (const lpsnet::ModelError &e)
    {
        std::cerr << "model error: " << e.what() << '\n';
        return kModel;
    }
    catch (const lpsnet::NumericError &e)
    {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    }
    catch (const std::out_of_range &e)
    {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kNumeric;
    }
    return kUsage;
}
