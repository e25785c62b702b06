#pragma once

// Model file format (YAML):
//
//   nodes:                         # required, one entry per node, in order
//     - name: front                # optional
//       arrival_rate: 0.2          # external Poisson rate, >= 0
//       servers: 3                 # integer >= 1
//       service: {type: exponential, mean: 1}
//   routing:                       # optional J x J matrix, default all zeros
//     - [0, 1]
//     - [0, 0]
//   scenarios:                     # optional load overrides
//     - {name: heavy, load: 0.9}   # rescales all arrival rates proportionally
//
// service types: exponential {mean}, hyperexp {mean, scv} (balanced-means
// fit), hyperexp2 {p1, rate1, rate2}, deterministic {value}.
// Unknown keys are rejected; errors carry 1-based line numbers.

#include "lpsnet/distributions.hpp"
#include "lpsnet/error.hpp"
#include "lpsnet/model.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace lpsnet::io
{
    class ModelFileError : public ModelError
    {
    public:
        using ModelError::ModelError;
    };

    struct Scenario
    {
        std::string name;
        double load = 0.0;
    };

    struct ModelFile
    {
        NetworkModel model;
        std::vector<Scenario> scenarios;

        [[nodiscard]] const Scenario &scenario(const std::string &name) const
        {
            for (const auto &s : scenarios)
                if (s.name == name)
                    return s;
            throw ModelError("unknown scenario '" + name + "'");
        }

        [[nodiscard]] NetworkModel model_for(const std::optional<std::string> &scenario_name) const
        {
            if (!scenario_name)
                return model;
            return with_load(model, scenario(*scenario_name).load);
        }
    };

    namespace detail
    {
        inline std::string where(const YAML::Node &n)
        {
            const auto mark = n.Mark();
            if (mark.line < 0)
                return "";
            return "line " + std::to_string(mark.line + 1) + ": ";
        }

        [[noreturn]] inline void fail(const YAML::Node &n, const std::string &msg)
        {
            throw ModelFileError(where(n) + msg);
        }

        inline void only_keys(const YAML::Node &map, std::initializer_list<const char *> allowed, const std::string &ctx)
        {
            if (!map.IsMap())
                fail(map, ctx + " must be a mapping");
            const std::set<std::string> ok(allowed.begin(), allowed.end());
            for (const auto &kv : map)
            {
                const auto key = kv.first.as<std::string>();
                if (!ok.count(key))
                    fail(kv.first, "unknown key '" + key + "' in " + ctx);
            }
        }

        inline YAML::Node require(const YAML::Node &map, const char *key, const std::string &ctx)
        {
            const YAML::Node n = map[key];
            if (!n)
                fail(map, ctx + " is missing '" + key + "'");
            return n;
        }

        inline double as_double(const YAML::Node &n, const std::string &what)
        {
            try
            {
                return n.as<double>();
            }
            catch (const YAML::Exception &)
            {
                fail(n, what + " must be a number");
            }
        }

        inline std::int64_t as_int(const YAML::Node &n, const std::string &what)
        {
            try
            {
                return n.as<std::int64_t>();
            }
            catch (const YAML::Exception &)
            {
                fail(n, what + " must be an integer");
            }
        }

        inline ServiceDistribution parse_service(const YAML::Node &n, const std::string &ctx)
        {
            if (!n.IsMap())
                fail(n, ctx + " service must be a mapping");
            const auto type = require(n, "type", ctx + " service").as<std::string>();
            try
            {
                if (type == "exponential")
                {
                    only_keys(n, {"type", "mean"}, ctx + " service");
                    return Exponential{as_double(require(n, "mean", ctx), "mean")};
                }
                if (type == "hyperexp")
                {
                    only_keys(n, {"type", "mean", "scv"}, ctx + " service");
                    return fit_hyperexp(as_double(require(n, "mean", ctx), "mean"),
                                        as_double(require(n, "scv", ctx), "scv"));
                }
                if (type == "hyperexp2")
                {
                    only_keys(n, {"type", "p1", "rate1", "rate2"}, ctx + " service");
                    return HyperExponential2{as_double(require(n, "p1", ctx), "p1"),
                                             as_double(require(n, "rate1", ctx), "rate1"),
                                             as_double(require(n, "rate2", ctx), "rate2")};
                }
                if (type == "deterministic")
                {
                    only_keys(n, {"type", "value"}, ctx + " service");
                    return Deterministic{as_double(require(n, "value", ctx), "value")};
                }
            }
            catch (const ModelFileError &)
            {
                throw;
            }
            catch (const ModelError &e)
            {
                fail(n, e.what());
            }
            fail(n, "unknown service type '" + type + "'");
        }
    } // namespace detail

    inline ModelFile parse_model(const std::string &text)
    {
        YAML::Node root;
        try
        {
            root = YAML::Load(text);
        }
        catch (const YAML::ParserException &e)
        {
            throw ModelFileError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
        }
        if (!root || !root.IsMap())
            throw ModelFileError("model file must be a mapping with a 'nodes' list");
        detail::only_keys(root, {"nodes", "routing", "scenarios"}, "model");

        const YAML::Node nodes_yaml = detail::require(root, "nodes", "model");
        if (!nodes_yaml.IsSequence() || nodes_yaml.size() == 0)
            detail::fail(nodes_yaml, "'nodes' must be a non-empty list");
        std::vector<Node> nodes;
        for (std::size_t i = 0; i < nodes_yaml.size(); ++i)
        {
            const YAML::Node n = nodes_yaml[i];
            const std::string ctx = "node " + std::to_string(i);
            detail::only_keys(n, {"name", "arrival_rate", "servers", "service"}, ctx);
            Node node;
            node.name = n["name"] ? n["name"].as<std::string>() : "node" + std::to_string(i + 1);
            node.arrival_rate = n["arrival_rate"] ? detail::as_double(n["arrival_rate"], ctx + " arrival_rate") : 0.0;
            node.servers = detail::as_int(detail::require(n, "servers", ctx), ctx + " servers");
            node.service = detail::parse_service(detail::require(n, "service", ctx), ctx);
            nodes.push_back(std::move(node));
        }

        const auto j = static_cast<Eigen::Index>(nodes.size());
        Matrix routing = Matrix::Zero(j, j);
        if (const YAML::Node r = root["routing"])
        {
            if (!r.IsSequence() || static_cast<Eigen::Index>(r.size()) != j)
                detail::fail(r, "'routing' must list " + std::to_string(j) + " rows");
            for (Eigen::Index a = 0; a < j; ++a)
            {
                const YAML::Node row = r[static_cast<std::size_t>(a)];
                if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != j)
                    detail::fail(row, "routing row " + std::to_string(a) + " must have " + std::to_string(j) +
                                          " entries");
                for (Eigen::Index b = 0; b < j; ++b)
                    routing(a, b) = detail::as_double(row[static_cast<std::size_t>(b)], "routing entry");
            }
        }

        std::vector<Scenario> scenarios;
        if (const YAML::Node s = root["scenarios"])
        {
            if (!s.IsSequence())
                detail::fail(s, "'scenarios' must be a list");
            for (const auto &item : s)
            {
                detail::only_keys(item, {"name", "load"}, "scenario");
                Scenario sc;
                sc.name = detail::require(item, "name", "scenario").as<std::string>();
                sc.load = detail::as_double(detail::require(item, "load", "scenario"), "scenario load");
                if (!(sc.load > 0.0))
                    detail::fail(item, "scenario load must be positive");
                scenarios.push_back(std::move(sc));
            }
        }
        return ModelFile{NetworkModel(std::move(nodes), std::move(routing)), std::move(scenarios)};
    }

    inline ModelFile load_model(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ModelFileError("cannot open model file '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        try
        {
            return parse_model(ss.str());
        }
        catch (const ModelFileError &e)
        {
            throw ModelFileError(path + ": " + e.what());
        }
    }

    /// Emits a model file that parses back to the same model (hyper-exponential
    /// services are written with their explicit phase parameters).
    inline std::string serialize(const ModelFile &file)
    {
        YAML::Emitter out;
        out.SetDoublePrecision(17);
        out << YAML::BeginMap << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
        for (const auto &n : file.model.nodes())
        {
            out << YAML::BeginMap;
            out << YAML::Key << "name" << YAML::Value << n.name;
            out << YAML::Key << "arrival_rate" << YAML::Value << n.arrival_rate;
            out << YAML::Key << "servers" << YAML::Value << n.servers;
            out << YAML::Key << "service" << YAML::Value << YAML::Flow << YAML::BeginMap;
            std::visit(
                [&out](const auto &d) {
                    using T = std::decay_t<decltype(d)>;
                    if constexpr (std::is_same_v<T, Exponential>)
                        out << YAML::Key << "type" << YAML::Value << "exponential" << YAML::Key << "mean"
                            << YAML::Value << d.mean;
                    else if constexpr (std::is_same_v<T, HyperExponential2>)
                        out << YAML::Key << "type" << YAML::Value << "hyperexp2" << YAML::Key << "p1" << YAML::Value
                            << d.p1 << YAML::Key << "rate1" << YAML::Value << d.rate1 << YAML::Key << "rate2"
                            << YAML::Value << d.rate2;
                    else
                        out << YAML::Key << "type" << YAML::Value << "deterministic" << YAML::Key << "value"
                            << YAML::Value << d.value;
                },
                n.service.variant());
            out << YAML::EndMap << YAML::EndMap;
        }
        out << YAML::EndSeq;
        out << YAML::Key << "routing" << YAML::Value << YAML::BeginSeq;
        const Matrix &p = file.model.routing();
        for (Eigen::Index a = 0; a < p.rows(); ++a)
        {
            out << YAML::Flow << YAML::BeginSeq;
            for (Eigen::Index b = 0; b < p.cols(); ++b)
                out << p(a, b);
            out << YAML::EndSeq;
        }
        out << YAML::EndSeq;
        if (!file.scenarios.empty())
        {
            out << YAML::Key << "scenarios" << YAML::Value << YAML::BeginSeq;
            for (const auto &s : file.scenarios)
                out << YAML::Flow << YAML::BeginMap << YAML::Key << "name" << YAML::Value << s.name << YAML::Key
                    << "load" << YAML::Value << s.load << YAML::EndMap;
            out << YAML::EndSeq;
        }
        out << YAML::EndMap;
        return std::string(out.c_str()) + "\n";
    }
} // namespace lpsnet::io
