#include "lpsnet/io/json.hpp"
#include "lpsnet/io/model_file.hpp"

#include <gtest/gtest.h>

using namespace lpsnet;
using namespace lpsnet::io;

namespace
{
    const char *kTandem = R"(nodes:
  - name: front
    arrival_rate: 0.2
    servers: 3
    service: {type: hyperexp, mean: 1, scv: 4}
  - name: back
    servers: 7
    service: {type: exponential, mean: 2}
routing:
  - [0, 1]
  - [0, 0]
scenarios:
  - {name: heavy, load: 0.9}
)";

    std::string error_of(const std::string &text)
    {
        try
        {
            (void)parse_model(text);
        }
        catch (const ModelFileError &e)
        {
            return e.what();
        }
        return "";
    }
} // namespace

TEST(ModelFile, ParsesTandem)
{
    const auto f = parse_model(kTandem);
    ASSERT_EQ(f.model.size(), 2u);
    EXPECT_EQ(f.model.node(0).name, "front");
    EXPECT_EQ(f.model.node(1).arrival_rate, 0.0);
    EXPECT_EQ(f.model.node(1).servers, 7);
    EXPECT_EQ(f.model.node(0).service.kind(), "hyperexp2");
    EXPECT_NEAR(f.model.node(0).service.scv(), 4.0, 1e-12);
    EXPECT_EQ(f.model.routing()(0, 1), 1.0);
    ASSERT_EQ(f.scenarios.size(), 1u);
    EXPECT_NEAR(utilization(f.model_for("heavy")).total, 0.9, 1e-12);
    EXPECT_THROW((void)f.model_for("missing"), ModelError);
}

TEST(ModelFile, UnknownKeyWithLineNumber)
{
    const std::string text = "nodes:\n  - servers: 1\n    arrival_rate: 1\n    colour: red\n"
                             "    service: {type: exponential, mean: 0.5}\n";
    const auto msg = error_of(text);
    EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("unknown key 'colour'"), std::string::npos) << msg;
}

TEST(ModelFile, ErrorsCarryLineNumbers)
{
    EXPECT_NE(error_of("nodes:\n  - servers: 1\n    arrival_rate: fast\n    service: {type: exponential, mean: 1}\n")
                  .find("line 3"),
              std::string::npos);
    EXPECT_NE(error_of("nodes:\n  - servers: 1\n    service: {type: gamma, mean: 1}\n").find("unknown service type"),
              std::string::npos);
    EXPECT_NE(error_of("nodes:\n  - servers: 1\n    service: {type: hyperexp, mean: 1, scv: 0.5}\n").find("line 3"),
              std::string::npos);
    EXPECT_NE(error_of("nodes: [\n").find("line"), std::string::npos);
    EXPECT_NE(error_of("nodes:\n  - service: {type: exponential, mean: 1}\n").find("missing 'servers'"),
              std::string::npos);
    EXPECT_NE(error_of("routing: []\n").find("missing 'nodes'"), std::string::npos);
    EXPECT_NE(error_of("nodes:\n  - servers: 1\n    service: {type: exponential, mean: 1}\nrouting:\n  - [0, 1]\n")
                  .find("1 entries"),
              std::string::npos);
}

TEST(ModelFile, SerializeRoundTrip)
{
    const auto a = parse_model(kTandem);
    const auto text = serialize(a);
    const auto b = parse_model(text);
    ASSERT_EQ(a.model.size(), b.model.size());
    for (std::size_t i = 0; i < a.model.size(); ++i)
    {
        EXPECT_EQ(a.model.node(i).name, b.model.node(i).name);
        EXPECT_EQ(a.model.node(i).arrival_rate, b.model.node(i).arrival_rate);
        EXPECT_EQ(a.model.node(i).servers, b.model.node(i).servers);
        EXPECT_EQ(a.model.node(i).service.mean(), b.model.node(i).service.mean());
        EXPECT_EQ(a.model.node(i).service.second_moment(), b.model.node(i).service.second_moment());
    }
    EXPECT_EQ(a.model.routing(), b.model.routing());
    EXPECT_EQ(serialize(b), text);
    EXPECT_EQ(b.scenarios.at(0).load, 0.9);
}

TEST(ModelFile, DeterministicService)
{
    const auto f = parse_model("nodes:\n  - servers: 2\n    arrival_rate: 0.1\n    service: {type: deterministic, value: 3}\n");
    EXPECT_EQ(f.model.node(0).service.second_moment(), 9.0);
    EXPECT_EQ(f.model.routing().rows(), 1);
}

TEST(Json, NonFiniteBecomesNull)
{
    EXPECT_TRUE(number(std::numeric_limits<double>::infinity()).is_null());
    EXPECT_EQ(number(1.5).get<double>(), 1.5);
}
