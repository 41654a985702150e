#include "relnet/config.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace relnet;
using namespace relnet::config;
using nlohmann::json;

namespace {

json minimal() {
    return json{{"data", {{"returns", "returns.csv"}, {"embeddings", "emb"}}},
                {"classifier", {{"kind", "oracle"}, {"fixture", "truth.csv"}}}};
}

}  // namespace

TEST(Config, DefaultsAndRelativePaths) {
    auto cfg = parse_config(minimal(), "/data/run");
    EXPECT_EQ(cfg.data.returns, std::filesystem::path("/data/run/returns.csv"));
    EXPECT_EQ(cfg.data.embeddings, std::filesystem::path("/data/run/emb"));
    EXPECT_EQ(cfg.classifier.fixture, std::filesystem::path("/data/run/truth.csv"));
    EXPECT_EQ(cfg.output, std::filesystem::path("/data/run/results"));
    EXPECT_TRUE(cfg.cache.empty());
    EXPECT_EQ(cfg.backtest.k, 5u);
    EXPECT_EQ(cfg.backtest.train_len, 180u);
    EXPECT_EQ(cfg.backtest.test_len, 42u);
    EXPECT_EQ(cfg.backtest.groups, 5u);
    EXPECT_TRUE(cfg.backtest.filtering);
    EXPECT_FALSE(cfg.nw_lag);
}

TEST(Config, AbsolutePathsKept) {
    auto doc = minimal();
    doc["data"]["returns"] = "/abs/r.csv";
    doc["output"] = "../out";
    auto cfg = parse_config(doc, "/data/run");
    EXPECT_EQ(cfg.data.returns, std::filesystem::path("/abs/r.csv"));
    EXPECT_EQ(cfg.output, std::filesystem::path("/data/out"));
}

TEST(Config, UnknownKeysRejectedAtEveryLevel) {
    for (const char* path : {"/bogus", "/data/bogus", "/backtest/bogus", "/relation/bogus", "/relation/budgets/bogus",
                             "/classifier/bogus", "/metrics/bogus"}) {
        auto doc = minimal();
        doc[json::json_pointer(path)] = 1;
        try {
            parse_config(doc, "/");
            ADD_FAILURE() << path;
        } catch (const ConfigError& e) {
            EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos) << e.what();
        }
    }
}

TEST(Config, InvalidValues) {
    auto bad = [](const char* pointer, json value) {
        auto doc = minimal();
        doc[json::json_pointer(pointer)] = std::move(value);
        EXPECT_THROW(parse_config(doc, "/"), ConfigError) << pointer;
    };
    bad("/backtest/k", "five");
    bad("/backtest/k", 0);
    bad("/backtest/groups", 1);
    bad("/backtest/graph_mode", "nearest");
    bad("/backtest/weighting", "cubic");
    bad("/classifier/kind", "llm");
    bad("/classifier/parallelism", 0);
    bad("/classifier/timeout_seconds", 0);
    bad("/output", 3);
}

TEST(Config, EnumsParsed) {
    auto doc = minimal();
    doc["backtest"] = {{"graph_mode", "industry"}, {"weighting", "equal"}, {"seed", 9}, {"rebalance_every", 21}};
    auto cfg = parse_config(doc, "/");
    EXPECT_EQ(cfg.backtest.graph_mode, graph::GraphKind::industry);
    EXPECT_EQ(cfg.backtest.weighting, signal::Weighting::equal);
    EXPECT_EQ(cfg.backtest.seed, 9u);
    EXPECT_EQ(cfg.backtest.rebalance_every, 21u);
}

TEST(Config, PartialRelationWeights) {
    auto doc = minimal();
    doc["relation"]["weights"] = {{"competitor", 0.0}};
    auto cfg = parse_config(doc, "/");
    const relation::RelationWeights defaults;
    for (auto label : relation::kAllLabels) {
        if (label == relation::RelationLabel::competitor) {
            EXPECT_EQ(cfg.backtest.relation_weights[label], 0.0);
        } else {
            EXPECT_EQ(cfg.backtest.relation_weights[label], defaults[label]);
        }
    }
    doc["relation"]["weights"] = {{"cousin", 1.0}};
    EXPECT_THROW(parse_config(doc, "/"), ConfigError);
    doc["relation"]["weights"] = {{"peer", -1.0}};
    EXPECT_THROW(parse_config(doc, "/"), ConfigError);
}

TEST(Config, ClassifierRequirements) {
    auto doc = minimal();
    doc["classifier"] = {{"kind", "http"}};
    EXPECT_THROW(parse_config(doc, "/"), ConfigError);
    doc["classifier"]["url"] = "http://127.0.0.1:9/v1/chat/completions";
    EXPECT_NO_THROW(parse_config(doc, "/"));

    for (const char* kind : {"mock", "oracle"}) {
        doc["classifier"] = {{"kind", kind}};
        EXPECT_THROW(parse_config(doc, "/"), ConfigError) << kind;
        doc["backtest"]["filtering"] = false;
        EXPECT_NO_THROW(parse_config(doc, "/")) << kind;
        doc.erase("backtest");
    }
}

TEST(Config, OptionalCounts) {
    auto doc = minimal();
    doc["classifier"]["call_budget"] = 12;
    doc["metrics"]["nw_lag"] = 3;
    auto cfg = parse_config(doc, "/");
    EXPECT_EQ(cfg.classifier.call_budget, 12u);
    EXPECT_EQ(cfg.nw_lag, 3u);
    doc["classifier"]["call_budget"] = nullptr;
    EXPECT_FALSE(parse_config(doc, "/").classifier.call_budget);
}

TEST(Override, ParsesJsonOrFallsBackToString) {
    json doc = minimal();
    apply_override(doc, "backtest.k=7");
    apply_override(doc, "backtest.filtering=false");
    apply_override(doc, "backtest.graph_mode=random");
    apply_override(doc, "relation.weights.peer=0.25");
    apply_override(doc, "output=\"quoted\"");
    EXPECT_EQ(doc["backtest"]["k"], 7);
    EXPECT_EQ(doc["backtest"]["filtering"], false);
    EXPECT_EQ(doc["backtest"]["graph_mode"], "random");
    EXPECT_EQ(doc["relation"]["weights"]["peer"], 0.25);
    EXPECT_EQ(doc["output"], "quoted");
    auto cfg = parse_config(doc, "/");
    EXPECT_EQ(cfg.backtest.k, 7u);
    EXPECT_EQ(cfg.backtest.graph_mode, graph::GraphKind::random);
}

TEST(Override, MalformedAssignments) {
    json doc = minimal();
    EXPECT_THROW(apply_override(doc, "backtest.k"), ConfigError);
    EXPECT_THROW(apply_override(doc, "=3"), ConfigError);
    EXPECT_THROW(apply_override(doc, "backtest..k=3"), ConfigError);
    EXPECT_THROW(apply_override(doc, "data.returns.x=3"), ConfigError);
}

TEST(Config, LoadAppliesOverridesInOrder) {
    fixture::TempDir dir;
    std::filesystem::create_directories(dir / "cfg");
    write_file(dir / "cfg/config.json", minimal().dump());
    auto cfg = load_config(dir / "cfg/config.json", {"backtest.k=3", "backtest.k=4"});
    EXPECT_EQ(cfg.backtest.k, 4u);
    EXPECT_EQ(cfg.data.returns, (dir.path() / "cfg/returns.csv").lexically_normal());
    write_file(dir / "bad.json", "{");
    EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
}

TEST(Config, EchoIsCompleteAndReparses) {
    auto doc = minimal();
    doc["relation"]["weights"] = {{"competitor", 0.1}};
    doc["classifier"]["call_budget"] = 5;
    auto cfg = parse_config(doc, "/data/run");
    auto echo = cfg.to_json();
    for (const char* key : {"data", "backtest", "relation", "classifier", "metrics", "output"}) {
        EXPECT_TRUE(echo.contains(key)) << key;
    }
    EXPECT_EQ(echo["backtest"]["k"], 5);
    EXPECT_EQ(echo["relation"]["weights"]["competitor"], 0.1);
    EXPECT_TRUE(echo["metrics"]["nw_lag"].is_null());
    EXPECT_FALSE(echo["classifier"].contains("api_key"));

    auto again = parse_config(echo, "/elsewhere");
    EXPECT_EQ(again.to_json(), echo);
}
