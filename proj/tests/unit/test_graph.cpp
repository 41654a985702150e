#include "relnet/graph.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

using namespace relnet;
using namespace relnet::graph;

namespace {

std::set<std::pair<std::string, std::string>> id_edges(const CandidateGraph& g) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& e : g.edges) out.emplace(g.nodes[e.a], g.nodes[e.b]);
    return out;
}

VectorMap random_vectors(std::size_t n, std::size_t d, std::uint64_t seed, const std::string& prefix = "S") {
    std::mt19937_64 rng(seed);
    VectorMap out;
    for (const auto& id : fixture::ids(n, prefix)) out[id] = fixture::gaussian(rng, d);
    return out;
}

std::vector<std::string> keys(const VectorMap& m) {
    std::vector<std::string> out;
    for (const auto& [k, _] : m) out.push_back(k);
    return out;
}

}  // namespace

TEST(Cosine, HandValues) {
    const std::vector<double> x{1, 0}, y{0, 1}, d{1, 1};
    EXPECT_EQ(cosine_similarity(x, x), 1.0);
    EXPECT_EQ(cosine_similarity(x, y), 0.0);
    EXPECT_NEAR(cosine_similarity(d, x), 0.70710678, 5e-9);
    EXPECT_NEAR(cosine_similarity(d, x), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Cosine, ZeroNormIsAnError) {
    const std::vector<double> z{0, 0}, x{1, 0};
    EXPECT_THROW(cosine_similarity(z, x), DataError);
}

TEST(Cosine, AgreesWithOracleAndStaysInRange) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 200; ++k) {
        auto u = fixture::gaussian(rng, 8), v = fixture::gaussian(rng, 8);
        const double c = cosine_similarity(u, v);
        EXPECT_NEAR(c, oracle::cosine(u, v), 1e-12);
        EXPECT_LE(std::abs(c), 1.0);
    }
}

TEST(SemanticGraph, ThreeStocksTopOne) {
    VectorMap v{{"A", {1.0, 0.0}}, {"B", {0.9, 0.1}}, {"C", {0.0, 1.0}}};
    auto g = build_candidate_graph(v, keys(v), 1);
    EXPECT_EQ(id_edges(g), oracle::knn_edges(v, 1));
    EXPECT_GE(g.edges.size(), 2u);
    EXPECT_LE(g.edges.size(), 3u);
    EXPECT_EQ(g.kind, GraphKind::semantic);
}

TEST(SemanticGraph, IdenticalEmbeddingsGiveCompleteTriangle) {
    VectorMap v{{"A", {1, 1}}, {"B", {1, 1}}, {"C", {1, 1}}};
    auto g = build_candidate_graph(v, keys(v), 2);
    EXPECT_EQ(g.edges.size(), 3u);
}

TEST(SemanticGraph, SaturatedTopKIsComplete) {
    auto v = random_vectors(10, 4, 1);
    auto g = build_candidate_graph(v, keys(v), 9);
    EXPECT_EQ(g.edges.size(), 45u);
}

TEST(SemanticGraph, KTooLargeOrZero) {
    auto v = random_vectors(4, 3, 1);
    EXPECT_THROW(build_candidate_graph(v, keys(v), 4), Error);
    EXPECT_THROW(build_candidate_graph(v, keys(v), 0), Error);
}

TEST(SemanticGraph, MatchesBruteForceOnRandomFixtures) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto v = random_vectors(15 + seed % 10, 5, seed);
        const std::size_t k = 1 + seed % 6;
        auto g = build_candidate_graph(v, keys(v), k);
        EXPECT_EQ(id_edges(g), oracle::knn_edges(v, k)) << "seed " << seed;
        EXPECT_LE(g.edges.size(), g.nodes.size() * k);
        for (const auto& e : g.edges) {
            EXPECT_LT(e.a, e.b);
            EXPECT_NEAR(e.similarity, oracle::cosine(v.at(g.nodes[e.a]), v.at(g.nodes[e.b])), 1e-12);
        }
        for (auto d : g.degrees()) EXPECT_GE(d, k);
    }
}

TEST(SemanticGraph, TiesBrokenByAscendingId) {
    // B, C, D are equally similar to A; K=1 must pick B for A.
    VectorMap v{{"A", {1, 0, 0}}, {"B", {1, 1, 0}}, {"C", {1, 0, 1}}, {"D", {1, -1, 0}}};
    auto g = build_candidate_graph(v, keys(v), 1);
    EXPECT_TRUE(id_edges(g).contains({"A", "B"}));
    EXPECT_EQ(id_edges(g), oracle::knn_edges(v, 1));
}

TEST(SemanticGraph, InvariantToInputOrderAndRelabeling) {
    auto v = random_vectors(20, 6, 9);
    auto ids = keys(v);
    auto g = build_candidate_graph(v, ids, 3);
    std::mt19937_64 rng(1);
    std::shuffle(ids.begin(), ids.end(), rng);
    EXPECT_EQ(build_candidate_graph(v, ids, 3), g);

    // Relabel with an order-preserving map: structure must carry over exactly.
    VectorMap renamed;
    std::map<std::string, std::string> name;
    for (const auto& [id, vec] : v) {
        name[id] = "X" + id;
        renamed[name[id]] = vec;
    }
    auto h = build_candidate_graph(renamed, keys(renamed), 3);
    std::set<std::pair<std::string, std::string>> mapped;
    for (const auto& [a, b] : id_edges(g)) mapped.emplace(name[a], name[b]);
    EXPECT_EQ(id_edges(h), mapped);
}

TEST(RandomGraph, DeterministicPerSeed) {
    auto ids = fixture::ids(30);
    EXPECT_EQ(build_random_graph(ids, 5, 42), build_random_graph(ids, 5, 42));
    EXPECT_NE(build_random_graph(ids, 5, 42), build_random_graph(ids, 5, 43));
}

TEST(RandomGraph, TwoNodesForced) {
    std::vector<std::string> ids{"A", "B"};
    auto g = build_random_graph(ids, 1, 7);
    ASSERT_EQ(g.edges.size(), 1u);
    EXPECT_EQ(g.nodes[g.edges[0].a], "A");
    EXPECT_TRUE(std::isnan(g.edges[0].similarity));
}

TEST(RandomGraph, KTooLarge) {
    std::vector<std::string> ids{"A", "B"};
    EXPECT_THROW(build_random_graph(ids, 2, 7), Error);
}

TEST(RandomGraph, EdgeCountMatchesUnionOfDirectedDraws) {
    const std::size_t n = 30, k = 5;
    auto ids = fixture::ids(n);
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto g = build_random_graph(ids, k, seed);
        for (auto d : g.degrees()) EXPECT_GE(d, k);
        total += static_cast<double>(g.edges.size());
    }
    const double mean = total / 100.0;
    const double p = static_cast<double>(k) / (n - 1);
    const double expected = n * (n - 1) / 2.0 * (1.0 - (1.0 - p) * (1.0 - p));
    EXPECT_GE(mean, n * k / 2.0);
    EXPECT_LE(mean, static_cast<double>(n * k));
    EXPECT_NEAR(mean, expected, 0.02 * expected);
}

TEST(IndustryGraph, HandCases) {
    std::vector<std::string> abc{"A", "B", "C"};
    auto g = build_industry_graph(abc, {{"A", "10"}, {"B", "10"}, {"C", "20"}});
    EXPECT_EQ(id_edges(g), (std::set<std::pair<std::string, std::string>>{{"A", "B"}}));
    std::vector<std::string> four{"A", "B", "C", "D"};
    EXPECT_EQ(build_industry_graph(four, {{"A", "1"}, {"B", "1"}, {"C", "1"}, {"D", "1"}}).edges.size(), 6u);
    std::vector<std::string> six{"A", "B", "C", "D", "E", "F"};
    auto h = build_industry_graph(six, {{"A", "1"}, {"B", "1"}, {"C", "1"}, {"D", "2"}, {"E", "2"}, {"F", "3"}});
    EXPECT_EQ(h.edges.size(), 4u);
}

TEST(IndustryGraph, MissingCodeListsStock) {
    std::vector<std::string> ids{"A", "B", "Q"};
    try {
        build_industry_graph(ids, {{"A", "1"}, {"B", "1"}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("Q"), std::string::npos);
    }
}

TEST(IndustryGraph, EdgesAreExactlyEqualCodePairs) {
    std::mt19937_64 rng(2);
    auto ids = fixture::ids(25);
    std::map<std::string, std::string> codes;
    for (const auto& id : ids) codes[id] = std::to_string(rng() % 6);
    auto g = build_industry_graph(ids, codes);
    std::set<std::pair<std::string, std::string>> brute;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            if (codes[ids[i]] == codes[ids[j]]) brute.emplace(ids[i], ids[j]);
        }
    }
    EXPECT_EQ(id_edges(g), brute);
}

TEST(IndustryCodes, TwoDigitPrefix) {
    auto codes = parse_industry_codes("stock,sic\nA,3571\nB,357\nC,2834\n");
    EXPECT_EQ(codes.at("A"), "35");
    EXPECT_EQ(codes.at("B"), "03");
    EXPECT_EQ(codes.at("C"), "28");
}

TEST(EdgesCsv, RoundTrip) {
    // The file does not carry K; everything else must survive.
    auto v = random_vectors(12, 4, 3);
    auto g = build_candidate_graph(v, keys(v), 3);
    g.k = 0;
    EXPECT_EQ(parse_edges_csv(edges_to_csv(g)), g);
    auto r = build_random_graph(keys(v), 2, 1);
    r.k = 0;
    EXPECT_EQ(parse_edges_csv(edges_to_csv(r)), r);
}
