#include "relnet/signal.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace relnet;
using namespace relnet::signal;
using relation::RefinedEdge;
using relation::RefinedGraph;

namespace {

PathMatrix paths_of(std::size_t n_stocks, const std::vector<std::vector<double>>& rows) {
    PathMatrix p;
    p.n_stocks = n_stocks;
    p.dates = fixture::weekdays(fixture::ymd(2020, 1, 2), rows.size());
    for (const auto& r : rows) p.values.insert(p.values.end(), r.begin(), r.end());
    return p;
}

/// Random refined graph on n nodes with unit-scale models; spreads map to z exactly.
struct RandomCase {
    RefinedGraph graph;
    std::vector<PairModel> models;
    PathMatrix paths;
};

RandomCase random_case(std::uint64_t seed, std::size_t n, std::size_t n_edges, std::size_t days) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RandomCase c;
    c.graph.nodes = fixture::ids(n);
    std::set<std::pair<std::size_t, std::size_t>> used;
    while (c.graph.edges.size() < n_edges) {
        std::size_t a = rng() % n, b = rng() % n;
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (!used.insert({a, b}).second) continue;
        const double omega = u(rng) < 0.3 ? 0.5 : 1.0;
        c.graph.edges.push_back({a, b, 0.0, relation::RelationLabel::peer, omega});
    }
    std::sort(c.graph.edges.begin(), c.graph.edges.end(),
              [](const auto& x, const auto& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
    for (const auto& e : c.graph.edges) c.models.push_back({e.a, e.b, 0.1 * u(rng), 0.05 + u(rng), 5.0 * u(rng)});
    std::vector<std::vector<double>> rows;
    for (std::size_t t = 0; t < days; ++t) {
        std::vector<double> row(n);
        for (auto& x : row) x = 1.0 + 0.2 * (u(rng) - 0.5);
        rows.push_back(row);
    }
    c.paths = paths_of(n, rows);
    return c;
}

std::vector<double> oracle_row(const RandomCase& c, std::size_t t, bool softmax) {
    std::vector<oracle::SignalEdge> edges;
    for (std::size_t k = 0; k < c.graph.edges.size(); ++k) {
        const auto& e = c.graph.edges[k];
        const auto& m = c.models[k];
        const double z = (c.paths.at(t, e.a) - c.paths.at(t, e.b) - m.mu) / m.sigma;
        edges.push_back({e.a, e.b, z, m.dist, e.omega});
    }
    return oracle::signals(c.graph.nodes.size(), edges, softmax);
}

}  // namespace

TEST(NormalizedPrices, Examples) {
    EXPECT_EQ(normalized_prices(std::vector<double>{0, 0, 0}), (std::vector<double>{1, 1, 1}));
    auto p = normalized_prices(std::vector<double>{0.1, -0.1});
    EXPECT_DOUBLE_EQ(p[0], 1.1);
    EXPECT_NEAR(p[1], 0.99, 1e-15);
    EXPECT_EQ(normalized_prices(std::vector<double>{0.05}), std::vector<double>{1.05});
    EXPECT_THROW(normalized_prices(std::vector<double>{0.1, -1.0}), DataError);
}

TEST(NormalizedPrices, MatchesOracleProduct) {
    std::mt19937_64 rng(1);
    auto r = fixture::gaussian(rng, 300, 0.02);
    auto p = normalized_prices(r);
    auto o = oracle::cumprod_gross(r);
    for (std::size_t t = 0; t < r.size(); ++t) EXPECT_NEAR(p[t], o[t], 1e-13);
}

TEST(PairStats, Examples) {
    std::vector<double> x{1.0, 1.2, 0.9};
    auto same = pair_stats(x, x);
    EXPECT_EQ(same.mu, 0.0);
    EXPECT_EQ(same.sigma, 0.0);
    EXPECT_EQ(same.dist, 0.0);

    auto m = pair_stats(std::vector<double>{1, 1}, std::vector<double>{1.1, 0.9});
    EXPECT_NEAR(m.mu, 0.0, 1e-15);
    EXPECT_NEAR(m.sigma, 0.1414, 1e-4);
    EXPECT_NEAR(m.dist, 0.02, 1e-15);

    std::vector<double> a(5, 1.3), b(5, 1.0);
    auto c = pair_stats(a, b);
    EXPECT_NEAR(c.mu, 0.3, 1e-15);
    EXPECT_NEAR(c.sigma, 0.0, 1e-15);
    EXPECT_NEAR(c.dist, 5 * 0.09, 1e-14);
}

TEST(PairStats, Errors) {
    EXPECT_THROW(pair_stats(std::vector<double>{1.0}, std::vector<double>{1.0}), DataError);
    EXPECT_THROW(pair_stats(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0}), DataError);
}

TEST(PairStats, MatchesOracleAndZScoresAreStandardized) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        auto pa = normalized_prices(fixture::gaussian(rng, 180, 0.01));
        auto pb = normalized_prices(fixture::gaussian(rng, 180, 0.01));
        auto m = pair_stats(pa, pb);
        auto o = oracle::spread_stats(pa, pb);
        EXPECT_NEAR(m.mu, o.mean, 1e-13);
        EXPECT_NEAR(m.sigma, o.sd, 1e-13);
        EXPECT_NEAR(m.dist, o.sum_sq, 1e-12);
        EXPECT_GE(m.sigma, 0.0);
        std::vector<double> z;
        for (std::size_t t = 0; t < pa.size(); ++t) z.push_back(*zscore(m, pa[t] - pb[t]));
        EXPECT_NEAR(oracle::mean(z), 0.0, 1e-10);
        EXPECT_NEAR(oracle::sample_sd(z), 1.0, 1e-10);
    }
}

TEST(ZScore, Examples) {
    PairModel m{0, 1, 0.3, 0.2, 1.0};
    EXPECT_EQ(*zscore(m, 0.3), 0.0);
    EXPECT_EQ(*zscore({0, 1, 0.0, 1.0, 0.0}, 2.0), 2.0);
    EXPECT_EQ(*zscore({0, 1, 0.5, 0.25, 0.0}, 0.0), -2.0);
    EXPECT_FALSE(zscore({0, 1, 0.0, 1e-9, 0.0}, 1.0));
    EXPECT_FALSE(zscore({0, 1, 0.0, 0.0, 0.0}, 1.0));
}

TEST(EdgeWeights, Examples) {
    for (std::size_t n : {1u, 2u, 7u}) {
        std::vector<IncidentEdge> inc(n, {0.4, 1.0});
        for (double w : edge_weights(inc, Weighting::softmax)) EXPECT_NEAR(w, 1.0, 1e-12);
    }
    std::vector<IncidentEdge> two{{0.0, 1.0}, {std::log(3.0), 1.0}};
    auto w = edge_weights(two, Weighting::softmax);
    EXPECT_NEAR(w[0], 1.5, 1e-12);
    EXPECT_NEAR(w[1], 0.5, 1e-12);
    std::vector<IncidentEdge> sub{{1.0, 1.0}, {1.0, 0.5}, {1.0, 1.0}};
    EXPECT_NEAR(edge_weights(sub, Weighting::softmax)[1], 0.5, 1e-12);
    auto eq = edge_weights(two, Weighting::equal);
    EXPECT_EQ(eq, (std::vector<double>{1.0, 1.0}));
    EXPECT_THROW(edge_weights(std::vector<IncidentEdge>{}, Weighting::softmax), DataError);
}

TEST(EdgeWeights, SoftmaxSumsToOneAndIsShiftInvariant) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> d(1 + trial % 9);
        for (auto& x : d) x = u(rng);
        auto s = softmax_terms(d);
        EXPECT_NEAR(std::accumulate(s.begin(), s.end(), 0.0), 1.0, 1e-12);
        std::vector<double> shifted = d;
        for (auto& x : shifted) x += 1000.0;
        auto t = softmax_terms(shifted);
        for (std::size_t k = 0; k < d.size(); ++k) EXPECT_NEAR(s[k], t[k], 1e-12);
        std::vector<IncidentEdge> inc;
        for (double x : d) inc.push_back({x, 1.0});
        auto w = edge_weights(inc, Weighting::softmax);
        EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), static_cast<double>(d.size()), 1e-11);
    }
}

TEST(Aggregate, SingleEdgeUnitZ) {
    RefinedGraph g{{"A", "B"}, {RefinedEdge{0, 1, 0.9, std::nullopt, 1.0}}};
    std::vector<PairModel> models{{0, 1, 0.0, 1.0, 0.2}};
    auto s = aggregate_signals(g, models, paths_of(2, {{2.0, 1.0}}), Weighting::softmax);
    EXPECT_EQ(s.at(0, 0), -1.0);
    EXPECT_EQ(s.at(0, 1), 1.0);
}

TEST(Aggregate, TwoStocksAreExactlyOpposite) {
    std::mt19937_64 rng(4);
    RefinedGraph g{{"A", "B"}, {RefinedEdge{0, 1, 0.9, std::nullopt, 0.5}}};
    std::vector<PairModel> models{{0, 1, 0.01, 0.07, 3.0}};
    std::vector<std::vector<double>> rows;
    for (int t = 0; t < 60; ++t) rows.push_back({1.0 + 0.1 * fixture::gaussian(rng, 1)[0], 1.0});
    for (auto mode : {Weighting::softmax, Weighting::equal}) {
        auto s = aggregate_signals(g, models, paths_of(2, rows), mode);
        for (std::size_t t = 0; t < rows.size(); ++t) EXPECT_EQ(s.at(t, 0), -s.at(t, 1));
    }
}

TEST(Aggregate, CenteredSpreadsGiveZero) {
    auto c = random_case(5, 8, 12, 3);
    for (std::size_t k = 0; k < c.models.size(); ++k) c.models[k].mu = 0.0;
    for (auto& x : c.paths.values) x = 1.0;
    auto s = aggregate_signals(c.graph, c.models, c.paths, Weighting::softmax);
    for (double v : s.values) EXPECT_EQ(v, 0.0);
}

TEST(Aggregate, ThreeNodePathByHand) {
    // i=0 - j=1 (z=1, d=0), j=1 - k=2 (z=-2, d=ln 3). Node j's softmax: (3/4, 1/4) * 2.
    RefinedGraph g{{"I", "J", "K"},
                   {RefinedEdge{0, 1, 0.0, std::nullopt, 1.0}, RefinedEdge{1, 2, 0.0, std::nullopt, 1.0}}};
    std::vector<PairModel> models{{0, 1, 0.0, 1.0, 0.0}, {1, 2, 0.0, 1.0, std::log(3.0)}};
    // Spreads: P_I - P_J = 1, P_J - P_K = -2.
    auto s = aggregate_signals(g, models, paths_of(3, {{3.0, 2.0, 4.0}}), Weighting::softmax);
    EXPECT_NEAR(s.at(0, 0), -1.0, 1e-12);
    EXPECT_NEAR(s.at(0, 1), 1.0 * 1.5 + 2.0 * 0.5, 1e-12);
    EXPECT_NEAR(s.at(0, 2), -2.0, 1e-12);
}

TEST(Aggregate, MatchesLiteralFormulaOnRandomGraphs) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        auto c = random_case(seed, 15, 30, 10);
        for (auto mode : {Weighting::softmax, Weighting::equal}) {
            auto s = aggregate_signals(c.graph, c.models, c.paths, mode);
            for (std::size_t t = 0; t < 10; ++t) {
                auto o = oracle_row(c, t, mode == Weighting::softmax);
                for (std::size_t i = 0; i < 15; ++i) EXPECT_NEAR(s.at(t, i), o[i], 1e-10);
            }
        }
    }
}

TEST(Aggregate, IsolatedStocksFlaggedAtZero) {
    RefinedGraph g{{"A", "B", "C"}, {RefinedEdge{0, 1, 0.0, std::nullopt, 1.0}}};
    std::vector<PairModel> models{{0, 1, 0.0, 1.0, 0.0}};
    auto s = aggregate_signals(g, models, paths_of(3, {{1.5, 1.0, 9.0}}), Weighting::softmax);
    EXPECT_TRUE(s.isolated[2]);
    EXPECT_FALSE(s.isolated[0]);
    EXPECT_EQ(s.at(0, 2), 0.0);
    EXPECT_EQ(s.degree, (std::vector<std::size_t>{1, 1, 0}));
}

TEST(Aggregate, RemovingAnEdgeOnlyAffectsItsEndpoints) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto c = random_case(100 + seed, 12, 18, 4);
        auto full = aggregate_signals(c.graph, c.models, c.paths, Weighting::softmax);
        const std::size_t drop = seed % c.graph.edges.size();
        auto reduced = c;
        const auto removed = reduced.graph.edges[drop];
        reduced.graph.edges.erase(reduced.graph.edges.begin() + static_cast<std::ptrdiff_t>(drop));
        reduced.models.erase(reduced.models.begin() + static_cast<std::ptrdiff_t>(drop));
        auto s = aggregate_signals(reduced.graph, reduced.models, reduced.paths, Weighting::softmax);
        for (std::size_t i = 0; i < 12; ++i) {
            if (i == removed.a || i == removed.b) continue;
            for (std::size_t t = 0; t < 4; ++t) EXPECT_EQ(s.at(t, i), full.at(t, i));
        }
    }
}

TEST(Aggregate, RejectsModelBelowFloor) {
    RefinedGraph g{{"A", "B"}, {RefinedEdge{0, 1, 0.0, std::nullopt, 1.0}}};
    std::vector<PairModel> models{{0, 1, 0.0, 0.0, 0.0}};
    EXPECT_THROW(aggregate_signals(g, models, paths_of(2, {{1.0, 1.0}}), Weighting::softmax), DataError);
}

TEST(SignalsCsv, Layout) {
    RefinedGraph g{{"A", "B"}, {RefinedEdge{0, 1, 0.0, std::nullopt, 1.0}}};
    std::vector<PairModel> models{{0, 1, 0.0, 1.0, 0.0}};
    auto s = aggregate_signals(g, models, paths_of(2, {{2.0, 1.0}}), Weighting::softmax);
    EXPECT_EQ(signals_to_csv(s), "date,stock,S,degree\n2020-01-02,A,-1,1\n2020-01-02,B,1,1\n");
}
