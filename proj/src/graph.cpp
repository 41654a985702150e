#include "relnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>

namespace relnet::graph {
namespace {

std::vector<std::string> sorted_unique(std::span<const std::string> ids) {
    std::vector<std::string> nodes(ids.begin(), ids.end());
    std::sort(nodes.begin(), nodes.end());
    if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) {
        throw DataError("duplicate stock id in graph node list");
    }
    return nodes;
}

std::vector<Edge> edges_from(const std::set<std::pair<std::size_t, std::size_t>>& pairs) {
    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (auto [a, b] : pairs) edges.push_back({a, b, std::numeric_limits<double>::quiet_NaN()});
    return edges;
}

std::pair<std::size_t, std::size_t> ordered(std::size_t a, std::size_t b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
}

}  // namespace

std::string_view to_string(GraphKind kind) {
    switch (kind) {
        case GraphKind::semantic: return "semantic";
        case GraphKind::random: return "random";
        case GraphKind::industry: return "industry";
    }
    return "semantic";
}

GraphKind parse_graph_kind(std::string_view text) {
    if (text == "semantic") return GraphKind::semantic;
    if (text == "random") return GraphKind::random;
    if (text == "industry") return GraphKind::industry;
    throw ConfigError("unknown graph mode '" + std::string(text) + "'");
}

bool Edge::operator==(const Edge& other) const {
    const bool sim_equal = (std::isnan(similarity) && std::isnan(other.similarity)) || similarity == other.similarity;
    return a == other.a && b == other.b && sim_equal;
}

std::vector<std::size_t> CandidateGraph::degrees() const {
    std::vector<std::size_t> deg(nodes.size(), 0);
    for (const auto& e : edges) {
        ++deg[e.a];
        ++deg[e.b];
    }
    return deg;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw DataError("cosine_similarity: dimension mismatch");
    double dot = 0.0;
    double nu = 0.0;
    double nv = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        dot += u[k] * v[k];
        nu += u[k] * u[k];
        nv += v[k] * v[k];
    }
    if (nu == 0.0 || nv == 0.0) throw DataError("cosine_similarity: zero-norm vector");
    const double sim = dot / (std::sqrt(nu) * std::sqrt(nv));
    return std::clamp(sim, -1.0, 1.0);
}

CandidateGraph build_candidate_graph(const VectorMap& vectors, std::span<const std::string> eligible,
                                     std::size_t k) {
    CandidateGraph g;
    g.nodes = sorted_unique(eligible);
    g.kind = GraphKind::semantic;
    g.k = k;
    const std::size_t n = g.nodes.size();
    if (k == 0) throw ConfigError("K must be positive");
    if (k >= n) throw DataError("K must be smaller than the number of stocks (K=" + std::to_string(k) +
                                ", N=" + std::to_string(n) + ")");

    std::vector<const std::vector<double>*> vecs(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = vectors.find(g.nodes[i]);
        if (it == vectors.end()) throw DataError("no embedding for stock '" + g.nodes[i] + "'");
        vecs[i] = &it->second;
    }
    std::vector<double> sim(n * n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = cosine_similarity(*vecs[i], *vecs[j]);
            sim[i * n + j] = s;
            sim[j * n + i] = s;
        }
    }

    std::set<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < n; ++i) {
        order.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) order.push_back(j);
        }
        // Nodes are id-sorted, so ascending index breaks similarity ties by id.
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                          [&](std::size_t x, std::size_t y) {
                              const double sx = sim[i * n + x];
                              const double sy = sim[i * n + y];
                              if (sx != sy) return sx > sy;
                              return x < y;
                          });
        for (std::size_t r = 0; r < k; ++r) pairs.insert(ordered(i, order[r]));
    }
    g.edges = edges_from(pairs);
    for (auto& e : g.edges) e.similarity = sim[e.a * n + e.b];
    return g;
}

CandidateGraph build_random_graph(std::span<const std::string> eligible, std::size_t k, std::uint64_t seed) {
    CandidateGraph g;
    g.nodes = sorted_unique(eligible);
    g.kind = GraphKind::random;
    g.k = k;
    const std::size_t n = g.nodes.size();
    if (k == 0) throw ConfigError("K must be positive");
    if (k >= n) throw DataError("K must be smaller than the number of stocks (K=" + std::to_string(k) +
                                ", N=" + std::to_string(n) + ")");
    std::mt19937_64 rng(seed);
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < n; ++i) {
        pool.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) pool.push_back(j);
        }
        // Partial Fisher-Yates: the first k slots become a uniform draw without replacement.
        for (std::size_t r = 0; r < k; ++r) {
            std::uniform_int_distribution<std::size_t> pick(r, pool.size() - 1);
            std::swap(pool[r], pool[pick(rng)]);
            pairs.insert(ordered(i, pool[r]));
        }
    }
    g.edges = edges_from(pairs);
    return g;
}

CandidateGraph build_industry_graph(std::span<const std::string> eligible,
                                    const std::map<std::string, std::string>& codes) {
    CandidateGraph g;
    g.nodes = sorted_unique(eligible);
    g.kind = GraphKind::industry;
    std::vector<std::string> missing;
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        auto it = codes.find(g.nodes[i]);
        if (it == codes.end()) {
            missing.push_back(g.nodes[i]);
        } else {
            groups[it->second].push_back(i);
        }
    }
    if (!missing.empty()) {
        std::string msg = "missing industry code for:";
        for (const auto& m : missing) msg += " " + m;
        throw DataError(msg);
    }
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& [code, members] : groups) {
        for (std::size_t x = 0; x < members.size(); ++x) {
            for (std::size_t y = x + 1; y < members.size(); ++y) pairs.insert(ordered(members[x], members[y]));
        }
    }
    g.edges = edges_from(pairs);
    return g;
}

void annotate_similarity(CandidateGraph& graph, const VectorMap& vectors) {
    for (auto& e : graph.edges) {
        auto a = vectors.find(graph.nodes[e.a]);
        auto b = vectors.find(graph.nodes[e.b]);
        if (a != vectors.end() && b != vectors.end()) e.similarity = cosine_similarity(a->second, b->second);
    }
}

std::string edges_to_csv(const CandidateGraph& graph) {
    std::string out = "stock_i,stock_j,similarity,tag\n";
    for (const auto& e : graph.edges) {
        out += graph.nodes[e.a] + "," + graph.nodes[e.b] + ",";
        if (!std::isnan(e.similarity)) out += format_double(e.similarity);
        out += ",";
        out += to_string(graph.kind);
        out += "\n";
    }
    return out;
}

CandidateGraph parse_edges_csv(std::string_view csv) {
    struct Raw {
        std::string a, b;
        double sim;
    };
    std::vector<Raw> raw;
    std::set<std::string> ids;
    std::optional<GraphKind> kind;
    std::size_t row = 0;
    for (auto line : split(csv, '\n')) {
        ++row;
        line = trim(line);
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != 4) throw LoadError("edges row " + std::to_string(row) + ": expected 4 fields");
        if (row == 1 && trim(cells[0]) == "stock_i") continue;
        Raw r{std::string(trim(cells[0])), std::string(trim(cells[1])), std::numeric_limits<double>::quiet_NaN()};
        if (!trim(cells[2]).empty() && !parse_double(cells[2], r.sim)) {
            throw LoadError("edges row " + std::to_string(row) + ": non-numeric similarity");
        }
        if (r.a == r.b) throw LoadError("edges row " + std::to_string(row) + ": self-loop");
        const auto k = parse_graph_kind(trim(cells[3]));
        if (kind && *kind != k) throw LoadError("edges file mixes construction tags");
        kind = k;
        ids.insert(r.a);
        ids.insert(r.b);
        raw.push_back(std::move(r));
    }
    CandidateGraph g;
    g.nodes.assign(ids.begin(), ids.end());
    g.kind = kind.value_or(GraphKind::semantic);
    auto index = [&](const std::string& id) {
        return static_cast<std::size_t>(std::lower_bound(g.nodes.begin(), g.nodes.end(), id) - g.nodes.begin());
    };
    std::map<std::pair<std::size_t, std::size_t>, double> pairs;
    for (const auto& r : raw) {
        auto key = ordered(index(r.a), index(r.b));
        if (!pairs.emplace(key, r.sim).second) throw LoadError("duplicate edge " + r.a + "-" + r.b);
    }
    for (const auto& [key, sim] : pairs) g.edges.push_back({key.first, key.second, sim});
    return g;
}

std::map<std::string, std::string> parse_industry_codes(std::string_view csv, std::size_t prefix_digits) {
    std::map<std::string, std::string> codes;
    std::size_t row = 0;
    for (auto line : split(csv, '\n')) {
        ++row;
        line = trim(line);
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != 2) throw LoadError("sic row " + std::to_string(row) + ": expected 2 fields");
        if (row == 1 && trim(cells[0]) == "stock") continue;
        std::string code(trim(cells[1]));
        if (code.empty()) throw LoadError("sic row " + std::to_string(row) + ": empty code");
        const bool numeric = std::all_of(code.begin(), code.end(), [](char c) { return c >= '0' && c <= '9'; });
        if (numeric && code.size() < 4) code.insert(0, 4 - code.size(), '0');
        if (prefix_digits > 0 && code.size() > prefix_digits) code.resize(prefix_digits);
        codes[std::string(trim(cells[0]))] = code;
    }
    return codes;
}

std::map<std::string, std::string> load_industry_codes(const std::filesystem::path& path,
                                                       std::size_t prefix_digits) {
    return parse_industry_codes(read_file(path), prefix_digits);
}

}  // namespace relnet::graph
