#pragma once

#include "relnet/common.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relnet::graph {

enum class GraphKind { semantic, random, industry };

std::string_view to_string(GraphKind kind);
GraphKind parse_graph_kind(std::string_view text);

/// Undirected edge between nodes[a] and nodes[b] with a < b. Nodes are kept in
/// ascending id order, so index order is the canonical orientation.
struct Edge {
    std::size_t a = 0;
    std::size_t b = 0;
    double similarity = 0.0;  // NaN when not computed (random / industry graphs)

    bool operator==(const Edge& other) const;
};

struct CandidateGraph {
    std::vector<std::string> nodes;
    std::vector<Edge> edges;  // sorted by (a, b)
    GraphKind kind = GraphKind::semantic;
    std::size_t k = 0;

    std::vector<std::size_t> degrees() const;
    bool operator==(const CandidateGraph&) const = default;
};

using VectorMap = std::map<std::string, std::vector<double>>;

double cosine_similarity(std::span<const double> u, std::span<const double> v);

CandidateGraph build_candidate_graph(const VectorMap& vectors, std::span<const std::string> eligible,
                                     std::size_t k);

CandidateGraph build_random_graph(std::span<const std::string> eligible, std::size_t k, std::uint64_t seed);

CandidateGraph build_industry_graph(std::span<const std::string> eligible,
                                    const std::map<std::string, std::string>& codes);

/// Fills edge similarities from embeddings where both endpoints have vectors.
void annotate_similarity(CandidateGraph& graph, const VectorMap& vectors);

/// `edges.csv`: stock_i,stock_j,similarity,tag.
std::string edges_to_csv(const CandidateGraph& graph);
CandidateGraph parse_edges_csv(std::string_view csv);

/// `sic.csv`: stock,code. Codes are truncated to their first `prefix_digits`
/// characters after left-padding numeric codes to four digits.
std::map<std::string, std::string> load_industry_codes(const std::filesystem::path& path,
                                                       std::size_t prefix_digits = 2);
std::map<std::string, std::string> parse_industry_codes(std::string_view csv, std::size_t prefix_digits = 2);

}  // namespace relnet::graph
