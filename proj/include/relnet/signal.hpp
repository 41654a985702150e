#pragma once

#include "relnet/common.hpp"
#include "relnet/relation.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relnet::signal {

/// Edges whose training spread volatility falls below this are skipped for the window.
inline constexpr double kSigmaFloor = 1e-8;

enum class Weighting { softmax, equal };

std::string_view to_string(Weighting mode);
Weighting parse_weighting(std::string_view text);

/// Training statistics of the spread P_a - P_b for one canonical edge (a < b).
struct PairModel {
    std::size_t a = 0;
    std::size_t b = 0;
    double mu = 0.0;
    double sigma = 0.0;
    double dist = 0.0;  // Gatev distance, sum of squared spreads

    bool operator==(const PairModel&) const = default;
};

/// Cumulative product of gross returns, starting at 1 + r[0].
std::vector<double> normalized_prices(std::span<const double> returns);

/// Spread statistics over equal-length training paths; edge indices left at 0.
PairModel pair_stats(std::span<const double> path_a, std::span<const double> path_b);

/// (spread - mu) / sigma, or nullopt when sigma is below the floor.
std::optional<double> zscore(const PairModel& model, double spread, double sigma_floor = kSigmaFloor);

struct IncidentEdge {
    double dist = 0.0;
    double omega = 1.0;
};

/// exp(-d_k) / sum exp(-d), evaluated with the minimum distance shifted to zero.
std::vector<double> softmax_terms(std::span<const double> dists);

/// Softmax mode: omega * n * softmax term (n = number of incident edges).
/// Equal mode: omega.
std::vector<double> edge_weights(std::span<const IncidentEdge> incident, Weighting mode);

/// Normalized price paths, rows = dates, columns = stocks (graph node order).
struct PathMatrix {
    std::vector<Date> dates;
    std::size_t n_stocks = 0;
    std::vector<double> values;

    double at(std::size_t t, std::size_t i) const { return values[t * n_stocks + i]; }
};

struct SignalMatrix {
    std::vector<Date> dates;
    std::vector<std::string> stocks;
    std::vector<double> values;       // dates x stocks
    std::vector<std::size_t> degree;  // edges used per stock
    std::vector<bool> isolated;       // no usable incident edge; value pinned to 0

    double at(std::size_t t, std::size_t i) const { return values[t * stocks.size() + i]; }
};

/// Requires models[k] to describe refined.edges[k] and every sigma to clear the floor.
SignalMatrix aggregate_signals(const relation::RefinedGraph& refined, std::span<const PairModel> models,
                               const PathMatrix& paths, Weighting mode);

/// `signals/<window>.csv`: date,stock,S,degree.
std::string signals_to_csv(const SignalMatrix& signals);

}  // namespace relnet::signal
