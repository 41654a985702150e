#include "relnet/signal.hpp"

#include <algorithm>
#include <cmath>

namespace relnet::signal {

std::string_view to_string(Weighting mode) { return mode == Weighting::softmax ? "softmax" : "equal"; }

Weighting parse_weighting(std::string_view text) {
    if (text == "softmax") return Weighting::softmax;
    if (text == "equal") return Weighting::equal;
    throw ConfigError("unknown weighting mode '" + std::string(text) + "'");
}

std::vector<double> normalized_prices(std::span<const double> returns) {
    std::vector<double> path;
    path.reserve(returns.size());
    double level = 1.0;
    for (std::size_t t = 0; t < returns.size(); ++t) {
        if (!(returns[t] > -1.0)) throw DataError("normalized_prices: return <= -1 at offset " + std::to_string(t));
        level *= 1.0 + returns[t];
        path.push_back(level);
    }
    return path;
}

PairModel pair_stats(std::span<const double> path_a, std::span<const double> path_b) {
    if (path_a.size() != path_b.size()) throw DataError("pair_stats: path lengths differ");
    const std::size_t n = path_a.size();
    if (n < 2) throw DataError("pair_stats: need at least two training observations");
    PairModel m;
    double sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double s = path_a[t] - path_b[t];
        sum += s;
        m.dist += s * s;
    }
    m.mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double dev = path_a[t] - path_b[t] - m.mu;
        ss += dev * dev;
    }
    m.sigma = std::sqrt(ss / static_cast<double>(n - 1));
    return m;
}

std::optional<double> zscore(const PairModel& model, double spread, double sigma_floor) {
    if (!(model.sigma >= sigma_floor)) return std::nullopt;
    return (spread - model.mu) / model.sigma;
}

std::vector<double> softmax_terms(std::span<const double> dists) {
    if (dists.empty()) throw DataError("softmax over an empty edge list");
    const double dmin = *std::min_element(dists.begin(), dists.end());
    std::vector<double> out(dists.size());
    double total = 0.0;
    for (std::size_t k = 0; k < dists.size(); ++k) {
        out[k] = std::exp(-(dists[k] - dmin));
        total += out[k];
    }
    for (auto& x : out) x /= total;
    return out;
}

std::vector<double> edge_weights(std::span<const IncidentEdge> incident, Weighting mode) {
    if (incident.empty()) throw DataError("edge_weights: stock has no incident edges");
    std::vector<double> w(incident.size());
    if (mode == Weighting::equal) {
        for (std::size_t k = 0; k < incident.size(); ++k) w[k] = incident[k].omega;
        return w;
    }
    std::vector<double> dists(incident.size());
    for (std::size_t k = 0; k < incident.size(); ++k) dists[k] = incident[k].dist;
    const auto terms = softmax_terms(dists);
    const double n = static_cast<double>(incident.size());
    for (std::size_t k = 0; k < incident.size(); ++k) w[k] = incident[k].omega * n * terms[k];
    return w;
}

SignalMatrix aggregate_signals(const relation::RefinedGraph& refined, std::span<const PairModel> models,
                               const PathMatrix& paths, Weighting mode) {
    if (models.size() != refined.edges.size()) throw DataError("aggregate_signals: one model per edge required");
    const std::size_t n = refined.nodes.size();
    if (paths.n_stocks != n) throw DataError("aggregate_signals: path matrix does not match graph nodes");

    // Per-stock incident edge lists; w_side[k] = {weight at a, weight at b}.
    std::vector<std::vector<std::size_t>> incident(n);
    for (std::size_t k = 0; k < refined.edges.size(); ++k) {
        const auto& e = refined.edges[k];
        if (e.a >= n || e.b >= n || e.a == e.b) throw DataError("aggregate_signals: bad edge endpoints");
        if (!(models[k].sigma >= kSigmaFloor)) throw DataError("aggregate_signals: edge below the sigma floor");
        incident[e.a].push_back(k);
        incident[e.b].push_back(k);
    }
    std::vector<double> weight_at_a(refined.edges.size(), 0.0);
    std::vector<double> weight_at_b(refined.edges.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (incident[i].empty()) continue;
        std::vector<IncidentEdge> list;
        list.reserve(incident[i].size());
        for (auto k : incident[i]) list.push_back({models[k].dist, refined.edges[k].omega});
        const auto w = edge_weights(list, mode);
        for (std::size_t r = 0; r < incident[i].size(); ++r) {
            const auto k = incident[i][r];
            (refined.edges[k].a == i ? weight_at_a : weight_at_b)[k] = w[r];
        }
    }

    SignalMatrix out;
    out.dates = paths.dates;
    out.stocks = refined.nodes;
    out.values.assign(paths.dates.size() * n, 0.0);
    out.degree.resize(n);
    out.isolated.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.degree[i] = incident[i].size();
        out.isolated[i] = incident[i].empty();
    }
    for (std::size_t t = 0; t < paths.dates.size(); ++t) {
        double* row = out.values.data() + t * n;
        for (std::size_t k = 0; k < refined.edges.size(); ++k) {
            const auto& e = refined.edges[k];
            const double z = *zscore(models[k], paths.at(t, e.a) - paths.at(t, e.b));
            row[e.a] += -z * weight_at_a[k];
            row[e.b] += z * weight_at_b[k];
        }
    }
    return out;
}

std::string signals_to_csv(const SignalMatrix& signals) {
    std::string out = "date,stock,S,degree\n";
    for (std::size_t t = 0; t < signals.dates.size(); ++t) {
        const std::string d = format_date(signals.dates[t]);
        for (std::size_t i = 0; i < signals.stocks.size(); ++i) {
            out += d + "," + signals.stocks[i] + "," + format_double(signals.at(t, i)) + "," +
                   std::to_string(signals.degree[i]) + "\n";
        }
    }
    return out;
}

}  // namespace relnet::signal
