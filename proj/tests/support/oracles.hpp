#pragma once

// Straightforward reference implementations used to check the library. They
// favor obviousness over speed and share no code with src/.

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

double cosine(const std::vector<double>& u, const std::vector<double>& v);

/// Union of each node's K most similar peers (ties to the smaller id), as id pairs (a < b).
std::set<std::pair<std::string, std::string>> knn_edges(const std::map<std::string, std::vector<double>>& vectors,
                                                        std::size_t k);

std::vector<double> cumprod_gross(const std::vector<double>& returns);

struct Stats {
    double mean = 0.0;
    double sd = 0.0;  // n-1
    double sum_sq = 0.0;
};
Stats spread_stats(const std::vector<double>& a, const std::vector<double>& b);

double mean(const std::vector<double>& x);
double sample_sd(const std::vector<double>& x);

/// Signal of each node for one date given edges (i, j, z, dist, omega) in
/// canonical orientation, evaluated literally from the weighting formula.
struct SignalEdge {
    std::size_t i;
    std::size_t j;
    double z;
    double dist;
    double omega;
};
std::vector<double> signals(std::size_t n_nodes, const std::vector<SignalEdge>& edges, bool softmax);

/// Bartlett HAC t-statistic with explicit loops; autocovariances over T-1.
double nw_tstat(const std::vector<double>& x, std::size_t lag);
double classic_t(const std::vector<double>& x);

/// Least squares with intercept via normal equations in long double.
std::vector<double> ols(const std::vector<double>& y, const std::vector<std::vector<double>>& columns);

double max_drawdown(const std::vector<double>& returns);

/// Least-squares slope of x[t+1] on x[t] (no intercept).
double ar1_slope(const std::vector<double>& x);

}  // namespace oracle
