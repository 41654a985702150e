#pragma once

#include "relnet/classify.hpp"
#include "relnet/graph.hpp"
#include "relnet/panel.hpp"
#include "relnet/relation.hpp"
#include "relnet/signal.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace relnet::backtest {

/// Trading days per month used to translate holding periods.
inline constexpr std::size_t kDaysPerMonth = 21;

struct BacktestConfig {
    std::size_t k = 5;
    std::size_t train_len = 180;
    std::size_t test_len = 42;
    std::size_t groups = 5;
    std::size_t rebalance_every = 1;  // 1 = daily
    graph::GraphKind graph_mode = graph::GraphKind::semantic;
    signal::Weighting weighting = signal::Weighting::softmax;
    bool filtering = true;
    std::uint64_t seed = 0;
    relation::RelationWeights relation_weights;
    std::size_t window_workers = 1;

    void validate() const;
};

std::vector<WindowSpec> make_windows(std::span<const Date> calendar, std::size_t train_len, std::size_t test_len);

struct GroupAssignment {
    Date date{};
    std::size_t groups = 0;
    std::vector<std::string> stocks;
    std::vector<std::size_t> group;  // 1-based, parallel to stocks

    std::vector<std::size_t> sizes() const;
};

/// Ascending sort by signal with ties broken by id; rank k (0-based) of N goes
/// to group floor(k * G / N) + 1.
GroupAssignment sort_quintiles(std::span<const std::string> stocks, std::span<const double> signals,
                               std::size_t groups, Date date = {});

struct GroupReturns {
    std::vector<Date> dates;
    std::size_t groups = 0;
    std::vector<std::vector<double>> by_group;  // [group-1][day]
    std::vector<double> long_short;
};

/// For each panel date d in (first formation date, end], the latest assignment
/// formed strictly before d earns its equal-weighted member returns on d.
GroupReturns compute_group_returns(std::span<const GroupAssignment> assignments, const panel::ReturnPanel& panel,
                                   const Date& end);

using WeightBook = std::map<std::string, double>;

/// +1/|top| on group G members, -1/|bottom| on group 1 members.
WeightBook long_short_book(const GroupAssignment& assignment);

/// 1/2 sum |w_after - w_before| over the union of names.
double half_l1(const WeightBook& before, const WeightBook& after);

std::vector<double> turnover_series(std::span<const WeightBook> books);

/// mean(turnover_series) x 252, a multiple of gross book value.
double compute_turnover(std::span<const WeightBook> books);

struct BacktestData {
    const panel::ReturnPanel* returns = nullptr;
    const panel::MembershipTable* members = nullptr;
    const panel::EmbeddingSet* embeddings = nullptr;
    const relation::SnippetStore* snippets = nullptr;                 // filtering only
    const std::map<std::string, std::string>* industry_codes = nullptr;  // industry mode only
};

struct ClassifierSetup {
    relation::ClassifierClient* client = nullptr;
    relation::ClassificationCache* cache = nullptr;
    relation::ClassifyOptions options;
};

struct WindowGraph {
    panel::UniverseSlice slice;
    graph::CandidateGraph candidate;
};

/// Universe slice and candidate graph of one window under the configured graph mode.
WindowGraph build_window_graph(const BacktestConfig& config, const BacktestData& data, const WindowSpec& window);

struct WindowDiagnostics {
    WindowSpec window;
    int vintage = 0;
    std::size_t eligible = 0;
    std::size_t candidate_edges = 0;
    std::size_t refined_edges = 0;
    std::size_t degenerate_edges = 0;
    std::size_t scored_stocks = 0;
    std::size_t filled_cells = 0;

    bool operator==(const WindowDiagnostics&) const = default;
};

struct BacktestResult {
    std::size_t groups = 0;
    std::vector<Date> dates;                    // return dates
    std::vector<std::vector<double>> by_group;  // [group-1][day]
    std::vector<double> long_short;
    std::vector<WeightBook> books;  // weights held over each return date
    std::vector<double> turnover;   // one entry per consecutive pair of return dates
    double to_ann = 0.0;
    std::vector<WindowDiagnostics> windows;

    bool operator==(const BacktestResult&) const = default;
};

/// Per-window intermediate results, collected on request for inspection.
struct WindowArtifacts {
    graph::CandidateGraph candidate;
    relation::RefinedGraph refined;
    std::vector<signal::PairModel> models;  // parallel to refined.edges after degenerate drops
    signal::SignalMatrix signals;
};

class WindowError : public Error {
public:
    WindowError(std::size_t window, const std::string& what)
        : Error("window " + std::to_string(window) + ": " + what), window_(window) {}
    std::size_t window() const { return window_; }

private:
    std::size_t window_;
};

BacktestResult run_backtest(const BacktestConfig& config, const BacktestData& data,
                            const ClassifierSetup& classifier = {}, relation::ClassifyStats* classify_stats = nullptr,
                            std::vector<WindowArtifacts>* artifacts = nullptr);

/// Windows [first, last) only, for splicing checks.
BacktestResult run_backtest_windows(const BacktestConfig& config, const BacktestData& data,
                                    std::span<const WindowSpec> windows, const ClassifierSetup& classifier = {},
                                    relation::ClassifyStats* classify_stats = nullptr,
                                    std::vector<WindowArtifacts>* artifacts = nullptr);

/// `ls_returns.csv`: date,r_ls,g1..gG.
std::string ls_returns_csv(const BacktestResult& result);
/// `cumcurves.csv`: date,g1..gG,ls as compounded values starting from 1.
std::string cumcurves_csv(const BacktestResult& result);

}  // namespace relnet::backtest
