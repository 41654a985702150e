#include "relnet/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <numeric>
#include <thread>

namespace relnet::backtest {
namespace {

struct PreparedWindow {
    panel::UniverseSlice slice;
    graph::CandidateGraph candidate;
    relation::RefinedGraph refined;
};

struct WindowOutcome {
    std::vector<Date> dates;
    std::vector<std::vector<double>> by_group;
    std::vector<double> long_short;
    std::vector<WeightBook> books;
    std::vector<double> turnover;  // entry 0 is filled in when windows are spliced
    WeightBook closing_book;  // last held book drifted through its return day
    WindowDiagnostics diagnostics;
    WindowArtifacts artifacts;
};

WeightBook drift(const WeightBook& book, const panel::ReturnPanel& returns, std::size_t row) {
    WeightBook out;
    for (const auto& [id, w] : book) {
        const auto i = returns.stock_index(id);
        out[id] = w * (1.0 + (i ? returns.at(row, *i) : 0.0));
    }
    return out;
}

PreparedWindow prepare_window(const BacktestConfig& config, const BacktestData& data, const WindowSpec& window,
                              const ClassifierSetup& classifier, relation::ClassifyStats* stats) {
    PreparedWindow p;
    auto wg = build_window_graph(config, data, window);
    p.slice = std::move(wg.slice);
    p.candidate = std::move(wg.candidate);
    if (!config.filtering) {
        p.refined = relation::unfiltered(p.candidate);
        return p;
    }
    if (classifier.client == nullptr || classifier.cache == nullptr) {
        throw ConfigError("relation filtering requires a classifier client and cache");
    }
    std::map<std::string, relation::FirmSnippets> snippets;
    if (data.snippets != nullptr) snippets = data.snippets->for_vintage(p.slice.vintage, p.slice.eligible);
    const auto labeled = relation::classify_edges(p.candidate, snippets, *classifier.client, *classifier.cache,
                                                  p.slice.vintage, classifier.options, stats);
    p.refined = relation::apply_relation_filter(labeled, config.relation_weights);
    return p;
}

WindowOutcome evaluate_window(const BacktestConfig& config, PreparedWindow prepared) {
    const auto& slice = prepared.slice;
    const auto& window = slice.window;
    const auto& R = slice.returns;
    const std::size_t n = R.n_stocks();
    const std::size_t rows = R.n_dates();

    // Normalized price paths rebased at the window's training start.
    std::vector<std::vector<double>> paths(n);
    std::vector<double> column(rows);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < rows; ++t) column[t] = R.at(t, i);
        paths[i] = signal::normalized_prices(column);
    }

    relation::RefinedGraph usable;
    usable.nodes = prepared.refined.nodes;
    std::vector<signal::PairModel> models;
    std::size_t degenerate = 0;
    for (const auto& e : prepared.refined.edges) {
        auto m = signal::pair_stats(std::span(paths[e.a]).first(window.train_len),
                                    std::span(paths[e.b]).first(window.train_len));
        if (!(m.sigma >= signal::kSigmaFloor)) {
            ++degenerate;
            continue;
        }
        m.a = e.a;
        m.b = e.b;
        models.push_back(m);
        usable.edges.push_back(e);
    }

    // Signals on t1 .. t2-1; each one earns the following day's return.
    signal::PathMatrix pm;
    pm.n_stocks = n;
    const std::size_t first = window.train_len - 1;
    for (std::size_t r = first; r < first + window.test_len; ++r) {
        pm.dates.push_back(R.dates()[r]);
        for (std::size_t i = 0; i < n; ++i) pm.values.push_back(paths[i][r]);
    }
    auto signals = signal::aggregate_signals(usable, models, pm, config.weighting);

    std::vector<std::string> scored;
    std::vector<std::size_t> scored_idx;
    for (std::size_t i = 0; i < n; ++i) {
        if (!signals.isolated[i]) {
            scored.push_back(signals.stocks[i]);
            scored_idx.push_back(i);
        }
    }
    if (scored.size() < config.groups) {
        throw DataError("fewer scored stocks (" + std::to_string(scored.size()) + ") than groups (" +
                        std::to_string(config.groups) + ")");
    }

    std::vector<GroupAssignment> assignments;
    std::vector<double> s(scored.size());
    for (std::size_t j = 0; j < window.test_len; j += config.rebalance_every) {
        for (std::size_t q = 0; q < scored.size(); ++q) s[q] = signals.at(j, scored_idx[q]);
        assignments.push_back(sort_quintiles(scored, s, config.groups, pm.dates[j]));
    }
    auto gr = compute_group_returns(assignments, R, window.t2);

    WindowOutcome out;
    out.dates = gr.dates;
    out.by_group = std::move(gr.by_group);
    out.long_short = std::move(gr.long_short);
    std::size_t active = 0;
    for (std::size_t j = 0; j < out.dates.size(); ++j) {
        const std::size_t row = first + 1 + j;
        const bool rebalance = j % config.rebalance_every == 0;
        if (rebalance) {
            active = j / config.rebalance_every;
            out.books.push_back(long_short_book(assignments[active]));
        } else {
            out.books.push_back(drift(out.books.back(), R, row - 1));
        }
        double to = 0.0;
        if (j > 0 && rebalance) {
            const auto& held = out.books[j - 1];
            to = config.rebalance_every == 1 ? half_l1(held, out.books[j])
                                             : half_l1(drift(held, R, row - 1), out.books[j]);
        }
        out.turnover.push_back(to);
    }
    out.closing_book = drift(out.books.back(), R, rows - 1);

    auto& d = out.diagnostics;
    d.window = window;
    d.vintage = slice.vintage;
    d.eligible = n;
    d.candidate_edges = prepared.candidate.edges.size();
    d.refined_edges = prepared.refined.edges.size();
    d.degenerate_edges = degenerate;
    d.scored_stocks = scored.size();
    d.filled_cells = slice.filled_cells;

    out.artifacts.candidate = std::move(prepared.candidate);
    out.artifacts.refined = std::move(usable);
    out.artifacts.models = std::move(models);
    out.artifacts.signals = std::move(signals);
    return out;
}

}  // namespace

WindowGraph build_window_graph(const BacktestConfig& config, const BacktestData& data, const WindowSpec& window) {
    if (data.returns == nullptr || data.members == nullptr || data.embeddings == nullptr) {
        throw ConfigError("returns, membership and embeddings are required");
    }
    WindowGraph out;
    out.slice = panel::slice_universe(*data.returns, *data.members, *data.embeddings, window, config.groups);
    const auto* vintage = data.embeddings->find(out.slice.vintage);
    switch (config.graph_mode) {
        case graph::GraphKind::semantic:
            out.candidate = graph::build_candidate_graph(vintage->vectors, out.slice.eligible, config.k);
            break;
        case graph::GraphKind::random:
            out.candidate =
                graph::build_random_graph(out.slice.eligible, config.k, derive_seed(config.seed, window.index));
            graph::annotate_similarity(out.candidate, vintage->vectors);
            break;
        case graph::GraphKind::industry:
            if (data.industry_codes == nullptr) throw ConfigError("industry graph mode requires industry codes");
            out.candidate = graph::build_industry_graph(out.slice.eligible, *data.industry_codes);
            graph::annotate_similarity(out.candidate, vintage->vectors);
            break;
    }
    return out;
}

void BacktestConfig::validate() const {
    if (groups < 2) throw ConfigError("G must be at least 2");
    if (train_len < 2) throw ConfigError("train_len must be at least 2");
    if (test_len < 1) throw ConfigError("test_len must be at least 1");
    if (rebalance_every < 1) throw ConfigError("rebalance interval must be at least 1 day");
    if (graph_mode != graph::GraphKind::industry && k < 1) throw ConfigError("K must be positive");
    if (window_workers < 1) throw ConfigError("window_workers must be at least 1");
}

std::vector<WindowSpec> make_windows(std::span<const Date> calendar, std::size_t train_len, std::size_t test_len) {
    if (train_len < 2 || test_len < 1) throw ConfigError("make_windows: invalid window lengths");
    std::vector<WindowSpec> out;
    for (std::size_t start = 0; start + train_len + test_len <= calendar.size(); start += test_len) {
        WindowSpec w;
        w.index = out.size();
        w.t0 = calendar[start];
        w.t1 = calendar[start + train_len - 1];
        w.t2 = calendar[start + train_len + test_len - 1];
        w.train_len = train_len;
        w.test_len = test_len;
        out.push_back(w);
    }
    if (out.empty()) throw DataError("calendar too short: " + std::to_string(calendar.size()) + " dates for " +
                                     std::to_string(train_len) + "+" + std::to_string(test_len));
    return out;
}

std::vector<std::size_t> GroupAssignment::sizes() const {
    std::vector<std::size_t> out(groups, 0);
    for (auto g : group) ++out[g - 1];
    return out;
}

GroupAssignment sort_quintiles(std::span<const std::string> stocks, std::span<const double> signals,
                               std::size_t groups, Date date) {
    if (stocks.size() != signals.size()) throw DataError("sort_quintiles: one signal per stock required");
    if (groups < 1 || stocks.size() < groups) {
        throw DataError("sort_quintiles: fewer stocks (" + std::to_string(stocks.size()) + ") than groups (" +
                        std::to_string(groups) + ")");
    }
    std::vector<std::size_t> order(stocks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (signals[x] != signals[y]) return signals[x] < signals[y];
        return stocks[x] < stocks[y];
    });
    GroupAssignment out;
    out.date = date;
    out.groups = groups;
    const std::size_t n = stocks.size();
    for (std::size_t rank = 0; rank < n; ++rank) {
        out.stocks.push_back(stocks[order[rank]]);
        out.group.push_back(rank * groups / n + 1);
    }
    return out;
}

GroupReturns compute_group_returns(std::span<const GroupAssignment> assignments, const panel::ReturnPanel& panel,
                                   const Date& end) {
    GroupReturns out;
    if (assignments.empty()) return out;
    const std::size_t G = assignments.front().groups;
    out.groups = G;
    out.by_group.assign(G, {});

    // Resolve members to panel columns once per assignment.
    std::vector<std::vector<std::vector<std::size_t>>> members(assignments.size());
    for (std::size_t a = 0; a < assignments.size(); ++a) {
        const auto& asg = assignments[a];
        if (asg.groups != G) throw DataError("compute_group_returns: inconsistent group counts");
        if (a > 0 && !(assignments[a - 1].date < asg.date)) {
            throw DataError("compute_group_returns: assignments must be in increasing date order");
        }
        members[a].assign(G, {});
        for (std::size_t q = 0; q < asg.stocks.size(); ++q) {
            auto col = panel.stock_index(asg.stocks[q]);
            if (!col) throw DataError("compute_group_returns: unknown stock '" + asg.stocks[q] + "'");
            members[a][asg.group[q] - 1].push_back(*col);
        }
        for (std::size_t g = 0; g < G; ++g) {
            if (members[a][g].empty()) throw DataError("compute_group_returns: empty group " + std::to_string(g + 1));
        }
    }

    std::size_t active = 0;
    for (std::size_t t = 0; t < panel.n_dates(); ++t) {
        const Date& d = panel.dates()[t];
        if (!(assignments.front().date < d)) continue;
        if (end < d) break;
        while (active + 1 < assignments.size() && assignments[active + 1].date < d) ++active;
        out.dates.push_back(d);
        for (std::size_t g = 0; g < G; ++g) {
            double sum = 0.0;
            for (auto col : members[active][g]) sum += panel.at(t, col);
            out.by_group[g].push_back(sum / static_cast<double>(members[active][g].size()));
        }
        out.long_short.push_back(out.by_group[G - 1].back() - out.by_group[0].back());
    }
    return out;
}

WeightBook long_short_book(const GroupAssignment& assignment) {
    const auto sizes = assignment.sizes();
    WeightBook book;
    for (std::size_t q = 0; q < assignment.stocks.size(); ++q) {
        const auto g = assignment.group[q];
        if (g == assignment.groups) {
            book[assignment.stocks[q]] += 1.0 / static_cast<double>(sizes[g - 1]);
        } else if (g == 1) {
            book[assignment.stocks[q]] -= 1.0 / static_cast<double>(sizes[0]);
        }
    }
    return book;
}

double half_l1(const WeightBook& before, const WeightBook& after) {
    double total = 0.0;
    auto b = before.begin();
    auto a = after.begin();
    while (b != before.end() || a != after.end()) {
        if (a == after.end() || (b != before.end() && b->first < a->first)) {
            total += std::abs(b->second);
            ++b;
        } else if (b == before.end() || a->first < b->first) {
            total += std::abs(a->second);
            ++a;
        } else {
            total += std::abs(a->second - b->second);
            ++a;
            ++b;
        }
    }
    return 0.5 * total;
}

std::vector<double> turnover_series(std::span<const WeightBook> books) {
    std::vector<double> out;
    for (std::size_t t = 1; t < books.size(); ++t) out.push_back(half_l1(books[t - 1], books[t]));
    return out;
}

double compute_turnover(std::span<const WeightBook> books) {
    if (books.size() < 2) throw DataError("compute_turnover: need at least two weight vectors");
    const auto series = turnover_series(books);
    return std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size()) * 252.0;
}

BacktestResult run_backtest_windows(const BacktestConfig& config, const BacktestData& data,
                                    std::span<const WindowSpec> windows, const ClassifierSetup& classifier,
                                    relation::ClassifyStats* classify_stats, std::vector<WindowArtifacts>* artifacts) {
    config.validate();
    if (data.returns == nullptr || data.members == nullptr || data.embeddings == nullptr) {
        throw ConfigError("run_backtest: returns, membership and embeddings are required");
    }

    // Classification shares the client and cache, so preparation runs in window order.
    std::vector<PreparedWindow> prepared;
    prepared.reserve(windows.size());
    for (const auto& w : windows) {
        try {
            prepared.push_back(prepare_window(config, data, w, classifier, classify_stats));
        } catch (const relation::BudgetExceeded&) {
            throw;
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw WindowError(w.index, e.what());
        }
    }

    std::vector<WindowOutcome> outcomes(windows.size());
    auto evaluate = [&](std::size_t k) {
        try {
            outcomes[k] = evaluate_window(config, std::move(prepared[k]));
        } catch (const Error& e) {
            throw WindowError(windows[k].index, e.what());
        }
    };
    const std::size_t workers = std::min(config.window_workers, windows.size());
    if (workers <= 1) {
        for (std::size_t k = 0; k < windows.size(); ++k) evaluate(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::future<void>> futures;
        for (std::size_t w = 0; w < workers; ++w) {
            futures.push_back(std::async(std::launch::async, [&]() {
                for (std::size_t k = next.fetch_add(1); k < windows.size(); k = next.fetch_add(1)) evaluate(k);
            }));
        }
        for (auto& f : futures) f.get();
    }

    BacktestResult result;
    result.groups = config.groups;
    result.by_group.assign(config.groups, {});
    const WeightBook* previous_close = nullptr;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        auto& o = outcomes[k];
        for (std::size_t j = 0; j < o.dates.size(); ++j) {
            if (j > 0) {
                result.turnover.push_back(o.turnover[j]);
            } else if (!result.books.empty()) {
                const WeightBook& pre = config.rebalance_every == 1 ? result.books.back() : *previous_close;
                result.turnover.push_back(half_l1(pre, o.books[0]));
            }
            result.dates.push_back(o.dates[j]);
            for (std::size_t g = 0; g < config.groups; ++g) result.by_group[g].push_back(o.by_group[g][j]);
            result.long_short.push_back(o.long_short[j]);
            result.books.push_back(o.books[j]);
        }
        previous_close = &o.closing_book;
        result.windows.push_back(o.diagnostics);
        if (artifacts) artifacts->push_back(std::move(o.artifacts));
    }
    if (!result.turnover.empty()) {
        result.to_ann = std::accumulate(result.turnover.begin(), result.turnover.end(), 0.0) /
                        static_cast<double>(result.turnover.size()) * 252.0;
    }
    return result;
}

BacktestResult run_backtest(const BacktestConfig& config, const BacktestData& data, const ClassifierSetup& classifier,
                            relation::ClassifyStats* classify_stats, std::vector<WindowArtifacts>* artifacts) {
    if (data.returns == nullptr) throw ConfigError("run_backtest: returns are required");
    const auto windows = make_windows(data.returns->dates(), config.train_len, config.test_len);
    return run_backtest_windows(config, data, windows, classifier, classify_stats, artifacts);
}

std::string ls_returns_csv(const BacktestResult& result) {
    std::string out = "date,r_ls";
    for (std::size_t g = 1; g <= result.groups; ++g) out += ",g" + std::to_string(g);
    out += '\n';
    for (std::size_t t = 0; t < result.dates.size(); ++t) {
        out += format_date(result.dates[t]) + "," + format_double(result.long_short[t]);
        for (std::size_t g = 0; g < result.groups; ++g) out += "," + format_double(result.by_group[g][t]);
        out += '\n';
    }
    return out;
}

std::string cumcurves_csv(const BacktestResult& result) {
    std::string out = "date";
    for (std::size_t g = 1; g <= result.groups; ++g) out += ",g" + std::to_string(g);
    out += ",ls\n";
    std::vector<double> level(result.groups + 1, 1.0);
    for (std::size_t t = 0; t < result.dates.size(); ++t) {
        out += format_date(result.dates[t]);
        for (std::size_t g = 0; g < result.groups; ++g) {
            level[g] *= 1.0 + result.by_group[g][t];
            out += "," + format_double(level[g]);
        }
        level[result.groups] *= 1.0 + result.long_short[t];
        out += "," + format_double(level[result.groups]) + "\n";
    }
    return out;
}

}  // namespace relnet::backtest
