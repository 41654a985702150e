#include "relnet/cli.hpp"

#include "relnet/backtest.hpp"
#include "relnet/cache.hpp"
#include "relnet/classifier.hpp"
#include "relnet/classify.hpp"
#include "relnet/config.hpp"
#include "relnet/graph.hpp"
#include "relnet/metrics.hpp"
#include "relnet/panel.hpp"
#include "relnet/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>
#include <memory>
#include <unistd.h>

namespace relnet::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Output location cannot be created or written.
class OutputError : public Error {
public:
    using Error::Error;
};

constexpr std::string_view kTurnoverConvention =
    "one-sided: 0.5 * sum_i |w_i,t - w_i,t-1| per day on the long-short book (each leg sums to 1 in absolute "
    "weight), annualized as mean x 252 and reported as a multiple of book value; the first formation is excluded";

/// Collects files in a temporary sibling directory and swaps it into place.
class StagedDir {
public:
    explicit StagedDir(fs::path target) : target_(fs::absolute(std::move(target)).lexically_normal()) {
        const auto parent = target_.parent_path();
        std::error_code ec;
        fs::create_directories(parent, ec);
        if (ec) throw OutputError("cannot create " + parent.string() + ": " + ec.message());
        staging_ = parent / ("." + target_.filename().string() + ".tmp-" + std::to_string(::getpid()));
        fs::remove_all(staging_, ec);
        fs::create_directories(staging_, ec);
        if (ec) throw OutputError("cannot create " + staging_.string() + ": " + ec.message());
    }
    StagedDir(const StagedDir&) = delete;
    StagedDir& operator=(const StagedDir&) = delete;
    ~StagedDir() {
        if (!committed_) {
            std::error_code ec;
            fs::remove_all(staging_, ec);
        }
    }

    const fs::path& path() const { return staging_; }

    void write(const fs::path& relative, std::string_view contents) const {
        const auto file = staging_ / relative;
        std::error_code ec;
        fs::create_directories(file.parent_path(), ec);
        if (ec) throw OutputError("cannot create " + file.parent_path().string() + ": " + ec.message());
        try {
            write_file(file, contents);
        } catch (const Error& e) {
            throw OutputError(e.what());
        }
    }

    void commit() {
        std::error_code ec;
        fs::path old;
        if (fs::exists(target_)) {
            old = target_.parent_path() / ("." + target_.filename().string() + ".old-" + std::to_string(::getpid()));
            fs::remove_all(old, ec);
            fs::rename(target_, old, ec);
            if (ec) throw OutputError("cannot replace " + target_.string() + ": " + ec.message());
        }
        fs::rename(staging_, target_, ec);
        if (ec) throw OutputError("cannot move results into " + target_.string() + ": " + ec.message());
        committed_ = true;
        if (!old.empty()) fs::remove_all(old, ec);
    }

private:
    fs::path target_;
    fs::path staging_;
    bool committed_ = false;
};

struct LoadedData {
    panel::ReturnPanel returns;
    panel::MembershipTable members;
    panel::EmbeddingSet embeddings;
    std::optional<relation::SnippetStore> snippets;
    std::optional<std::map<std::string, std::string>> industry_codes;

    backtest::BacktestData view() const {
        return {&returns, &members, &embeddings, snippets ? &*snippets : nullptr,
                industry_codes ? &*industry_codes : nullptr};
    }
};

LoadedData load_data(const config::RunConfig& cfg) {
    if (cfg.data.returns.empty() || cfg.data.membership.empty() || cfg.data.embeddings.empty()) {
        throw ConfigError("data.returns, data.membership and data.embeddings are required");
    }
    LoadedData d;
    d.returns = panel::load_returns(cfg.data.returns);
    d.members = panel::load_membership(cfg.data.membership);
    d.embeddings = panel::load_embeddings(cfg.data.embeddings);
    if (!cfg.data.filings.empty()) d.snippets.emplace(cfg.data.filings, cfg.budgets);
    if (!cfg.data.industry_codes.empty()) d.industry_codes = graph::load_industry_codes(cfg.data.industry_codes);
    return d;
}

std::unique_ptr<relation::ClassifierClient> make_client(const config::RunConfig& cfg) {
    const auto& c = cfg.classifier;
    switch (c.kind) {
        case config::ClassifierKind::http: {
            relation::HttpClientOptions options;
            options.url = c.url;
            options.model = c.model;
            if (const char* key = std::getenv(c.api_key_env.c_str())) options.api_key = key;
            options.timeout_seconds = c.timeout_seconds;
            return std::make_unique<relation::HttpClassifier>(options);
        }
        case config::ClassifierKind::mock:
            return std::make_unique<relation::FixtureClassifier>(relation::load_label_fixture(c.fixture),
                                                                 relation::LabelSource::live);
        case config::ClassifierKind::oracle:
            return std::make_unique<relation::FixtureClassifier>(relation::load_label_fixture(c.fixture),
                                                                 relation::LabelSource::oracle);
    }
    throw ConfigError("unsupported classifier kind");
}

std::unique_ptr<relation::ClassificationCache> make_cache(const config::RunConfig& cfg) {
    if (cfg.cache.empty()) return std::make_unique<relation::ClassificationCache>();
    std::error_code ec;
    fs::create_directories(cfg.cache.parent_path(), ec);
    if (ec) throw OutputError("cannot create " + cfg.cache.parent_path().string() + ": " + ec.message());
    return std::make_unique<relation::ClassificationCache>(cfg.cache);
}

relation::ClassifyOptions classify_options(const config::RunConfig& cfg) {
    relation::ClassifyOptions o;
    o.max_retries = cfg.classifier.max_retries;
    o.backoff = std::chrono::milliseconds(cfg.classifier.backoff_ms);
    o.parallelism = cfg.classifier.parallelism;
    if (cfg.classifier.call_budget) o.call_budget = *cfg.classifier.call_budget;
    return o;
}

json stats_json(const relation::ClassifyStats& s) {
    json hist = json::object();
    for (auto label : relation::kAllLabels) {
        auto it = s.histogram.find(label);
        hist[std::string(relation::to_string(label))] = it == s.histogram.end() ? 0 : it->second;
    }
    return {{"edges", s.edges},           {"cache_hits", s.cache_hits}, {"live_calls", s.live_calls},
            {"attempts", s.attempts},     {"fallbacks", s.fallbacks},   {"missing_snippets", s.missing_snippets},
            {"warnings", s.warnings.size()}, {"histogram", hist}};
}

void print_stats(std::ostream& out, const relation::ClassifyStats& s) {
    out << "edges: " << s.edges << "\n"
        << "cache hits: " << s.cache_hits << "\n"
        << "live calls: " << s.live_calls << "\n"
        << "attempts: " << s.attempts << "\n"
        << "fallbacks: " << s.fallbacks << "\n"
        << "warnings: " << s.warnings.size() << "\n"
        << "labels:";
    for (auto label : relation::kAllLabels) {
        auto it = s.histogram.find(label);
        out << " " << relation::to_string(label) << "=" << (it == s.histogram.end() ? 0 : it->second);
    }
    out << "\n";
}

json perf_json(const metrics::PerfReport& p) {
    return {{"r_ann", p.r_ann},   {"sigma_ann", p.sigma_ann}, {"sharpe", p.sharpe}, {"mdd", p.mdd},
            {"to_ann", p.to_ann}, {"t_nw", p.t_nw},           {"nw_lag", p.nw_lag}, {"n_days", p.n_days}};
}

json regression_json(const metrics::FactorRegressionResult& r) {
    json betas = json::object();
    json tstats = json::object();
    for (std::size_t k = 0; k < r.factors.size(); ++k) {
        betas[r.factors[k]] = r.betas[k];
        tstats[r.factors[k]] = r.t_betas[k];
    }
    return {{"alpha", r.alpha},         {"alpha_ann", r.alpha * metrics::kTradingDaysPerYear},
            {"t_alpha", r.t_alpha},     {"betas", betas},
            {"t_betas", tstats},        {"r_squared", r.r_squared},
            {"n_obs", r.n_obs},         {"nw_lag", r.nw_lag}};
}

/// Regresses `series` on the factor table over the dates both cover.
metrics::FactorRegressionResult regress_on_factors(std::span<const Date> dates, std::span<const double> series,
                                                   const metrics::FactorTable& factors,
                                                   std::optional<std::size_t> lag) {
    std::map<Date, std::size_t> row_of;
    for (std::size_t r = 0; r < factors.dates.size(); ++r) row_of[factors.dates[r]] = r;
    std::vector<double> y;
    std::vector<std::vector<double>> x(factors.columns.size());
    for (std::size_t t = 0; t < dates.size(); ++t) {
        auto it = row_of.find(dates[t]);
        if (it == row_of.end()) continue;
        y.push_back(series[t]);
        for (std::size_t k = 0; k < x.size(); ++k) x[k].push_back(factors.columns[k][it->second]);
    }
    if (y.size() < dates.size()) {
        std::cerr << "warning: factor file covers " << y.size() << " of " << dates.size() << " return dates\n";
    }
    return metrics::factor_regression(y, x, factors.names, lag);
}

json windows_json(const backtest::BacktestResult& r) {
    json out = json::array();
    for (const auto& w : r.windows) {
        out.push_back({{"index", w.window.index},
                       {"t0", format_date(w.window.t0)},
                       {"t1", format_date(w.window.t1)},
                       {"t2", format_date(w.window.t2)},
                       {"vintage", w.vintage},
                       {"eligible", w.eligible},
                       {"candidate_edges", w.candidate_edges},
                       {"refined_edges", w.refined_edges},
                       {"degenerate_edges", w.degenerate_edges},
                       {"scored_stocks", w.scored_stocks},
                       {"filled_cells", w.filled_cells}});
    }
    return out;
}

struct Variant {
    std::string name;
    backtest::BacktestConfig config;
};

/// Ablation rows: baseline, + filtering, no distance weighting, random network, industry network.
std::vector<Variant> ablation_variants(const backtest::BacktestConfig& base) {
    std::vector<Variant> out;
    auto v = base;
    v.graph_mode = graph::GraphKind::semantic;
    v.weighting = signal::Weighting::softmax;
    v.filtering = false;
    out.push_back({"baseline", v});
    v.filtering = true;
    out.push_back({"filtering", v});
    v.weighting = signal::Weighting::equal;
    out.push_back({"no_distance_weighting", v});
    v.weighting = signal::Weighting::softmax;
    v.filtering = false;
    v.graph_mode = graph::GraphKind::random;
    out.push_back({"random_network", v});
    v.graph_mode = graph::GraphKind::industry;
    out.push_back({"industry_network", v});
    return out;
}

/// Runs one backtest configuration and stages its outputs under `subdir`.
json run_variant(const config::RunConfig& cfg, const backtest::BacktestConfig& bt, const LoadedData& data,
                 relation::ClassifierClient* client, relation::ClassificationCache* cache,
                 const std::optional<metrics::FactorTable>& factors, const StagedDir& out, const fs::path& subdir,
                 relation::ClassifyStats& stats) {
    backtest::ClassifierSetup setup{client, cache, classify_options(cfg)};
    const auto result = backtest::run_backtest(bt, data.view(), setup, &stats);
    const auto perf = metrics::performance_report(result.long_short, result.to_ann, cfg.nw_lag);

    auto effective = cfg;
    effective.backtest = bt;
    json summary = {
        {"config", effective.to_json()},
        {"performance", perf_json(perf)},
        {"conventions",
         {{"turnover", kTurnoverConvention},
          {"annualization", "arithmetic, 252 trading days per year"},
          {"risk_free_rate", 0.0},
          {"max_drawdown", "peak-to-trough of the compounded long-short curve, as a negative fraction"}}},
        {"windows", windows_json(result)},
    };
    if (factors) summary["factor_regression"] = regression_json(regress_on_factors(result.dates, result.long_short, *factors, cfg.nw_lag));
    out.write(subdir / "summary.json", summary.dump(2) + "\n");
    out.write(subdir / "ls_returns.csv", backtest::ls_returns_csv(result));
    out.write(subdir / "cumcurves.csv", backtest::cumcurves_csv(result));
    return summary;
}

config::RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides,
                                  const std::string& output) {
    auto all = overrides;
    auto cfg = config::load_config(path, all);
    if (!output.empty()) cfg.output = fs::absolute(output).lexically_normal();
    return cfg;
}

// ---- subcommands ----

int cmd_synth(const std::string& spec_path, const std::string& out_dir, std::optional<std::uint64_t> seed) {
    synth::SynthSpec spec;
    if (!spec_path.empty()) {
        json doc;
        try {
            doc = json::parse(read_file(spec_path));
        } catch (const json::exception& e) {
            throw ConfigError(spec_path + ": " + e.what());
        }
        spec = synth::spec_from_json(doc);
    }
    if (seed) spec.seed = *seed;
    const auto dataset = synth::generate_universe(spec);
    StagedDir out(out_dir);
    synth::write_dataset(dataset, spec, out.path());
    out.commit();
    std::cout << "wrote synthetic dataset: " << dataset.returns.n_stocks() << " stocks x "
              << dataset.returns.n_dates() << " days, " << dataset.truth.size() << " intra-cluster pairs -> "
              << out_dir << "\n";
    return kExitOk;
}

int cmd_ingest_check(const config::RunConfig& cfg) {
    const auto data = load_data(cfg);
    std::cout << "returns: " << data.returns.n_dates() << " dates x " << data.returns.n_stocks() << " stocks, "
              << data.returns.missing_count() << " missing cells\n";
    std::cout << "membership: " << data.members.entries().size() << " intervals\n";
    std::cout << "embeddings: " << data.embeddings.vintages.size() << " vintages";
    if (!data.embeddings.vintages.empty()) {
        std::cout << " (" << data.embeddings.vintages.begin()->first << ".."
                  << data.embeddings.vintages.rbegin()->first << ")";
    }
    std::cout << ", " << data.embeddings.zero_norm_dropped << " zero-norm rows dropped\n";
    if (data.snippets) std::cout << "filings: " << data.snippets->names().size() << " ids and names\n";
    if (data.industry_codes) std::cout << "industry codes: " << data.industry_codes->size() << " stocks\n";

    const auto windows =
        backtest::make_windows(data.returns.dates(), cfg.backtest.train_len, cfg.backtest.test_len);
    std::size_t failures = 0;
    std::size_t filled = 0;
    for (const auto& w : windows) {
        try {
            const auto slice = panel::slice_universe(data.returns, data.members, data.embeddings, w,
                                                     cfg.backtest.groups);
            filled += slice.filled_cells;
            std::cout << "window " << w.index << " " << format_date(w.t0) << ".." << format_date(w.t2)
                      << " vintage " << slice.vintage << ": " << slice.eligible.size() << " eligible, "
                      << slice.filled_cells << " filled test cells\n";
        } catch (const Error& e) {
            ++failures;
            std::cout << "window " << w.index << ": ERROR " << e.what() << "\n";
        }
    }
    std::cout << windows.size() << " windows, " << failures << " failing, " << filled << " filled test cells\n";
    return failures == 0 ? kExitOk : kExitError;
}

int cmd_build_graph(const config::RunConfig& cfg, const std::string& out_dir, std::optional<std::size_t> only) {
    const auto data = load_data(cfg);
    const auto windows =
        backtest::make_windows(data.returns.dates(), cfg.backtest.train_len, cfg.backtest.test_len);
    if (only && *only >= windows.size()) {
        throw ConfigError("window " + std::to_string(*only) + " out of range (" + std::to_string(windows.size()) +
                          " windows)");
    }
    StagedDir out(out_dir.empty() ? cfg.output.parent_path() / "graphs" : fs::path(out_dir));
    for (const auto& w : windows) {
        if (only && w.index != *only) continue;
        try {
            const auto wg = backtest::build_window_graph(cfg.backtest, data.view(), w);
            char name[32];
            std::snprintf(name, sizeof name, "window_%03zu.csv", w.index);
            out.write(name, graph::edges_to_csv(wg.candidate));
            std::cout << "window " << w.index << ": " << wg.candidate.nodes.size() << " nodes, "
                      << wg.candidate.edges.size() << " edges\n";
        } catch (const ConfigError&) {
            throw;
        } catch (const OutputError&) {
            throw;
        } catch (const Error& e) {
            throw backtest::WindowError(w.index, e.what());
        }
    }
    out.commit();
    return kExitOk;
}

int cmd_classify(const config::RunConfig& cfg, const std::string& out_dir) {
    const auto data = load_data(cfg);
    if (!data.snippets) throw ConfigError("classify requires data.filings");
    auto client = make_client(cfg);
    auto cache = make_cache(cfg);
    const auto options = classify_options(cfg);
    const auto windows =
        backtest::make_windows(data.returns.dates(), cfg.backtest.train_len, cfg.backtest.test_len);

    StagedDir out(out_dir.empty() ? cfg.output.parent_path() / "classify" : fs::path(out_dir));
    relation::ClassifyStats stats;
    std::string jsonl;
    try {
        for (const auto& w : windows) {
            try {
                const auto wg = backtest::build_window_graph(cfg.backtest, data.view(), w);
                const auto snippets = data.snippets->for_vintage(wg.slice.vintage, wg.slice.eligible);
                const auto labeled = relation::classify_edges(wg.candidate, snippets, *client, *cache,
                                                              wg.slice.vintage, options, &stats);
                jsonl += relation::labeled_to_jsonl(labeled);
            } catch (const relation::BudgetExceeded&) {
                throw;
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                throw backtest::WindowError(w.index, e.what());
            }
        }
    } catch (const relation::BudgetExceeded& e) {
        std::cout << "windows: " << windows.size() << "\n";
        print_stats(std::cout, stats);
        std::cerr << "error: " << e.what() << "; answers received so far are cached\n";
        return kExitBudget;
    }
    out.write("labeled_edges.jsonl", jsonl);
    out.write("classify_stats.json", stats_json(stats).dump(2) + "\n");
    out.commit();
    std::cout << "windows: " << windows.size() << "\n";
    print_stats(std::cout, stats);
    for (const auto& w : stats.warnings) std::cerr << "warning: " << w << "\n";
    return kExitOk;
}

int cmd_backtest(const config::RunConfig& cfg, bool ablations) {
    const auto data = load_data(cfg);
    std::optional<metrics::FactorTable> factors;
    if (!cfg.data.factors.empty()) factors = metrics::load_factors(cfg.data.factors);

    std::vector<Variant> variants;
    if (ablations) {
        variants = ablation_variants(cfg.backtest);
    } else {
        variants.push_back({"", cfg.backtest});
    }
    bool needs_classifier = false;
    for (const auto& v : variants) needs_classifier |= v.config.filtering;
    std::unique_ptr<relation::ClassifierClient> client;
    std::unique_ptr<relation::ClassificationCache> cache;
    if (needs_classifier) {
        client = make_client(cfg);
        cache = make_cache(cfg);
    }

    StagedDir out(cfg.output);
    relation::ClassifyStats stats;
    json rows = json::array();
    try {
        for (std::size_t k = 0; k < variants.size(); ++k) {
            const auto& v = variants[k];
            fs::path subdir;
            if (ablations) {
                char prefix[24];
                std::snprintf(prefix, sizeof prefix, "%02zu_", k + 1);
                subdir = std::string(prefix) + v.name;
            }
            auto summary = run_variant(cfg, v.config, data, client.get(), cache.get(), factors, out, subdir, stats);
            const auto& p = summary["performance"];
            if (ablations) {
                rows.push_back({{"variant", v.name}, {"directory", subdir.string()}, {"performance", p}});
                std::cout << v.name << ": ";
            }
            std::cout << "sharpe " << p["sharpe"].get<double>() << ", r_ann " << p["r_ann"].get<double>()
                      << ", mdd " << p["mdd"].get<double>() << ", to_ann " << p["to_ann"].get<double>() << ", t_nw "
                      << p["t_nw"].get<double>() << "\n";
        }
    } catch (const relation::BudgetExceeded& e) {
        print_stats(std::cerr, stats);
        std::cerr << "error: " << e.what() << "; answers received so far are cached\n";
        return kExitBudget;
    }
    if (ablations) out.write("ablations.json", rows.dump(2) + "\n");
    if (needs_classifier) {
        std::cerr << "classification: " << stats.edges << " edges, " << stats.cache_hits << " cache hits, "
                  << stats.live_calls << " live calls, " << stats.fallbacks << " fallbacks\n";
        for (const auto& w : stats.warnings) std::cerr << "warning: " << w << "\n";
    }
    out.commit();
    return kExitOk;
}

int cmd_report(const std::string& results_dir, const std::string& factors_path, std::optional<std::size_t> lag) {
    const fs::path dir(results_dir);
    const auto csv = read_file(dir / "ls_returns.csv");
    std::vector<Date> dates;
    std::vector<double> ls;
    std::size_t row = 0;
    for (auto line : split(csv, '\n')) {
        ++row;
        line = trim(line);
        if (line.empty() || row == 1) continue;
        auto cells = split(line, ',');
        double v = 0.0;
        if (cells.size() < 2 || !parse_double(cells[1], v)) {
            throw LoadError("ls_returns.csv row " + std::to_string(row) + ": expected date,r_ls,...");
        }
        dates.push_back(parse_date(cells[0]));
        ls.push_back(v);
    }
    double to_ann = 0.0;
    if (fs::exists(dir / "summary.json")) {
        const auto summary = json::parse(read_file(dir / "summary.json"), nullptr, false);
        if (!summary.is_discarded() && summary.contains("performance")) {
            to_ann = summary["performance"].value("to_ann", 0.0);
        }
    }
    const auto perf = metrics::performance_report(ls, to_ann, lag);
    json report = {{"performance", perf_json(perf)}};
    std::cout << "days      " << perf.n_days << "\n"
              << "r_ann     " << perf.r_ann << "\n"
              << "sigma_ann " << perf.sigma_ann << "\n"
              << "sharpe    " << perf.sharpe << "\n"
              << "mdd       " << perf.mdd << "\n"
              << "to_ann    " << perf.to_ann << "\n"
              << "t_nw      " << perf.t_nw << " (lag " << perf.nw_lag << ")\n";
    if (!factors_path.empty()) {
        const auto reg = regress_on_factors(dates, ls, metrics::load_factors(factors_path), lag);
        report["factor_regression"] = regression_json(reg);
        std::cout << "alpha     " << reg.alpha << " (t " << reg.t_alpha << ")\n";
        for (std::size_t k = 0; k < reg.factors.size(); ++k) {
            std::cout << "beta " << reg.factors[k] << " " << reg.betas[k] << " (t " << reg.t_betas[k] << ")\n";
        }
        std::cout << "r_squared " << reg.r_squared << "\n";
    }
    try {
        write_file(dir / "report.json", report.dump(2) + "\n");
    } catch (const Error& e) {
        throw OutputError(e.what());
    }
    return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Relation-filtered semantic-network pairs trading backtester"};
    app.require_subcommand(1);

    std::string spec_path, out_dir;
    std::optional<std::uint64_t> synth_seed;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic market");
    synth_cmd->add_option("--spec", spec_path, "JSON synth spec (defaults when omitted)")->check(CLI::ExistingFile);
    synth_cmd->add_option("--out", out_dir, "Output directory")->required();
    synth_cmd->add_option("--seed", synth_seed, "Override the spec seed");

    std::string config_path;
    std::vector<std::string> overrides;
    std::string output;
    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
        cmd->add_option("--set", overrides, "Override a config key, e.g. --set backtest.k=10 (repeatable)");
        cmd->add_option("-o,--output", output, "Override the output directory");
    };

    auto* ingest_cmd = app.add_subcommand("ingest-check", "Validate inputs and report per-window universes");
    add_config(ingest_cmd);

    std::optional<std::size_t> window;
    std::string graph_out;
    auto* graph_cmd = app.add_subcommand("build-graph", "Write candidate graph edges per window");
    add_config(graph_cmd);
    graph_cmd->add_option("--window", window, "Only this window index");
    graph_cmd->add_option("--out", graph_out, "Directory for window_NNN.csv (default: graphs/ next to output)");

    std::string classify_out;
    auto* classify_cmd = app.add_subcommand("classify", "Label candidate edges through the cache and classifier");
    add_config(classify_cmd);
    classify_cmd->add_option("--out", classify_out,
                             "Directory for labeled_edges.jsonl (default: classify/ next to output)");

    bool ablations = false;
    auto* backtest_cmd = app.add_subcommand("backtest", "Run the rolling-window backtest");
    add_config(backtest_cmd);
    backtest_cmd->add_flag("--ablations", ablations, "Run the ablation sweep, one summary per variant");

    std::string results_dir, factors_path;
    std::optional<std::size_t> report_lag;
    auto* report_cmd = app.add_subcommand("report", "Recompute metrics and factor regressions for a results dir");
    report_cmd->add_option("--results", results_dir, "Results directory with ls_returns.csv")
        ->required()
        ->check(CLI::ExistingDirectory);
    report_cmd->add_option("--factors", factors_path, "factors.csv (date, one column per factor)")
        ->check(CLI::ExistingFile);
    report_cmd->add_option("--nw-lag", report_lag, "Newey-West lag (automatic when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (synth_cmd->parsed()) return cmd_synth(spec_path, out_dir, synth_seed);
        if (report_cmd->parsed()) return cmd_report(results_dir, factors_path, report_lag);
        const auto cfg = load_run_config(config_path, overrides, output);
        if (ingest_cmd->parsed()) return cmd_ingest_check(cfg);
        if (graph_cmd->parsed()) return cmd_build_graph(cfg, graph_out, window);
        if (classify_cmd->parsed()) return cmd_classify(cfg, classify_out);
        if (backtest_cmd->parsed()) return cmd_backtest(cfg, ablations);
    } catch (const OutputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const relation::BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitUsage;
}

}  // namespace relnet::cli
