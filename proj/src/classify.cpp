#include "relnet/classify.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

namespace relnet::relation {

void ClassifyStats::merge(const ClassifyStats& other) {
    edges += other.edges;
    cache_hits += other.cache_hits;
    live_calls += other.live_calls;
    attempts += other.attempts;
    fallbacks += other.fallbacks;
    missing_snippets += other.missing_snippets;
    for (const auto& [label, n] : other.histogram) histogram[label] += n;
    warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
}

LabeledGraph classify_edges(const graph::CandidateGraph& graph,
                            const std::map<std::string, FirmSnippets>& snippets, ClassifierClient& client,
                            ClassificationCache& cache, int vintage, const ClassifyOptions& options,
                            ClassifyStats* stats_out) {
    LabeledGraph out;
    out.graph = graph;
    out.vintage = vintage;
    out.labels.resize(graph.edges.size());

    ClassifyStats stats;
    stats.edges = graph.edges.size();
    std::vector<std::optional<std::string>> warning_slots(graph.edges.size());

    struct Pending {
        std::size_t edge;
        std::string key;
        const FirmSnippets* a;
        const FirmSnippets* b;
    };
    std::vector<Pending> pending;
    for (std::size_t k = 0; k < graph.edges.size(); ++k) {
        const auto& id_a = graph.nodes[graph.edges[k].a];
        const auto& id_b = graph.nodes[graph.edges[k].b];
        std::string key = cache_key(id_a, id_b, vintage, kPromptTemplateVersion);
        if (auto hit = cache.find(key)) {
            out.labels[k] = {hit->label, hit->evidence_a, hit->evidence_b, LabelSource::cache};
            ++stats.cache_hits;
            continue;
        }
        auto sa = snippets.find(id_a);
        auto sb = snippets.find(id_b);
        if (sa == snippets.end() || sb == snippets.end()) {
            out.labels[k] = {RelationLabel::unrelated, "", "", LabelSource::fallback};
            ++stats.missing_snippets;
            ++stats.fallbacks;
            continue;
        }
        pending.push_back({k, std::move(key), &sa->second, &sb->second});
    }

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> attempts{0};
    std::atomic<std::size_t> fallbacks{0};
    std::atomic<bool> exhausted{false};
    std::vector<std::uint8_t> done(pending.size(), 0);

    auto work = [&]() {
        while (!exhausted.load()) {
            const std::size_t p = next.fetch_add(1);
            if (p >= pending.size()) return;
            const auto& item = pending[p];
            const auto& edge = graph.edges[item.edge];
            ClassificationRequest request{"", graph.nodes[edge.a], graph.nodes[edge.b], vintage};
            std::string last_error;
            try {
                request.prompt = build_prompt(*item.a, *item.b, vintage + 1);
            } catch (const AnonymizationError& e) {
                out.labels[item.edge] = {RelationLabel::unrelated, "", "", LabelSource::fallback};
                warning_slots[item.edge] = request.stock_a + "-" + request.stock_b + ": " + e.what();
                fallbacks.fetch_add(1);
                done[p] = 1;
                continue;
            }
            bool ok = false;
            for (std::size_t attempt = 0; attempt <= options.max_retries; ++attempt) {
                if (attempts.fetch_add(1) >= options.call_budget) {
                    attempts.fetch_sub(1);
                    exhausted.store(true);
                    return;
                }
                try {
                    auto parsed = parse_classification(client.classify(request));
                    out.labels[item.edge] = {parsed.label, parsed.evidence_a, parsed.evidence_b, client.source()};
                    cache.append({item.key, request.stock_a, request.stock_b, vintage,
                                  std::string(kPromptTemplateVersion), parsed.label, parsed.evidence_a,
                                  parsed.evidence_b, ""});
                    ok = true;
                    break;
                } catch (const ClientError& e) {
                    last_error = e.what();
                } catch (const ParseError& e) {
                    last_error = e.what();
                }
                if (attempt < options.max_retries && options.backoff.count() > 0) {
                    std::this_thread::sleep_for(options.backoff * (1LL << std::min<std::size_t>(attempt, 16)));
                }
            }
            if (!ok) {
                out.labels[item.edge] = {RelationLabel::unrelated, "", "", LabelSource::fallback};
                warning_slots[item.edge] = request.stock_a + "-" + request.stock_b +
                                           ": classification failed after retries: " + last_error;
                fallbacks.fetch_add(1);
            }
            done[p] = 1;
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(options.parallelism, pending.size()));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    for (std::size_t p = 0; p < pending.size(); ++p) {
        if (done[p]) ++stats.live_calls;
    }
    stats.attempts = attempts.load();
    stats.fallbacks += fallbacks.load();
    for (auto& w : warning_slots) {
        if (w) stats.warnings.push_back(std::move(*w));
    }
    std::vector<std::uint8_t> resolved(graph.edges.size(), 1);
    for (std::size_t p = 0; p < pending.size(); ++p) resolved[pending[p].edge] = done[p];
    for (std::size_t k = 0; k < out.labels.size(); ++k) {
        if (resolved[k]) ++stats.histogram[out.labels[k].label];
    }

    if (exhausted.load()) {
        if (stats_out) stats_out->merge(stats);
        throw BudgetExceeded("classifier call budget of " + std::to_string(options.call_budget) + " exhausted",
                             stats);
    }
    if (stats_out) stats_out->merge(stats);
    return out;
}

SnippetStore::SnippetStore(std::filesystem::path dir, SnippetBudgets budgets, ExtractionRules rules)
    : dir_(std::move(dir)), budgets_(budgets), rules_(std::move(rules)) {
    const auto names_file = dir_ / "names.csv";
    std::set<std::string> all;
    if (std::filesystem::exists(names_file)) {
        std::size_t row = 0;
        const std::string contents = read_file(names_file);
        for (auto line : split(contents, '\n')) {
            ++row;
            line = trim(line);
            if (line.empty()) continue;
            auto comma = line.find(',');
            if (comma == std::string_view::npos) throw LoadError("names.csv row " + std::to_string(row));
            std::string stock(trim(line.substr(0, comma)));
            std::string name(trim(line.substr(comma + 1)));
            if (row == 1 && stock == "stock") continue;
            identifiers_[stock].push_back(name);
            all.insert(stock);
            all.insert(name);
        }
    }
    if (std::filesystem::is_directory(dir_)) {
        for (const auto& year_dir : std::filesystem::directory_iterator(dir_)) {
            if (!year_dir.is_directory()) continue;
            for (const auto& f : std::filesystem::directory_iterator(year_dir.path())) {
                if (f.path().extension() == ".txt") all.insert(f.path().stem().string());
            }
        }
    }
    names_.assign(all.begin(), all.end());
}

SnippetStore::SnippetStore(TextsByYear texts, const std::map<std::string, std::string>& firm_names,
                           SnippetBudgets budgets, ExtractionRules rules)
    : texts_(std::move(texts)), budgets_(budgets), rules_(std::move(rules)) {
    std::set<std::string> all;
    for (const auto& [stock, name] : firm_names) {
        identifiers_[stock].push_back(name);
        all.insert(stock);
        all.insert(name);
    }
    for (const auto& [year, by_stock] : *texts_) {
        for (const auto& [stock, text] : by_stock) all.insert(stock);
    }
    names_.assign(all.begin(), all.end());
}

std::optional<std::string> SnippetStore::text_for(int year, const std::string& stock) const {
    if (texts_) {
        auto y = texts_->find(year);
        if (y == texts_->end()) return std::nullopt;
        auto s = y->second.find(stock);
        if (s == y->second.end()) return std::nullopt;
        return s->second;
    }
    const auto file = dir_ / std::to_string(year) / (stock + ".txt");
    if (!std::filesystem::exists(file)) return std::nullopt;
    return read_file(file);
}

std::map<std::string, FirmSnippets> SnippetStore::for_vintage(int year, std::span<const std::string> stocks) const {
    std::map<std::string, FirmSnippets> out;
    for (const auto& stock : stocks) {
        auto raw = text_for(year, stock);
        if (!raw) continue;
        const std::string text = anonymize(*raw, names_);
        if (trim(text).empty()) continue;
        auto snippets = extract_snippets(text, budgets_, rules_);
        snippets.fiscal_year = year;
        snippets.identifiers.push_back(stock);
        if (auto it = identifiers_.find(stock); it != identifiers_.end()) {
            snippets.identifiers.insert(snippets.identifiers.end(), it->second.begin(), it->second.end());
        }
        out.emplace(stock, std::move(snippets));
    }
    return out;
}

}  // namespace relnet::relation
