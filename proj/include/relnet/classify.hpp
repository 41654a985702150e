#pragma once

#include "relnet/cache.hpp"
#include "relnet/classifier.hpp"
#include "relnet/graph.hpp"
#include "relnet/relation.hpp"

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace relnet::relation {

struct ClassifyOptions {
    std::size_t max_retries = 3;
    std::chrono::milliseconds backoff{500};  // doubled after each failed attempt
    std::size_t call_budget = std::numeric_limits<std::size_t>::max();  // client attempts per run
    std::size_t parallelism = 1;
};

struct ClassifyStats {
    std::size_t edges = 0;
    std::size_t cache_hits = 0;
    std::size_t live_calls = 0;  // edges sent to the client
    std::size_t attempts = 0;    // client invocations including retries
    std::size_t fallbacks = 0;
    std::size_t missing_snippets = 0;
    std::map<RelationLabel, std::size_t> histogram;
    std::vector<std::string> warnings;

    void merge(const ClassifyStats& other);
};

class BudgetExceeded : public Error {
public:
    BudgetExceeded(const std::string& what, ClassifyStats stats) : Error(what), stats_(std::move(stats)) {}
    const ClassifyStats& stats() const { return stats_; }

private:
    ClassifyStats stats_;
};

/// Labels every candidate edge. Cache hits are reused; misses go to the client
/// and successful answers are appended to the cache. Edges whose classification
/// fails after retries, or whose snippets are missing, fall back to unrelated.
/// Throws BudgetExceeded once the call budget is spent; answers already
/// received remain in the cache.
LabeledGraph classify_edges(const graph::CandidateGraph& graph,
                            const std::map<std::string, FirmSnippets>& snippets, ClassifierClient& client,
                            ClassificationCache& cache, int vintage, const ClassifyOptions& options = {},
                            ClassifyStats* stats = nullptr);

/// Raw filings under `<dir>/<year>/<stock>.txt` with an optional `<dir>/names.csv`
/// (stock,name). Texts are anonymized against every id and name in the store
/// before snippet extraction.
class SnippetStore {
public:
    SnippetStore(std::filesystem::path dir, SnippetBudgets budgets,
                 ExtractionRules rules = ExtractionRules::defaults());

    using TextsByYear = std::map<int, std::map<std::string, std::string>>;
    /// In-memory filings; `firm_names` maps stock id to additional names.
    SnippetStore(TextsByYear texts, const std::map<std::string, std::string>& firm_names, SnippetBudgets budgets,
                 ExtractionRules rules = ExtractionRules::defaults());

    std::map<std::string, FirmSnippets> for_vintage(int year, std::span<const std::string> stocks) const;
    const std::vector<std::string>& names() const { return names_; }

private:
    std::optional<std::string> text_for(int year, const std::string& stock) const;

    std::filesystem::path dir_;
    std::optional<TextsByYear> texts_;
    SnippetBudgets budgets_;
    ExtractionRules rules_;
    std::map<std::string, std::vector<std::string>> identifiers_;
    std::vector<std::string> names_;
};

}  // namespace relnet::relation
