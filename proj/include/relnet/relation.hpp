#pragma once

#include "relnet/common.hpp"
#include "relnet/graph.hpp"

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relnet::relation {

enum class RelationLabel { competitor, supply_chain, complementary, substitute, peer, unrelated };

inline constexpr std::array<RelationLabel, 6> kAllLabels = {
    RelationLabel::competitor, RelationLabel::supply_chain, RelationLabel::complementary,
    RelationLabel::substitute, RelationLabel::peer,         RelationLabel::unrelated};

std::string_view to_string(RelationLabel label);
/// Exact, case-sensitive match against the taxonomy.
std::optional<RelationLabel> parse_label(std::string_view text);

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string raw) : Error(what), raw_(std::move(raw)) {}
    const std::string& raw() const { return raw_; }

private:
    std::string raw_;
};

class AnonymizationError : public Error {
public:
    using Error::Error;
};

struct FirmSnippets {
    std::string business_description;
    std::string segments;
    std::string competitor_sentences;
    int fiscal_year = 0;
    /// Names and ids that identify this firm; must not survive into a prompt.
    std::vector<std::string> identifiers;
};

struct SnippetBudgets {
    std::size_t description = 500;
    std::size_t segments = 200;
    std::size_t competitors = 200;
};

struct ExtractionRules {
    std::vector<std::string> segment_keywords;
    std::vector<std::string> compete_patterns;  // ECMAScript regexes, matched case-insensitively

    static ExtractionRules defaults();
};

std::vector<std::string> whitespace_tokens(std::string_view text);
std::vector<std::string> split_sentences(std::string_view text);

FirmSnippets extract_snippets(std::string_view filing_text, const SnippetBudgets& budgets,
                              const ExtractionRules& rules = ExtractionRules::defaults());

/// Replaces whole-word, case-insensitive occurrences of each name with "[FIRM]".
std::string anonymize(std::string_view text, std::span<const std::string> names);
bool mentions_any(std::string_view text, std::span<const std::string> names);

inline constexpr std::string_view kPromptTemplateVersion = "rtr-prompt-v1";

/// Renders the classification prompt for a window whose training period starts
/// in `year`; disclosures are from fiscal year `year - 1`.
std::string build_prompt(const FirmSnippets& a, const FirmSnippets& b, int year);

struct ParsedClassification {
    RelationLabel label = RelationLabel::unrelated;
    std::string evidence_a;
    std::string evidence_b;
};

ParsedClassification parse_classification(std::string_view raw);

enum class LabelSource { live, cache, oracle, fallback };
std::string_view to_string(LabelSource source);

struct EdgeClassification {
    RelationLabel label = RelationLabel::unrelated;
    std::string evidence_a;
    std::string evidence_b;
    LabelSource source = LabelSource::fallback;
};

/// Candidate graph plus one classification per edge (parallel to graph.edges).
struct LabeledGraph {
    graph::CandidateGraph graph;
    int vintage = 0;
    std::vector<EdgeClassification> labels;

    /// Label and evidence content only; `source` is provenance and excluded.
    bool same_content(const LabeledGraph& other) const;
};

/// One JSON object per edge: stock_i, stock_j, vintage, label, evidence_a, evidence_b.
std::string labeled_to_jsonl(const LabeledGraph& labeled);

class RelationWeights {
public:
    RelationWeights();  // competitor 0, unrelated 0, substitute 0.5, others 1
    explicit RelationWeights(const std::map<RelationLabel, double>& table);

    double operator[](RelationLabel label) const { return table_[static_cast<std::size_t>(label)]; }
    std::map<std::string, double> as_map() const;

private:
    std::array<double, 6> table_{};
};

struct RefinedEdge {
    std::size_t a = 0;
    std::size_t b = 0;
    double similarity = 0.0;
    std::optional<RelationLabel> label;  // empty when filtering is disabled
    double omega = 1.0;

    bool operator==(const RefinedEdge&) const = default;
};

struct RefinedGraph {
    std::vector<std::string> nodes;
    std::vector<RefinedEdge> edges;

    bool operator==(const RefinedGraph&) const = default;
};

RefinedGraph apply_relation_filter(const LabeledGraph& labeled, const RelationWeights& weights);

/// Every candidate edge retained with omega = 1 (filtering disabled).
RefinedGraph unfiltered(const graph::CandidateGraph& candidate);

}  // namespace relnet::relation
