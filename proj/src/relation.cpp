#include "relnet/relation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

namespace relnet::relation {
namespace {

using nlohmann::json;

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

/// Positions of whole-word, case-insensitive matches of `needle` in `haystack`.
std::vector<std::size_t> word_matches(const std::string& hay_lower, const std::string& needle_lower) {
    std::vector<std::size_t> hits;
    if (needle_lower.empty()) return hits;
    std::size_t pos = 0;
    while ((pos = hay_lower.find(needle_lower, pos)) != std::string::npos) {
        const std::size_t end = pos + needle_lower.size();
        const bool left_ok = pos == 0 || !is_word_char(hay_lower[pos - 1]) || !is_word_char(needle_lower.front());
        const bool right_ok =
            end == hay_lower.size() || !is_word_char(hay_lower[end]) || !is_word_char(needle_lower.back());
        if (left_ok && right_ok) hits.push_back(pos);
        pos = pos + 1;
    }
    return hits;
}

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t limit) {
    std::string out;
    const std::size_t n = std::min(limit, tokens.size());
    for (std::size_t k = 0; k < n; ++k) {
        if (k) out += ' ';
        out += tokens[k];
    }
    return out;
}

std::string truncate_tokens(std::string_view text, std::size_t budget) {
    return join_tokens(whitespace_tokens(text), budget);
}

std::string section_or_none(const std::string& text) { return text.empty() ? "(none)" : text; }

/// End index (inclusive) of the balanced JSON object starting at `open`, if any.
std::optional<std::size_t> matching_brace(std::string_view raw, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t k = open; k < raw.size(); ++k) {
        const char c = raw[k];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return k;
        }
    }
    return std::nullopt;
}

std::string evidence_field(const json& obj, const char* key, std::string_view raw) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return {};
    if (!it->is_string()) throw ParseError(std::string("field '") + key + "' is not a string", std::string(raw));
    return it->get<std::string>();
}

}  // namespace

std::string_view to_string(RelationLabel label) {
    switch (label) {
        case RelationLabel::competitor: return "competitor";
        case RelationLabel::supply_chain: return "supply_chain";
        case RelationLabel::complementary: return "complementary";
        case RelationLabel::substitute: return "substitute";
        case RelationLabel::peer: return "peer";
        case RelationLabel::unrelated: return "unrelated";
    }
    return "unrelated";
}

std::optional<RelationLabel> parse_label(std::string_view text) {
    for (auto label : kAllLabels) {
        if (to_string(label) == text) return label;
    }
    return std::nullopt;
}

std::string_view to_string(LabelSource source) {
    switch (source) {
        case LabelSource::live: return "live";
        case LabelSource::cache: return "cache";
        case LabelSource::oracle: return "oracle";
        case LabelSource::fallback: return "fallback";
    }
    return "fallback";
}

ExtractionRules ExtractionRules::defaults() {
    ExtractionRules rules;
    rules.segment_keywords = {"segment", "segments", "product", "products", "service",
                              "services", "brand",   "brands",   "division", "divisions"};
    rules.compete_patterns = {
        R"(\bcompet(e|es|ing)\s+(with|against)\b)",
        R"(\bcompetitors?\s+(include|includes|are|such as)\b)",
        R"(\bcompetition\s+(from|with)\b)",
        R"(\b(principal|main|primary|major|key)\s+competitors\b)",
    };
    return rules;
}

std::vector<std::string> whitespace_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t k = 0;
    while (k < text.size()) {
        while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
        const std::size_t start = k;
        while (k < text.size() && !std::isspace(static_cast<unsigned char>(text[k]))) ++k;
        if (k > start) tokens.emplace_back(text.substr(start, k - start));
    }
    return tokens;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&]() {
        auto s = truncate_tokens(current, std::string::npos);
        if (!s.empty()) out.push_back(std::move(s));
        current.clear();
    };
    for (std::size_t k = 0; k < text.size(); ++k) {
        const char c = text[k];
        if (c == '\n' && k + 1 < text.size() && text[k + 1] == '\n') {
            flush();
            continue;
        }
        current += c;
        if ((c == '.' || c == '!' || c == '?') &&
            (k + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[k + 1])))) {
            flush();
        }
    }
    flush();
    return out;
}

FirmSnippets extract_snippets(std::string_view filing_text, const SnippetBudgets& budgets,
                              const ExtractionRules& rules) {
    if (trim(filing_text).empty()) throw DataError("extract_snippets: empty filing text");
    FirmSnippets out;
    out.business_description = truncate_tokens(filing_text, budgets.description);

    std::vector<std::regex> patterns;
    patterns.reserve(rules.compete_patterns.size());
    for (const auto& p : rules.compete_patterns) {
        patterns.emplace_back(p, std::regex::ECMAScript | std::regex::icase);
    }
    std::vector<std::string> keywords;
    for (const auto& kw : rules.segment_keywords) keywords.push_back(lower(kw));

    std::string segments;
    std::string competitors;
    for (const auto& sentence : split_sentences(filing_text)) {
        const std::string low = lower(sentence);
        const bool compete = std::any_of(patterns.begin(), patterns.end(),
                                         [&](const std::regex& re) { return std::regex_search(sentence, re); });
        if (compete) {
            if (!competitors.empty()) competitors += ' ';
            competitors += sentence;
        }
        const bool segment = std::any_of(keywords.begin(), keywords.end(),
                                         [&](const std::string& kw) { return !word_matches(low, kw).empty(); });
        if (segment) {
            if (!segments.empty()) segments += ' ';
            segments += sentence;
        }
    }
    out.segments = truncate_tokens(segments, budgets.segments);
    out.competitor_sentences = truncate_tokens(competitors, budgets.competitors);
    return out;
}

std::string anonymize(std::string_view text, std::span<const std::string> names) {
    std::string out(text);
    // Longest names first so "Acme Corp" is replaced before "Acme".
    std::vector<std::string> ordered(names.begin(), names.end());
    std::sort(ordered.begin(), ordered.end(),
              [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
    for (const auto& name : ordered) {
        const std::string needle = lower(trim(name));
        if (needle.empty()) continue;
        auto hits = word_matches(lower(out), needle);
        for (auto it = hits.rbegin(); it != hits.rend(); ++it) out.replace(*it, needle.size(), "[FIRM]");
    }
    return out;
}

bool mentions_any(std::string_view text, std::span<const std::string> names) {
    const std::string low = lower(text);
    return std::any_of(names.begin(), names.end(), [&](const std::string& name) {
        const std::string needle = lower(trim(name));
        return !needle.empty() && !word_matches(low, needle).empty();
    });
}

std::string build_prompt(const FirmSnippets& a, const FirmSnippets& b, int year) {
    std::vector<std::string> names = a.identifiers;
    names.insert(names.end(), b.identifiers.begin(), b.identifiers.end());
    for (const FirmSnippets* firm : {&a, &b}) {
        for (const std::string* section :
             {&firm->business_description, &firm->segments, &firm->competitor_sentences}) {
            if (mentions_any(*section, names)) {
                throw AnonymizationError("snippet text names a firm; anonymize before building the prompt");
            }
        }
    }

    const std::string prior = std::to_string(year - 1);
    std::string out;
    out += "You are an industry analyst. Based ONLY on the two company disclosures below,\n";
    out += "(both filed before " + prior + "-12-31), classify their economic relationship.\n";
    auto firm = [&](const char* tag, const FirmSnippets& s) {
        out += "\n=== Firm ";
        out += tag;
        out += " (Fiscal Year " + prior + ") ===\n";
        out += "Business description:\n" + section_or_none(s.business_description) + "\n\n";
        out += "Key products/segments:\n" + section_or_none(s.segments) + "\n\n";
        out += "Competitors mentioned:\n" + section_or_none(s.competitor_sentences) + "\n";
    };
    firm("A", a);
    firm("B", b);
    out += "\nChoose exactly one label from:\n";
    out += "[competitor, supply_chain, complementary, substitute, peer, unrelated]\n";
    out += "\nReturn JSON:\n";
    out += "{\"label\": \"...\", \"evidence_span_A\": \"...\", \"evidence_span_B\": \"...\"}\n";
    return out;
}

ParsedClassification parse_classification(std::string_view raw) {
    std::optional<json> object;
    for (std::size_t pos = raw.find('{'); pos != std::string_view::npos; pos = raw.find('{', pos + 1)) {
        auto end = matching_brace(raw, pos);
        if (!end) continue;
        auto parsed = json::parse(raw.substr(pos, *end - pos + 1), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) {
            object = std::move(parsed);
            break;
        }
    }
    if (!object) throw ParseError("no JSON object in classifier response", std::string(raw));
    auto it = object->find("label");
    if (it == object->end()) throw ParseError("missing \"label\" in classifier response", std::string(raw));
    if (!it->is_string()) throw ParseError("\"label\" is not a string", std::string(raw));
    const std::string text = lower(trim(it->get<std::string>()));
    auto label = parse_label(text);
    if (!label) throw ParseError("unknown label '" + text + "'", std::string(raw));

    ParsedClassification out;
    out.label = *label;
    out.evidence_a = evidence_field(*object, "evidence_span_A", raw);
    out.evidence_b = evidence_field(*object, "evidence_span_B", raw);
    if (out.label != RelationLabel::unrelated && (out.evidence_a.empty() || out.evidence_b.empty())) {
        throw ParseError("missing evidence for label '" + text + "'", std::string(raw));
    }
    return out;
}

bool LabeledGraph::same_content(const LabeledGraph& other) const {
    if (!(graph == other.graph) || vintage != other.vintage || labels.size() != other.labels.size()) return false;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const auto& x = labels[k];
        const auto& y = other.labels[k];
        if (x.label != y.label || x.evidence_a != y.evidence_a || x.evidence_b != y.evidence_b) return false;
    }
    return true;
}

std::string labeled_to_jsonl(const LabeledGraph& labeled) {
    std::string out;
    for (std::size_t k = 0; k < labeled.graph.edges.size(); ++k) {
        const auto& e = labeled.graph.edges[k];
        const auto& c = labeled.labels.at(k);
        json row = {{"stock_i", labeled.graph.nodes[e.a]},
                    {"stock_j", labeled.graph.nodes[e.b]},
                    {"vintage", labeled.vintage},
                    {"label", std::string(to_string(c.label))},
                    {"evidence_a", c.evidence_a},
                    {"evidence_b", c.evidence_b}};
        out += row.dump();
        out += '\n';
    }
    return out;
}

RelationWeights::RelationWeights() {
    table_ = {0.0, 1.0, 1.0, 0.5, 1.0, 0.0};
}

RelationWeights::RelationWeights(const std::map<RelationLabel, double>& table) {
    for (auto label : kAllLabels) {
        auto it = table.find(label);
        if (it == table.end()) {
            throw ConfigError("relation weight missing for '" + std::string(to_string(label)) + "'");
        }
        if (!std::isfinite(it->second) || it->second < 0.0) {
            throw ConfigError("relation weight for '" + std::string(to_string(label)) + "' must be >= 0");
        }
        table_[static_cast<std::size_t>(label)] = it->second;
    }
}

std::map<std::string, double> RelationWeights::as_map() const {
    std::map<std::string, double> out;
    for (auto label : kAllLabels) out[std::string(to_string(label))] = (*this)[label];
    return out;
}

RefinedGraph apply_relation_filter(const LabeledGraph& labeled, const RelationWeights& weights) {
    if (labeled.labels.size() != labeled.graph.edges.size()) {
        throw DataError("labeled graph has " + std::to_string(labeled.labels.size()) + " labels for " +
                        std::to_string(labeled.graph.edges.size()) + " edges");
    }
    RefinedGraph out;
    out.nodes = labeled.graph.nodes;
    for (std::size_t k = 0; k < labeled.graph.edges.size(); ++k) {
        const auto& e = labeled.graph.edges[k];
        const auto label = labeled.labels[k].label;
        const double omega = weights[label];
        if (omega == 0.0) continue;
        out.edges.push_back({e.a, e.b, e.similarity, label, omega});
    }
    return out;
}

RefinedGraph unfiltered(const graph::CandidateGraph& candidate) {
    RefinedGraph out;
    out.nodes = candidate.nodes;
    out.edges.reserve(candidate.edges.size());
    for (const auto& e : candidate.edges) out.edges.push_back({e.a, e.b, e.similarity, std::nullopt, 1.0});
    return out;
}

}  // namespace relnet::relation
