#include "relnet/config.hpp"

#include <set>

namespace relnet::config {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& known) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (!known.contains(key)) {
            throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
        }
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    if (path.is_relative()) path = base / path;
    return path.lexically_normal();
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("invalid value for '" + where + "." + key + "'");
    }
}

void read_optional_size(const json& obj, const char* key, std::optional<std::size_t>& out, const std::string& where) {
    if (!obj.contains(key)) return;
    if (obj.at(key).is_null()) {
        out.reset();
        return;
    }
    std::size_t v = 0;
    read(obj, key, v, where);
    out = v;
}

json optional_json(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string_view to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::http: return "http";
        case ClassifierKind::mock: return "mock";
        case ClassifierKind::oracle: return "oracle";
    }
    return "?";
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("override '" + assignment + "' has an empty key segment");
        if (!node->is_object()) {
            if (!node->is_null()) throw ConfigError("override '" + assignment + "' descends into a non-object");
            *node = json::object();
        }
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    reject_unknown(doc, "", {"data", "backtest", "relation", "classifier", "metrics", "output"});
    RunConfig cfg;

    if (doc.contains("data")) {
        const auto& d = doc.at("data");
        reject_unknown(d, "data", {"returns", "membership", "embeddings", "filings", "industry_codes", "factors"});
        auto path_of = [&](const char* key, std::filesystem::path& out) {
            std::string s;
            read(d, key, s, "data");
            if (!s.empty()) out = resolve(base_dir, s);
        };
        path_of("returns", cfg.data.returns);
        path_of("membership", cfg.data.membership);
        path_of("embeddings", cfg.data.embeddings);
        path_of("filings", cfg.data.filings);
        path_of("industry_codes", cfg.data.industry_codes);
        path_of("factors", cfg.data.factors);
    }

    if (doc.contains("backtest")) {
        const auto& b = doc.at("backtest");
        reject_unknown(b, "backtest",
                       {"k", "train_len", "test_len", "groups", "rebalance_every", "graph_mode", "weighting",
                        "filtering", "seed", "window_workers"});
        auto& bt = cfg.backtest;
        read(b, "k", bt.k, "backtest");
        read(b, "train_len", bt.train_len, "backtest");
        read(b, "test_len", bt.test_len, "backtest");
        read(b, "groups", bt.groups, "backtest");
        read(b, "rebalance_every", bt.rebalance_every, "backtest");
        read(b, "filtering", bt.filtering, "backtest");
        read(b, "seed", bt.seed, "backtest");
        read(b, "window_workers", bt.window_workers, "backtest");
        std::string s;
        if (b.contains("graph_mode")) {
            read(b, "graph_mode", s, "backtest");
            bt.graph_mode = graph::parse_graph_kind(s);
        }
        if (b.contains("weighting")) {
            read(b, "weighting", s, "backtest");
            bt.weighting = signal::parse_weighting(s);
        }
    }

    if (doc.contains("relation")) {
        const auto& r = doc.at("relation");
        reject_unknown(r, "relation", {"weights", "budgets", "cache"});
        if (r.contains("weights")) {
            const auto& w = r.at("weights");
            if (!w.is_object()) throw ConfigError("relation.weights must be an object");
            // Partial tables override the defaults label by label.
            std::map<relation::RelationLabel, double> table;
            const relation::RelationWeights defaults;
            for (auto label : relation::kAllLabels) table[label] = defaults[label];
            for (const auto& [key, value] : w.items()) {
                auto label = relation::parse_label(key);
                if (!label) throw ConfigError("unknown key 'relation.weights." + key + "'");
                if (!value.is_number()) throw ConfigError("relation.weights." + key + " must be a number");
                table[*label] = value.get<double>();
            }
            cfg.backtest.relation_weights = relation::RelationWeights(table);
        }
        if (r.contains("budgets")) {
            const auto& b = r.at("budgets");
            reject_unknown(b, "relation.budgets", {"description", "segments", "competitors"});
            read(b, "description", cfg.budgets.description, "relation.budgets");
            read(b, "segments", cfg.budgets.segments, "relation.budgets");
            read(b, "competitors", cfg.budgets.competitors, "relation.budgets");
        }
        if (r.contains("cache")) {
            std::string s;
            read(r, "cache", s, "relation");
            cfg.cache = resolve(base_dir, s);
        }
    }

    if (doc.contains("classifier")) {
        const auto& c = doc.at("classifier");
        reject_unknown(c, "classifier",
                       {"kind", "url", "model", "api_key_env", "timeout_seconds", "max_retries", "backoff_ms",
                        "parallelism", "call_budget", "fixture"});
        auto& cl = cfg.classifier;
        std::string kind;
        read(c, "kind", kind, "classifier");
        if (!kind.empty()) {
            if (kind == "http") cl.kind = ClassifierKind::http;
            else if (kind == "mock") cl.kind = ClassifierKind::mock;
            else if (kind == "oracle") cl.kind = ClassifierKind::oracle;
            else throw ConfigError("classifier.kind must be http, mock or oracle");
        }
        read(c, "url", cl.url, "classifier");
        read(c, "model", cl.model, "classifier");
        read(c, "api_key_env", cl.api_key_env, "classifier");
        read(c, "timeout_seconds", cl.timeout_seconds, "classifier");
        read(c, "max_retries", cl.max_retries, "classifier");
        read(c, "backoff_ms", cl.backoff_ms, "classifier");
        read(c, "parallelism", cl.parallelism, "classifier");
        read_optional_size(c, "call_budget", cl.call_budget, "classifier");
        std::string fixture;
        read(c, "fixture", fixture, "classifier");
        cl.fixture = resolve(base_dir, fixture);
    }

    if (doc.contains("metrics")) {
        const auto& m = doc.at("metrics");
        reject_unknown(m, "metrics", {"nw_lag"});
        read_optional_size(m, "nw_lag", cfg.nw_lag, "metrics");
    }

    if (doc.contains("output")) {
        std::string s;
        if (!doc.at("output").is_string()) throw ConfigError("invalid value for 'output'");
        s = doc.at("output").get<std::string>();
        cfg.output = resolve(base_dir, s);
    } else {
        cfg.output = resolve(base_dir, "results");
    }

    cfg.backtest.validate();
    if (cfg.classifier.parallelism < 1) throw ConfigError("classifier.parallelism must be at least 1");
    if (!(cfg.classifier.timeout_seconds > 0.0)) throw ConfigError("classifier.timeout_seconds must be positive");
    if (cfg.classifier.kind == ClassifierKind::http && cfg.classifier.url.empty()) {
        throw ConfigError("classifier.url is required for kind http");
    }
    if (cfg.classifier.kind != ClassifierKind::http && cfg.classifier.fixture.empty() && cfg.backtest.filtering) {
        throw ConfigError("classifier.fixture is required for kind " + std::string(to_string(cfg.classifier.kind)));
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    for (const auto& o : overrides) apply_override(doc, o);
    auto base = std::filesystem::absolute(path).parent_path();
    return parse_config(doc, base);
}

json RunConfig::to_json() const {
    const auto& bt = backtest;
    json weights = json::object();
    for (const auto& [label, w] : bt.relation_weights.as_map()) weights[label] = w;
    return {
        {"data",
         {{"returns", data.returns.string()},
          {"membership", data.membership.string()},
          {"embeddings", data.embeddings.string()},
          {"filings", data.filings.string()},
          {"industry_codes", data.industry_codes.string()},
          {"factors", data.factors.string()}}},
        {"backtest",
         {{"k", bt.k},
          {"train_len", bt.train_len},
          {"test_len", bt.test_len},
          {"groups", bt.groups},
          {"rebalance_every", bt.rebalance_every},
          {"graph_mode", std::string(graph::to_string(bt.graph_mode))},
          {"weighting", std::string(signal::to_string(bt.weighting))},
          {"filtering", bt.filtering},
          {"seed", bt.seed},
          {"window_workers", bt.window_workers}}},
        {"relation",
         {{"weights", weights},
          {"budgets",
           {{"description", budgets.description},
            {"segments", budgets.segments},
            {"competitors", budgets.competitors}}},
          {"cache", cache.string()}}},
        {"classifier",
         {{"kind", std::string(to_string(classifier.kind))},
          {"url", classifier.url},
          {"model", classifier.model},
          {"api_key_env", classifier.api_key_env},
          {"timeout_seconds", classifier.timeout_seconds},
          {"max_retries", classifier.max_retries},
          {"backoff_ms", classifier.backoff_ms},
          {"parallelism", classifier.parallelism},
          {"call_budget", optional_json(classifier.call_budget)},
          {"fixture", classifier.fixture.string()}}},
        {"metrics", {{"nw_lag", optional_json(nw_lag)}}},
        {"output", output.string()},
    };
}

}  // namespace relnet::config
