#pragma once

#include "relnet/backtest.hpp"
#include "relnet/relation.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace relnet::config {

struct DataPaths {
    std::filesystem::path returns;
    std::filesystem::path membership;
    std::filesystem::path embeddings;      // directory of <year>.csv
    std::filesystem::path filings;         // directory of <year>/<stock>.txt plus names.csv
    std::filesystem::path industry_codes;  // stock,sic
    std::filesystem::path factors;         // optional date,f1..fK
};

enum class ClassifierKind { http, mock, oracle };
std::string_view to_string(ClassifierKind kind);

struct ClassifierSettings {
    ClassifierKind kind = ClassifierKind::oracle;
    std::string url;
    std::string model;
    std::string api_key_env = "RELNET_API_KEY";  // the key itself is never read from files
    double timeout_seconds = 30.0;
    std::size_t max_retries = 3;
    std::size_t backoff_ms = 500;
    std::size_t parallelism = 4;
    std::optional<std::size_t> call_budget;
    std::filesystem::path fixture;  // mock / oracle: stock_i,stock_j,label
};

struct RunConfig {
    DataPaths data;
    backtest::BacktestConfig backtest;
    relation::SnippetBudgets budgets;
    std::filesystem::path cache;  // JSONL; empty = in-memory only
    ClassifierSettings classifier;
    std::optional<std::size_t> nw_lag;
    std::filesystem::path output = "results";

    /// Complete effective configuration with defaults resolved.
    nlohmann::json to_json() const;
};

/// Applies `a.b.c=value` to a JSON document. The value is parsed as JSON when
/// it is valid JSON and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Unknown keys are rejected. Relative paths resolve against `base_dir`.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Reads a JSON config file, applies overrides in order, then parses.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace relnet::config
