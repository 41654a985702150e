#pragma once

#include "relnet/relation.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace relnet::relation {

struct CacheRecord {
    std::string key;
    std::string stock_a;
    std::string stock_b;
    int year = 0;
    std::string template_version;
    RelationLabel label = RelationLabel::unrelated;
    std::string evidence_a;
    std::string evidence_b;
    std::string timestamp;
};

/// SHA-256 over (sorted pair ids, vintage year, template version).
std::string cache_key(const std::string& stock_a, const std::string& stock_b, int year,
                      std::string_view template_version);

/// Append-only line-delimited JSON store. Lookups and appends are thread-safe;
/// appends go through a single writer. The first record for a key wins on load.
class ClassificationCache {
public:
    ClassificationCache() = default;  // memory only
    explicit ClassificationCache(std::filesystem::path file);

    ClassificationCache(const ClassificationCache&) = delete;
    ClassificationCache& operator=(const ClassificationCache&) = delete;

    std::optional<CacheRecord> find(const std::string& key) const;
    void append(CacheRecord record);

    std::size_t size() const;
    std::size_t malformed_lines() const { return malformed_; }
    const std::optional<std::filesystem::path>& file() const { return file_; }

private:
    std::optional<std::filesystem::path> file_;
    std::map<std::string, CacheRecord> records_;
    std::ofstream out_;
    std::size_t malformed_ = 0;
    mutable std::mutex mutex_;
};

}  // namespace relnet::relation
