#include "relnet/cache.hpp"

#include <json.hpp>

#include <chrono>
#include <ctime>

namespace relnet::relation {
namespace {

using nlohmann::json;

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::optional<CacheRecord> decode(std::string_view line) {
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    try {
        CacheRecord r;
        r.key = j.at("key").get<std::string>();
        const auto& pair = j.at("pair");
        r.stock_a = pair.at(0).get<std::string>();
        r.stock_b = pair.at(1).get<std::string>();
        r.year = j.at("year").get<int>();
        r.template_version = j.at("template_version").get<std::string>();
        auto label = parse_label(j.at("label").get<std::string>());
        if (!label) return std::nullopt;
        r.label = *label;
        r.evidence_a = j.value("evidence_a", "");
        r.evidence_b = j.value("evidence_b", "");
        r.timestamp = j.value("timestamp", "");
        if (r.key != cache_key(r.stock_a, r.stock_b, r.year, r.template_version)) return std::nullopt;
        return r;
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

}  // namespace

std::string cache_key(const std::string& stock_a, const std::string& stock_b, int year,
                      std::string_view template_version) {
    const auto& lo = stock_a < stock_b ? stock_a : stock_b;
    const auto& hi = stock_a < stock_b ? stock_b : stock_a;
    std::string material = lo;
    material += '\x1f';
    material += hi;
    material += '\x1f';
    material += std::to_string(year);
    material += '\x1f';
    material += template_version;
    return sha256_hex(material);
}

ClassificationCache::ClassificationCache(std::filesystem::path file) : file_(std::move(file)) {
    if (std::filesystem::exists(*file_)) {
        const std::string text = read_file(*file_);
        for (auto line : split(text, '\n')) {
            if (trim(line).empty()) continue;
            auto record = decode(line);
            if (!record) {
                ++malformed_;
                continue;
            }
            records_.try_emplace(record->key, std::move(*record));
        }
        // A crash mid-append can leave an unterminated line; start fresh on the next one.
        if (!text.empty() && text.back() != '\n') {
            std::ofstream fix(*file_, std::ios::app | std::ios::binary);
            fix << '\n';
        }
    } else if (file_->has_parent_path()) {
        std::filesystem::create_directories(file_->parent_path());
    }
    out_.open(*file_, std::ios::app | std::ios::binary);
    if (!out_) throw Error("cannot open classification cache " + file_->string());
}

std::optional<CacheRecord> ClassificationCache::find(const std::string& key) const {
    std::lock_guard lock(mutex_);
    auto it = records_.find(key);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

void ClassificationCache::append(CacheRecord record) {
    std::lock_guard lock(mutex_);
    if (records_.contains(record.key)) return;
    if (record.timestamp.empty()) record.timestamp = utc_now();
    if (out_.is_open()) {
        json j = {{"key", record.key},
                  {"pair", json::array({record.stock_a, record.stock_b})},
                  {"year", record.year},
                  {"template_version", record.template_version},
                  {"label", std::string(to_string(record.label))},
                  {"evidence_a", record.evidence_a},
                  {"evidence_b", record.evidence_b},
                  {"timestamp", record.timestamp}};
        out_ << j.dump() << '\n';
        out_.flush();
        if (!out_) throw Error("failed to append to classification cache");
    }
    records_.emplace(record.key, std::move(record));
}

std::size_t ClassificationCache::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

}  // namespace relnet::relation
