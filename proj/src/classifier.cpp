#include "relnet/classifier.hpp"

#include <httplib.h>
#include <json.hpp>

namespace relnet::relation {

using nlohmann::json;

PairKey canonical_pair(const std::string& a, const std::string& b) {
    return a < b ? PairKey{a, b} : PairKey{b, a};
}

FixtureClassifier::FixtureClassifier(std::map<PairKey, RelationLabel> labels, LabelSource source)
    : labels_(std::move(labels)), source_(source) {}

std::string FixtureClassifier::classify(const ClassificationRequest& request) {
    calls_.fetch_add(1);
    auto it = labels_.find(canonical_pair(request.stock_a, request.stock_b));
    const RelationLabel label = it == labels_.end() ? RelationLabel::unrelated : it->second;
    json out = {{"label", std::string(to_string(label))}, {"evidence_span_A", ""}, {"evidence_span_B", ""}};
    if (label != RelationLabel::unrelated) {
        out["evidence_span_A"] = "planted " + std::string(to_string(label)) + " relation";
        out["evidence_span_B"] = "planted " + std::string(to_string(label)) + " relation";
    }
    return out.dump();
}

std::map<PairKey, RelationLabel> parse_label_fixture(std::string_view csv) {
    std::map<PairKey, RelationLabel> out;
    std::size_t row = 0;
    for (auto line : split(csv, '\n')) {
        ++row;
        line = trim(line);
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != 3) throw LoadError("label fixture row " + std::to_string(row) + ": expected 3 fields");
        if (row == 1 && trim(cells[0]) == "stock_i") continue;
        auto label = parse_label(trim(cells[2]));
        if (!label) throw LoadError("label fixture row " + std::to_string(row) + ": unknown label");
        out[canonical_pair(std::string(trim(cells[0])), std::string(trim(cells[1])))] = *label;
    }
    return out;
}

std::map<PairKey, RelationLabel> load_label_fixture(const std::filesystem::path& path) {
    return parse_label_fixture(read_file(path));
}

HttpClassifier::HttpClassifier(HttpClientOptions options) : options_(std::move(options)) {
    const auto scheme_end = options_.url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("classifier url must include a scheme: " + options_.url);
    const auto path_start = options_.url.find('/', scheme_end + 3);
    origin_ = options_.url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : options_.url.substr(path_start);
}

std::string HttpClassifier::classify(const ClassificationRequest& request) {
    httplib::Client client(origin_);
    const auto secs = static_cast<time_t>(options_.timeout_seconds);
    const auto usecs = static_cast<time_t>((options_.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);
    json body = {{"model", options_.model},
                 {"temperature", 0},
                 {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})}};

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw ClientError("classifier request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw ClientError("classifier returned HTTP " + std::to_string(res->status));
    auto reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) throw ClientError("classifier reply is not JSON");
    try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw ClientError("classifier reply lacks choices[0].message.content");
    }
}

}  // namespace relnet::relation
