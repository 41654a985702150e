#pragma once

#include "relnet/relation.hpp"

#include <atomic>
#include <filesystem>
#include <map>
#include <string>
#include <utility>

namespace relnet::relation {

/// What a classifier sees for one edge. Live clients send only `prompt` over
/// the wire; the ids let test doubles answer without parsing the prompt.
struct ClassificationRequest {
    std::string prompt;
    std::string stock_a;
    std::string stock_b;
    int vintage = 0;
};

class ClientError : public Error {
public:
    using Error::Error;
};

class ClassifierClient {
public:
    virtual ~ClassifierClient() = default;
    /// Raw response text expected to contain one JSON object. Throws ClientError.
    virtual std::string classify(const ClassificationRequest& request) = 0;
    virtual LabelSource source() const { return LabelSource::live; }
};

using PairKey = std::pair<std::string, std::string>;
PairKey canonical_pair(const std::string& a, const std::string& b);

/// Deterministic client answering from a fixed pair -> label map; pairs not in
/// the map are unrelated. Thread-safe; counts invocations.
class FixtureClassifier : public ClassifierClient {
public:
    explicit FixtureClassifier(std::map<PairKey, RelationLabel> labels,
                               LabelSource source = LabelSource::oracle);

    std::string classify(const ClassificationRequest& request) override;
    LabelSource source() const override { return source_; }
    std::size_t calls() const { return calls_.load(); }

private:
    std::map<PairKey, RelationLabel> labels_;
    LabelSource source_;
    std::atomic<std::size_t> calls_{0};
};

/// `stock_i,stock_j,label` with optional header.
std::map<PairKey, RelationLabel> parse_label_fixture(std::string_view csv);
std::map<PairKey, RelationLabel> load_label_fixture(const std::filesystem::path& path);

struct HttpClientOptions {
    std::string url;  // full endpoint, e.g. https://host/v1/chat/completions
    std::string model;
    std::string api_key;
    double timeout_seconds = 30.0;
};

/// OpenAI-compatible chat-completions client at temperature 0.
class HttpClassifier : public ClassifierClient {
public:
    explicit HttpClassifier(HttpClientOptions options);
    std::string classify(const ClassificationRequest& request) override;

private:
    HttpClientOptions options_;
    std::string origin_;
    std::string path_;
};

}  // namespace relnet::relation
