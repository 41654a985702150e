#pragma once

#include "relnet/classifier.hpp"
#include "relnet/panel.hpp"
#include "relnet/relation.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace relnet::synth {

struct SynthSpec {
    std::size_t n_stocks = 50;
    std::size_t n_days = 1500;
    std::size_t n_clusters = 10;
    std::size_t embedding_dim = 16;
    double center_scale = 1.0;
    double embedding_noise = 0.3;
    /// Fraction of stocks whose embedding is a near-duplicate of a stock in another cluster.
    double spurious_fraction = 0.0;

    double market_vol = 0.01;
    double cluster_vol = 0.005;
    double idio_vol = 0.01;

    double kappa = 0.1;  // mean-reversion speed of linked-pair spreads
    double eta = 0.01;   // spread innovation volatility
    /// Starting spread for every planted pair; drawn from the stationary law when unset.
    std::optional<double> initial_spread;
    double competitor_drift = 0.001;  // per-day drift magnitude of competitor spreads

    /// Fractions of intra-cluster pairs per label; must sum to 1.
    std::map<relation::RelationLabel, double> label_plan = {
        {relation::RelationLabel::supply_chain, 0.15},
        {relation::RelationLabel::complementary, 0.10},
        {relation::RelationLabel::peer, 0.15},
        {relation::RelationLabel::unrelated, 0.60},
    };

    Date start_date{std::chrono::year{2011}, std::chrono::month{1}, std::chrono::day{3}};
    std::uint64_t seed = 1;
    /// Optional explicit ids by position; defaults to S000, S001, ...
    std::vector<std::string> stock_ids;

    void validate() const;
};

SynthSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const SynthSpec& spec);

struct PlantedPair {
    std::string a;  // lower position in the generation order
    std::string b;
    relation::RelationLabel label = relation::RelationLabel::unrelated;
    /// Spread level s_t on each day (empty for unrelated pairs); +1/2 of its daily
    /// change is added to a's return and -1/2 to b's.
    std::vector<double> spread;
};

struct SyntheticDataset {
    panel::ReturnPanel returns;
    panel::EmbeddingSet embeddings;
    panel::MembershipTable membership;
    std::map<int, std::map<std::string, std::string>> filings;  // vintage -> stock -> text
    std::map<std::string, std::string> names;                   // stock -> firm name
    std::map<std::string, std::string> industry_codes;          // stock -> 4-digit code
    std::vector<std::size_t> cluster;                           // by generation position
    std::vector<PlantedPair> truth;                             // every intra-cluster pair

    std::map<relation::PairKey, relation::RelationLabel> truth_labels() const;
};

SyntheticDataset generate_universe(const SynthSpec& spec);

/// Answers with the planted label for intra-cluster pairs and unrelated otherwise.
std::unique_ptr<relation::FixtureClassifier> oracle_classifier(const SyntheticDataset& dataset);

/// Writes returns.csv, membership.csv, embeddings/, sic.csv, filings/, truth.csv,
/// config.json and manifest.json (spec echo plus SHA-256 of every data file).
void write_dataset(const SyntheticDataset& dataset, const SynthSpec& spec, const std::filesystem::path& dir);

}  // namespace relnet::synth
