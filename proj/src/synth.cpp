#include "relnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

namespace relnet::synth {

namespace {

using relation::RelationLabel;

// Box-Muller on mt19937_64 so that draws do not depend on the standard
// library's normal_distribution.
class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

enum Stream : std::uint64_t {
    kCenters = 1,
    kStockEmbedding = 2,
    kSpurious = 3,
    kPlan = 4,
    kMarket = 5,
    kCluster = 6,
    kIdio = 7,
    kPair = 8,
};

std::vector<Date> weekdays_from(Date start, std::size_t n) {
    std::vector<Date> out;
    out.reserve(n);
    std::chrono::sys_days day{start};
    while (out.size() < n) {
        const std::chrono::weekday wd{day};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.emplace_back(day);
        day += std::chrono::days{1};
    }
    return out;
}

constexpr std::array<std::string_view, 20> kNamePrefixes = {
    "Alder", "Birch", "Cedar", "Dunmore", "Elmstead", "Fairview", "Granite", "Harbor", "Ironwood", "Juniper",
    "Kestrel", "Larkspur", "Meridian", "Northgate", "Oakridge", "Pinecrest", "Quarry", "Redfield", "Silverton",
    "Thornbury"};
constexpr std::array<std::string_view, 10> kNameSuffixes = {
    "Holdings", "Industries", "Group", "Corporation", "Partners", "Enterprises", "Works", "Company", "Labs",
    "Systems"};
constexpr std::array<std::string_view, 12> kProducts = {
    "semiconductor", "medical device", "specialty chemical", "freight logistics", "packaged food",
    "industrial machinery", "enterprise software", "residential construction", "apparel", "renewable power",
    "payment processing", "consumer electronics"};
constexpr std::array<std::string_view, 12> kSegments = {
    "Components", "Clinical", "Materials", "Transport", "Brands", "Equipment", "Cloud", "Homebuilding",
    "Retail", "Generation", "Networks", "Devices"};

std::string firm_name(std::size_t position) {
    std::string name = std::string(kNamePrefixes[position % kNamePrefixes.size()]) + " " +
                       std::string(kNameSuffixes[(position / kNamePrefixes.size()) % kNameSuffixes.size()]);
    const std::size_t round = position / (kNamePrefixes.size() * kNameSuffixes.size());
    if (round > 0) name += " " + std::to_string(round + 1);
    return name + " Inc";
}

std::string product_of(std::size_t cluster) {
    std::string p(kProducts[cluster % kProducts.size()]);
    if (cluster >= kProducts.size()) p += " line " + std::to_string(cluster / kProducts.size() + 1);
    return p;
}

std::string relation_sentence(RelationLabel label, const std::string& product, const std::string& other) {
    switch (label) {
        case RelationLabel::supply_chain:
            return "We purchase key " + product + " inputs from " + other +
                   " under a long-term supply agreement, and disruption at this supplier would affect our "
                   "deliveries.";
        case RelationLabel::complementary:
            return "Our products are commonly sold alongside complementary " + product + " offerings from " + other +
                   ".";
        case RelationLabel::substitute:
            return "Customers may substitute " + product + " solutions from " + other + " for our own products.";
        case RelationLabel::peer:
            return "We operate in the same " + product + " market as " + other +
                   " and are exposed to the same demand conditions.";
        case RelationLabel::competitor:
            return "We compete with " + other + " for " + product + " customers and market share.";
        case RelationLabel::unrelated:
            break;
    }
    return {};
}

std::string filing_text(const std::string& name, std::size_t cluster, int year,
                        const std::vector<std::string>& relation_sentences) {
    const std::string product = product_of(cluster);
    const std::string segment(kSegments[cluster % kSegments.size()]);
    std::string text;
    text += name + " designs, manufactures and markets " + product + " products for customers worldwide. ";
    text += "For fiscal year " + std::to_string(year) + " we continued to invest in " + product +
            " capacity and research.\n\n";
    text += "Our operations are organized into two reportable segments: " + segment + " and " + segment +
            " Services. ";
    text += "The " + segment + " segment accounts for the majority of our revenue.\n\n";
    text += "The " + product + " industry is highly competitive and we face competition from domestic and "
            "international providers. ";
    for (const auto& s : relation_sentences) text += s + " ";
    text += "\n";
    return text;
}

// Largest-remainder apportionment of `total` items to the plan's fractions.
std::map<RelationLabel, std::size_t> apportion(const std::map<RelationLabel, double>& plan, std::size_t total) {
    std::map<RelationLabel, std::size_t> counts;
    std::vector<std::pair<double, RelationLabel>> remainders;
    std::size_t assigned = 0;
    for (auto label : relation::kAllLabels) {
        auto it = plan.find(label);
        const double f = it == plan.end() ? 0.0 : it->second;
        const double exact = f * static_cast<double>(total);
        const auto base = static_cast<std::size_t>(std::floor(exact));
        counts[label] = base;
        assigned += base;
        remainders.emplace_back(exact - static_cast<double>(base), label);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    for (std::size_t r = 0; assigned < total; ++r, ++assigned) ++counts[remainders[r % remainders.size()].second];
    return counts;
}

}  // namespace

void SynthSpec::validate() const {
    if (n_stocks < 2) throw ConfigError("synth: n_stocks must be at least 2");
    if (n_days < 2) throw ConfigError("synth: n_days must be at least 2");
    if (n_clusters == 0 || n_clusters > n_stocks) throw ConfigError("synth: n_clusters must be in [1, n_stocks]");
    if (embedding_dim == 0) throw ConfigError("synth: embedding_dim must be positive");
    const std::pair<const char*, double> nonneg[] = {
        {"center_scale", center_scale}, {"embedding_noise", embedding_noise}, {"market_vol", market_vol},
        {"cluster_vol", cluster_vol},   {"idio_vol", idio_vol},               {"eta", eta},
        {"competitor_drift", competitor_drift}};
    for (const auto& [name, v] : nonneg) {
        if (!std::isfinite(v) || v < 0.0) throw ConfigError(std::string("synth: ") + name + " must be >= 0");
    }
    if (!(center_scale > 0.0 || embedding_noise > 0.0)) {
        throw ConfigError("synth: center_scale and embedding_noise cannot both be 0");
    }
    if (!(kappa >= 0.0 && kappa < 1.0)) throw ConfigError("synth: kappa must be in [0, 1)");
    if (!(spurious_fraction >= 0.0 && spurious_fraction <= 1.0)) {
        throw ConfigError("synth: spurious_fraction must be in [0, 1]");
    }
    if (initial_spread && !std::isfinite(*initial_spread)) throw ConfigError("synth: initial_spread must be finite");
    double total = 0.0;
    for (const auto& [label, f] : label_plan) {
        if (!std::isfinite(f) || f < 0.0) {
            throw ConfigError("synth: label fraction for " + std::string(relation::to_string(label)) +
                              " must be >= 0");
        }
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("synth: label fractions must sum to 1");
    if (!stock_ids.empty()) {
        if (stock_ids.size() != n_stocks) throw ConfigError("synth: stock_ids must list n_stocks ids");
        std::set<std::string> seen;
        for (const auto& id : stock_ids) {
            if (id.empty() || id.find_first_of(", \t\r\n\"") != std::string::npos) {
                throw ConfigError("synth: invalid stock id '" + id + "'");
            }
            if (!seen.insert(id).second) throw ConfigError("synth: duplicate stock id '" + id + "'");
        }
    }
}

std::map<relation::PairKey, RelationLabel> SyntheticDataset::truth_labels() const {
    std::map<relation::PairKey, RelationLabel> out;
    for (const auto& p : truth) out[relation::canonical_pair(p.a, p.b)] = p.label;
    return out;
}

SyntheticDataset generate_universe(const SynthSpec& spec) {
    spec.validate();
    const std::size_t N = spec.n_stocks;
    const std::size_t T = spec.n_days;
    const std::size_t C = spec.n_clusters;
    const std::size_t D = spec.embedding_dim;

    std::vector<std::string> ids = spec.stock_ids;
    if (ids.empty()) {
        const int width = std::max<int>(3, static_cast<int>(std::to_string(N - 1).size()));
        for (std::size_t i = 0; i < N; ++i) {
            std::string digits = std::to_string(i);
            ids.push_back("S" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits);
        }
    }

    SyntheticDataset ds;
    ds.cluster.resize(N);
    for (std::size_t i = 0; i < N; ++i) ds.cluster[i] = i * C / N;

    // Intra-cluster pairs in position order, labeled per plan on a seeded shuffle.
    std::vector<std::pair<std::size_t, std::size_t>> intra;
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = i + 1; j < N; ++j) {
            if (ds.cluster[i] == ds.cluster[j]) intra.emplace_back(i, j);
        }
    }
    auto counts = apportion(spec.label_plan, intra.size());
    bool wants_links = false;
    for (const auto& [label, f] : spec.label_plan) wants_links |= label != RelationLabel::unrelated && f > 0.0;
    if (wants_links && intra.empty()) {
        throw ConfigError("synth: label plan needs intra-cluster pairs but every cluster has a single stock");
    }
    std::vector<RelationLabel> pair_label(intra.size(), RelationLabel::unrelated);
    {
        std::vector<std::size_t> order(intra.size());
        std::iota(order.begin(), order.end(), 0);
        Gaussian g(derive_seed(spec.seed, kPlan));
        for (std::size_t k = order.size(); k > 1; --k) {
            std::swap(order[k - 1], order[g.bits() % k]);
        }
        std::size_t cursor = 0;
        for (auto label : relation::kAllLabels) {
            for (std::size_t c = 0; c < counts[label]; ++c) pair_label[order[cursor++]] = label;
        }
    }

    // Returns: market + cluster + idiosyncratic, then planted pair components.
    std::vector<double> market(T);
    {
        Gaussian g(derive_seed(spec.seed, kMarket));
        for (auto& m : market) m = spec.market_vol * g();
    }
    std::vector<std::vector<double>> cluster_factor(C, std::vector<double>(T));
    for (std::size_t c = 0; c < C; ++c) {
        Gaussian g(derive_seed(spec.seed, kCluster, c));
        for (auto& f : cluster_factor[c]) f = spec.cluster_vol * g();
    }
    std::vector<double> values(T * N);
    for (std::size_t i = 0; i < N; ++i) {
        Gaussian g(derive_seed(spec.seed, kIdio, i));
        for (std::size_t t = 0; t < T; ++t) {
            values[t * N + i] = market[t] + cluster_factor[ds.cluster[i]][t] + spec.idio_vol * g();
        }
    }

    std::vector<std::vector<std::string>> sentences(N);
    for (std::size_t p = 0; p < intra.size(); ++p) {
        const auto [i, j] = intra[p];
        PlantedPair planted{ids[i], ids[j], pair_label[p], {}};
        if (pair_label[p] != RelationLabel::unrelated) {
            Gaussian g(derive_seed(spec.seed, kPair, i * N + j));
            const bool competitor = pair_label[p] == RelationLabel::competitor;
            const double kappa = competitor ? 0.0 : spec.kappa;
            double drift = 0.0;
            if (competitor) drift = (g.bits() & 1U) ? spec.competitor_drift : -spec.competitor_drift;
            double s = 0.0;
            if (spec.initial_spread) {
                s = *spec.initial_spread;
            } else if (!competitor && kappa > 0.0) {
                s = spec.eta / std::sqrt(1.0 - (1.0 - kappa) * (1.0 - kappa)) * g();
            }
            planted.spread.resize(T);
            for (std::size_t t = 0; t < T; ++t) {
                const double next = (1.0 - kappa) * s + drift + spec.eta * g();
                const double delta = next - s;
                values[t * N + i] += 0.5 * delta;
                values[t * N + j] -= 0.5 * delta;
                s = next;
                planted.spread[t] = s;
            }
            const std::string product = product_of(ds.cluster[i]);
            sentences[i].push_back(relation_sentence(pair_label[p], product, firm_name(j)));
            sentences[j].push_back(relation_sentence(pair_label[p], product, firm_name(i)));
        }
        ds.truth.push_back(std::move(planted));
    }
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!(values[k] > -1.0)) {
            throw ConfigError("synth: generated return <= -1 for " + ids[k % N] + "; reduce volatilities");
        }
    }

    const auto dates = weekdays_from(spec.start_date, T);
    ds.returns = panel::ReturnPanel(dates, ids, std::move(values), std::vector<std::uint8_t>(T * N, 0));

    // Embeddings: one vintage replicated over every year a window can reference.
    std::vector<std::vector<double>> centers(C, std::vector<double>(D));
    for (std::size_t c = 0; c < C; ++c) {
        Gaussian g(derive_seed(spec.seed, kCenters, c));
        for (auto& x : centers[c]) x = spec.center_scale * g();
    }
    std::vector<std::vector<double>> vectors(N, std::vector<double>(D));
    for (std::size_t i = 0; i < N; ++i) {
        Gaussian g(derive_seed(spec.seed, kStockEmbedding, i));
        for (std::size_t d = 0; d < D; ++d) vectors[i][d] = centers[ds.cluster[i]][d] + spec.embedding_noise * g();
    }
    const auto n_spurious = static_cast<std::size_t>(std::floor(spec.spurious_fraction * static_cast<double>(N)));
    if (n_spurious > 0 && C > 1) {
        Gaussian g(derive_seed(spec.seed, kSpurious));
        std::vector<std::size_t> order(N);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t k = N; k > 1; --k) std::swap(order[k - 1], order[g.bits() % k]);
        const auto base = vectors;
        for (std::size_t s = 0; s < n_spurious; ++s) {
            const std::size_t i = order[s];
            std::size_t other = g.bits() % N;
            while (ds.cluster[other] == ds.cluster[i]) other = (other + 1) % N;
            const double jitter = 0.01 * std::max(spec.embedding_noise, 1e-3);
            for (std::size_t d = 0; d < D; ++d) vectors[i][d] = base[other][d] + jitter * g();
        }
    }
    panel::Vintage vintage;
    vintage.dim = D;
    for (std::size_t i = 0; i < N; ++i) vintage.vectors[ids[i]] = vectors[i];
    const int first_year = year_of(dates.front()) - 1;
    const int last_year = year_of(dates.back());
    for (int y = first_year; y <= last_year; ++y) ds.embeddings.vintages[y] = vintage;

    std::vector<panel::MembershipInterval> members;
    for (const auto& id : ids) members.push_back({id, dates.front(), dates.back()});
    ds.membership = panel::MembershipTable(std::move(members));

    for (std::size_t i = 0; i < N; ++i) {
        const std::size_t c = ds.cluster[i];
        const std::size_t prefix = 10 + c % 90;
        const std::size_t suffix = (c / 90 * 10 + i % 10) % 100;
        std::string code = std::to_string(prefix * 100 + suffix);
        ds.industry_codes[ids[i]] = code;
        ds.names[ids[i]] = firm_name(i);
        for (int y = first_year; y <= last_year; ++y) {
            ds.filings[y][ids[i]] = filing_text(firm_name(i), c, y, sentences[i]);
        }
    }
    return ds;
}

std::unique_ptr<relation::FixtureClassifier> oracle_classifier(const SyntheticDataset& dataset) {
    return std::make_unique<relation::FixtureClassifier>(dataset.truth_labels(), relation::LabelSource::oracle);
}

SynthSpec spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("synth spec must be a JSON object");
    SynthSpec s;
    static const std::set<std::string> known = {
        "n_stocks",   "n_days",    "n_clusters",     "embedding_dim",    "center_scale", "embedding_noise",
        "spurious_fraction", "market_vol", "cluster_vol", "idio_vol", "kappa", "eta", "initial_spread",
        "competitor_drift", "label_plan", "start_date", "seed", "stock_ids"};
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) throw ConfigError("synth spec: unknown key '" + key + "'");
    }
    try {
        auto get_size = [&](const char* key, std::size_t& out) {
            if (j.contains(key)) out = j.at(key).get<std::size_t>();
        };
        auto get_double = [&](const char* key, double& out) {
            if (j.contains(key)) out = j.at(key).get<double>();
        };
        get_size("n_stocks", s.n_stocks);
        get_size("n_days", s.n_days);
        get_size("n_clusters", s.n_clusters);
        get_size("embedding_dim", s.embedding_dim);
        get_double("center_scale", s.center_scale);
        get_double("embedding_noise", s.embedding_noise);
        get_double("spurious_fraction", s.spurious_fraction);
        get_double("market_vol", s.market_vol);
        get_double("cluster_vol", s.cluster_vol);
        get_double("idio_vol", s.idio_vol);
        get_double("kappa", s.kappa);
        get_double("eta", s.eta);
        get_double("competitor_drift", s.competitor_drift);
        if (j.contains("initial_spread") && !j.at("initial_spread").is_null()) {
            s.initial_spread = j.at("initial_spread").get<double>();
        }
        if (j.contains("label_plan")) {
            s.label_plan.clear();
            for (const auto& [key, value] : j.at("label_plan").items()) {
                auto label = relation::parse_label(key);
                if (!label) throw ConfigError("synth spec: unknown label '" + key + "' in label_plan");
                s.label_plan[*label] = value.get<double>();
            }
        }
        if (j.contains("start_date")) s.start_date = parse_date(j.at("start_date").get<std::string>());
        if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("stock_ids")) s.stock_ids = j.at("stock_ids").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("synth spec: ") + e.what());
    }
    s.validate();
    return s;
}

nlohmann::json spec_to_json(const SynthSpec& s) {
    nlohmann::json plan = nlohmann::json::object();
    for (const auto& [label, f] : s.label_plan) plan[std::string(relation::to_string(label))] = f;
    nlohmann::json j = {
        {"n_stocks", s.n_stocks},
        {"n_days", s.n_days},
        {"n_clusters", s.n_clusters},
        {"embedding_dim", s.embedding_dim},
        {"center_scale", s.center_scale},
        {"embedding_noise", s.embedding_noise},
        {"spurious_fraction", s.spurious_fraction},
        {"market_vol", s.market_vol},
        {"cluster_vol", s.cluster_vol},
        {"idio_vol", s.idio_vol},
        {"kappa", s.kappa},
        {"eta", s.eta},
        {"initial_spread", s.initial_spread ? nlohmann::json(*s.initial_spread) : nlohmann::json(nullptr)},
        {"competitor_drift", s.competitor_drift},
        {"label_plan", plan},
        {"start_date", format_date(s.start_date)},
        {"seed", s.seed},
    };
    if (!s.stock_ids.empty()) j["stock_ids"] = s.stock_ids;
    return j;
}

void write_dataset(const SyntheticDataset& ds, const SynthSpec& spec, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::map<std::string, std::string> files;  // relative path -> contents
    files["returns.csv"] = panel::returns_to_csv(ds.returns);
    files["membership.csv"] = panel::membership_to_csv(ds.membership);
    for (const auto& [year, vintage] : ds.embeddings.vintages) {
        files["embeddings/" + std::to_string(year) + ".csv"] = panel::vintage_to_csv(vintage);
    }
    std::string sic = "stock,sic\n";
    for (const auto& id : ds.returns.stocks()) sic += id + "," + ds.industry_codes.at(id) + "\n";
    files["sic.csv"] = sic;
    std::string names = "stock,name\n";
    for (const auto& id : ds.returns.stocks()) names += id + "," + ds.names.at(id) + "\n";
    files["filings/names.csv"] = names;
    for (const auto& [year, by_stock] : ds.filings) {
        for (const auto& [stock, text] : by_stock) {
            files["filings/" + std::to_string(year) + "/" + stock + ".txt"] = text;
        }
    }
    std::string truth = "stock_i,stock_j,label\n";
    for (const auto& p : ds.truth) truth += p.a + "," + p.b + "," + std::string(relation::to_string(p.label)) + "\n";
    files["truth.csv"] = truth;

    nlohmann::json config = {
        {"data",
         {{"returns", "returns.csv"},
          {"membership", "membership.csv"},
          {"embeddings", "embeddings"},
          {"filings", "filings"},
          {"industry_codes", "sic.csv"}}},
        {"backtest", {{"seed", spec.seed}}},
        {"relation", {{"cache", "cache/classifications.jsonl"}}},
        {"classifier", {{"kind", "oracle"}, {"fixture", "truth.csv"}}},
        {"output", "results"},
    };
    files["config.json"] = config.dump(2) + "\n";

    nlohmann::json checksums = nlohmann::json::object();
    for (const auto& [rel, contents] : files) checksums[rel] = sha256_hex(contents);
    nlohmann::json manifest = {{"seed", spec.seed}, {"spec", spec_to_json(spec)}, {"files", checksums}};
    files["manifest.json"] = manifest.dump(2) + "\n";

    try {
        fs::create_directories(dir);
    } catch (const fs::filesystem_error& e) {
        throw LoadError("cannot create " + dir.string() + ": " + e.what());
    }
    for (const auto& [rel, contents] : files) {
        const fs::path target = dir / rel;
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
        if (ec) throw LoadError("cannot create " + target.parent_path().string() + ": " + ec.message());
        write_file(target, contents);
    }
}

}  // namespace relnet::synth
