#pragma once

#include "relnet/common.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace relnet {

/// One rolling window: training [t0, t1], test (t1, t2], all trading dates.
struct WindowSpec {
    std::size_t index = 0;
    Date t0{};
    Date t1{};
    Date t2{};
    std::size_t train_len = 0;
    std::size_t test_len = 0;

    bool operator==(const WindowSpec&) const = default;
};

namespace panel {

/// Dates x stocks matrix of daily simple returns. Missing cells hold 0.0 and
/// are flagged in the mask.
class ReturnPanel {
public:
    ReturnPanel() = default;
    ReturnPanel(std::vector<Date> dates, std::vector<std::string> stocks,
                std::vector<double> values, std::vector<std::uint8_t> missing);

    const std::vector<Date>& dates() const { return dates_; }
    const std::vector<std::string>& stocks() const { return stocks_; }
    std::size_t n_dates() const { return dates_.size(); }
    std::size_t n_stocks() const { return stocks_.size(); }

    double at(std::size_t t, std::size_t i) const { return values_[t * stocks_.size() + i]; }
    bool missing(std::size_t t, std::size_t i) const { return missing_[t * stocks_.size() + i] != 0; }
    std::size_t missing_count() const;

    std::optional<std::size_t> date_index(const Date& date) const;
    std::optional<std::size_t> stock_index(const std::string& id) const;

    const std::vector<double>& values() const { return values_; }
    const std::vector<std::uint8_t>& missing_mask() const { return missing_; }

    bool operator==(const ReturnPanel&) const = default;

private:
    std::vector<Date> dates_;
    std::vector<std::string> stocks_;
    std::vector<double> values_;
    std::vector<std::uint8_t> missing_;
    std::map<std::string, std::size_t> stock_lookup_;
};

ReturnPanel load_returns(const std::filesystem::path& path);
ReturnPanel parse_returns(std::string_view csv);
std::string returns_to_csv(const ReturnPanel& panel);

struct MembershipInterval {
    std::string stock;
    Date start{};
    Date end{};
};

class MembershipTable {
public:
    MembershipTable() = default;
    explicit MembershipTable(std::vector<MembershipInterval> entries);

    bool is_member(const std::string& stock, const Date& date) const;
    const std::vector<MembershipInterval>& entries() const { return entries_; }

private:
    std::vector<MembershipInterval> entries_;
    std::map<std::string, std::vector<std::size_t>> by_stock_;
};

MembershipTable load_membership(const std::filesystem::path& path);
MembershipTable parse_membership(std::string_view csv);
std::string membership_to_csv(const MembershipTable& table);

struct Vintage {
    std::size_t dim = 0;
    std::map<std::string, std::vector<double>> vectors;
};

class EmbeddingSet {
public:
    std::map<int, Vintage> vintages;
    std::size_t zero_norm_dropped = 0;

    const Vintage* find(int year) const;
};

/// Reads `<dir>/<year>.csv`; each row is `stock,v1,...,vD` with an optional header.
EmbeddingSet load_embeddings(const std::filesystem::path& dir);
/// Parses one vintage file; zero-norm rows are dropped and counted in `dropped`.
Vintage parse_vintage(std::string_view csv, const std::string& source, std::size_t& dropped);
std::string vintage_to_csv(const Vintage& vintage);

struct UniverseSlice {
    WindowSpec window;
    int vintage = 0;
    std::vector<std::string> eligible;  // ascending id order
    ReturnPanel returns;                // window dates x eligible, test gaps zero-filled
    std::size_t filled_cells = 0;
};

/// Embedding vintage used for a window: calendar year of its training start minus one.
int vintage_for(const WindowSpec& window);

UniverseSlice slice_universe(const ReturnPanel& panel, const MembershipTable& members,
                             const EmbeddingSet& embeddings, const WindowSpec& window,
                             std::size_t groups);

}  // namespace panel
}  // namespace relnet
