#include "relnet/panel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace relnet::panel {
namespace {

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    for (auto line : split(text, '\n')) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) continue;
        out.push_back(line);
    }
    return out;
}

}  // namespace

ReturnPanel::ReturnPanel(std::vector<Date> dates, std::vector<std::string> stocks,
                         std::vector<double> values, std::vector<std::uint8_t> missing)
    : dates_(std::move(dates)),
      stocks_(std::move(stocks)),
      values_(std::move(values)),
      missing_(std::move(missing)) {
    const std::size_t cells = dates_.size() * stocks_.size();
    if (values_.size() != cells || missing_.size() != cells) {
        throw DataError("return panel dimensions do not match dates x stocks");
    }
    for (std::size_t t = 1; t < dates_.size(); ++t) {
        if (!(dates_[t - 1] < dates_[t])) throw DataError("panel dates must be strictly increasing");
    }
    for (std::size_t i = 0; i < stocks_.size(); ++i) {
        if (!stock_lookup_.emplace(stocks_[i], i).second) {
            throw DataError("duplicate stock id '" + stocks_[i] + "'");
        }
    }
    for (std::size_t t = 0; t < dates_.size(); ++t) {
        for (std::size_t i = 0; i < stocks_.size(); ++i) {
            const std::size_t k = t * stocks_.size() + i;
            if (missing_[k]) {
                values_[k] = 0.0;
            } else if (!(values_[k] > -1.0) || !std::isfinite(values_[k])) {
                throw DataError("return <= -1 at (" + format_date(dates_[t]) + "," + stocks_[i] + ")");
            }
        }
    }
}

std::size_t ReturnPanel::missing_count() const {
    return static_cast<std::size_t>(std::count(missing_.begin(), missing_.end(), std::uint8_t{1}));
}

std::optional<std::size_t> ReturnPanel::date_index(const Date& date) const {
    auto it = std::lower_bound(dates_.begin(), dates_.end(), date);
    if (it == dates_.end() || *it != date) return std::nullopt;
    return static_cast<std::size_t>(it - dates_.begin());
}

std::optional<std::size_t> ReturnPanel::stock_index(const std::string& id) const {
    auto it = stock_lookup_.find(id);
    if (it == stock_lookup_.end()) return std::nullopt;
    return it->second;
}

ReturnPanel parse_returns(std::string_view csv) {
    auto lines = lines_of(csv);
    if (lines.empty()) throw LoadError("returns file is empty");
    auto header = split(lines[0], ',');
    if (header.size() < 2) throw LoadError("returns header must name at least one stock");
    std::vector<std::string> stocks;
    for (std::size_t c = 1; c < header.size(); ++c) {
        auto id = trim(header[c]);
        if (id.empty()) throw LoadError("empty stock id in returns header column " + std::to_string(c));
        stocks.emplace_back(id);
    }
    {
        std::set<std::string> seen;
        for (const auto& s : stocks) {
            if (!seen.insert(s).second) throw LoadError("duplicate stock id '" + s + "' in returns header");
        }
    }

    struct Row {
        Date date;
        std::vector<double> values;
        std::vector<std::uint8_t> missing;
    };
    std::vector<Row> rows;
    rows.reserve(lines.size() - 1);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        auto cells = split(lines[r], ',');
        const std::string where = "row " + std::to_string(r + 1);
        if (cells.size() != header.size()) {
            throw LoadError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(cells.size()));
        }
        Row row;
        try {
            row.date = parse_date(cells[0]);
        } catch (const Error& e) {
            throw LoadError(where + ": " + e.what());
        }
        row.values.resize(stocks.size(), 0.0);
        row.missing.resize(stocks.size(), 0);
        for (std::size_t c = 0; c < stocks.size(); ++c) {
            auto cell = trim(cells[c + 1]);
            if (cell.empty()) {
                row.missing[c] = 1;
                continue;
            }
            double v = 0.0;
            if (!parse_double(cell, v) || !std::isfinite(v)) {
                throw LoadError("non-numeric cell '" + std::string(cell) + "' at (" +
                                format_date(row.date) + "," + stocks[c] + ")");
            }
            if (v <= -1.0) {
                throw LoadError("return <= -1 at (" + format_date(row.date) + "," + stocks[c] + ")");
            }
            row.values[c] = v;
        }
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].date == rows[r - 1].date) {
            throw LoadError("duplicate date " + format_date(rows[r].date));
        }
    }

    std::vector<Date> dates;
    std::vector<double> values;
    std::vector<std::uint8_t> missing;
    dates.reserve(rows.size());
    values.reserve(rows.size() * stocks.size());
    missing.reserve(rows.size() * stocks.size());
    for (auto& row : rows) {
        dates.push_back(row.date);
        values.insert(values.end(), row.values.begin(), row.values.end());
        missing.insert(missing.end(), row.missing.begin(), row.missing.end());
    }
    return ReturnPanel(std::move(dates), std::move(stocks), std::move(values), std::move(missing));
}

ReturnPanel load_returns(const std::filesystem::path& path) {
    try {
        return parse_returns(read_file(path));
    } catch (const LoadError& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

std::string returns_to_csv(const ReturnPanel& panel) {
    std::string out = "date";
    for (const auto& s : panel.stocks()) {
        out += ',';
        out += s;
    }
    out += '\n';
    for (std::size_t t = 0; t < panel.n_dates(); ++t) {
        out += format_date(panel.dates()[t]);
        for (std::size_t i = 0; i < panel.n_stocks(); ++i) {
            out += ',';
            if (!panel.missing(t, i)) out += format_double(panel.at(t, i));
        }
        out += '\n';
    }
    return out;
}

MembershipTable::MembershipTable(std::vector<MembershipInterval> entries) : entries_(std::move(entries)) {
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        const auto& e = entries_[k];
        if (e.end < e.start) {
            throw LoadError("membership interval for " + e.stock + " has start after end");
        }
        by_stock_[e.stock].push_back(k);
    }
    for (auto& [stock, idx] : by_stock_) {
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return entries_[a].start < entries_[b].start; });
        for (std::size_t k = 1; k < idx.size(); ++k) {
            if (!(entries_[idx[k - 1]].end < entries_[idx[k]].start)) {
                throw LoadError("overlapping membership intervals for " + stock);
            }
        }
    }
}

bool MembershipTable::is_member(const std::string& stock, const Date& date) const {
    auto it = by_stock_.find(stock);
    if (it == by_stock_.end()) return false;
    for (auto k : it->second) {
        const auto& e = entries_[k];
        if (!(date < e.start) && !(e.end < date)) return true;
    }
    return false;
}

MembershipTable parse_membership(std::string_view csv) {
    std::vector<MembershipInterval> entries;
    auto lines = lines_of(csv);
    for (std::size_t r = 0; r < lines.size(); ++r) {
        auto cells = split(lines[r], ',');
        if (cells.size() != 3) throw LoadError("membership row " + std::to_string(r + 1) + ": expected 3 fields");
        if (r == 0 && trim(cells[0]) == "stock") continue;
        try {
            entries.push_back({std::string(trim(cells[0])), parse_date(cells[1]), parse_date(cells[2])});
        } catch (const LoadError&) {
            throw;
        } catch (const Error& e) {
            throw LoadError("membership row " + std::to_string(r + 1) + ": " + e.what());
        }
    }
    return MembershipTable(std::move(entries));
}

MembershipTable load_membership(const std::filesystem::path& path) {
    try {
        return parse_membership(read_file(path));
    } catch (const LoadError& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

std::string membership_to_csv(const MembershipTable& table) {
    std::string out = "stock,start,end\n";
    for (const auto& e : table.entries()) {
        out += e.stock + "," + format_date(e.start) + "," + format_date(e.end) + "\n";
    }
    return out;
}

const Vintage* EmbeddingSet::find(int year) const {
    auto it = vintages.find(year);
    return it == vintages.end() ? nullptr : &it->second;
}

Vintage parse_vintage(std::string_view csv, const std::string& source, std::size_t& dropped) {
    Vintage vintage;
    auto lines = lines_of(csv);
    for (std::size_t r = 0; r < lines.size(); ++r) {
        auto cells = split(lines[r], ',');
        const std::string where = source + " row " + std::to_string(r + 1);
        if (cells.size() < 2) throw LoadError(where + ": expected stock id and at least one component");
        std::vector<double> v;
        v.reserve(cells.size() - 1);
        bool numeric = true;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            double x = 0.0;
            if (!parse_double(cells[c], x) || !std::isfinite(x)) {
                numeric = false;
                break;
            }
            v.push_back(x);
        }
        if (!numeric) {
            if (r == 0) continue;  // header
            throw LoadError(where + ": non-numeric embedding component");
        }
        if (vintage.dim == 0) {
            vintage.dim = v.size();
        } else if (v.size() != vintage.dim) {
            throw LoadError(where + ": dimension " + std::to_string(v.size()) + " differs from " +
                            std::to_string(vintage.dim));
        }
        const double norm2 = std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
        if (norm2 == 0.0) {
            ++dropped;
            continue;
        }
        std::string id(trim(cells[0]));
        if (!vintage.vectors.emplace(id, std::move(v)).second) {
            throw LoadError(where + ": duplicate stock '" + id + "'");
        }
    }
    return vintage;
}

EmbeddingSet load_embeddings(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw LoadError("embedding directory not found: " + dir.string());
    EmbeddingSet set;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        const std::string stem = file.stem().string();
        int year = 0;
        double y = 0.0;
        if (!parse_double(stem, y) || y != static_cast<int>(y)) {
            throw LoadError("embedding file name is not a year: " + file.string());
        }
        year = static_cast<int>(y);
        set.vintages.emplace(year, parse_vintage(read_file(file), file.string(), set.zero_norm_dropped));
    }
    if (set.vintages.empty()) throw LoadError("no embedding vintages in " + dir.string());
    return set;
}

std::string vintage_to_csv(const Vintage& vintage) {
    std::string out = "stock";
    for (std::size_t d = 0; d < vintage.dim; ++d) out += ",v" + std::to_string(d + 1);
    out += '\n';
    for (const auto& [id, v] : vintage.vectors) {
        out += id;
        for (double x : v) {
            out += ',';
            out += format_double(x);
        }
        out += '\n';
    }
    return out;
}

int vintage_for(const WindowSpec& window) { return year_of(window.t0) - 1; }

UniverseSlice slice_universe(const ReturnPanel& panel, const MembershipTable& members,
                             const EmbeddingSet& embeddings, const WindowSpec& window,
                             std::size_t groups) {
    auto i0 = panel.date_index(window.t0);
    auto i1 = panel.date_index(window.t1);
    auto i2 = panel.date_index(window.t2);
    if (!i0 || !i1 || !i2) throw DataError("window dates are not on the panel calendar");
    if (!(*i0 < *i1 && *i1 < *i2)) throw DataError("window dates out of order");
    if (*i1 - *i0 + 1 != window.train_len || *i2 - *i1 != window.test_len) {
        throw DataError("window lengths do not match the panel calendar");
    }

    UniverseSlice slice;
    slice.window = window;
    slice.vintage = vintage_for(window);
    const Vintage* vintage = embeddings.find(slice.vintage);

    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < panel.n_stocks(); ++i) {
        const auto& id = panel.stocks()[i];
        if (!members.is_member(id, window.t0)) continue;
        if (vintage == nullptr || !vintage->vectors.contains(id)) continue;
        bool complete = true;
        for (std::size_t t = *i0; t <= *i1 && complete; ++t) complete = !panel.missing(t, i);
        if (complete) cols.push_back(i);
    }
    std::sort(cols.begin(), cols.end(),
              [&](std::size_t a, std::size_t b) { return panel.stocks()[a] < panel.stocks()[b]; });
    if (cols.size() < 2 * groups) {
        throw DataError("universe too small for G groups: " + std::to_string(cols.size()) +
                        " eligible, need " + std::to_string(2 * groups));
    }

    const std::size_t rows = *i2 - *i0 + 1;
    std::vector<Date> dates(panel.dates().begin() + static_cast<std::ptrdiff_t>(*i0),
                            panel.dates().begin() + static_cast<std::ptrdiff_t>(*i2 + 1));
    std::vector<double> values(rows * cols.size(), 0.0);
    std::vector<std::uint8_t> missing(rows * cols.size(), 0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const std::size_t t = *i0 + r;
            if (panel.missing(t, cols[c])) {
                ++slice.filled_cells;
            } else {
                values[r * cols.size() + c] = panel.at(t, cols[c]);
            }
        }
    }
    for (auto c : cols) slice.eligible.push_back(panel.stocks()[c]);
    slice.returns = ReturnPanel(std::move(dates), slice.eligible, std::move(values), std::move(missing));
    return slice;
}

}  // namespace relnet::panel
