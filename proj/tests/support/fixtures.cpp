#include "fixtures.hpp"

#include <atomic>
#include <unistd.h>

namespace fixture {

using namespace std::chrono;

relnet::Date ymd(int y, unsigned m, unsigned d) { return relnet::Date{year{y}, month{m}, day{d}}; }

std::vector<relnet::Date> weekdays(relnet::Date start, std::size_t n) {
    std::vector<relnet::Date> out;
    sys_days d{start};
    while (out.size() < n) {
        weekday wd{d};
        if (wd != Saturday && wd != Sunday) out.emplace_back(d);
        d += days{1};
    }
    return out;
}

relnet::panel::ReturnPanel make_panel(const std::vector<relnet::Date>& dates, const std::vector<std::string>& ids,
                                      const std::vector<std::vector<double>>& rows) {
    std::vector<double> values;
    for (const auto& row : rows) values.insert(values.end(), row.begin(), row.end());
    return relnet::panel::ReturnPanel(dates, ids, values, std::vector<std::uint8_t>(values.size(), 0));
}

relnet::panel::MembershipTable full_membership(const std::vector<std::string>& ids, relnet::Date start,
                                               relnet::Date end) {
    std::vector<relnet::panel::MembershipInterval> entries;
    for (const auto& id : ids) entries.push_back({id, start, end});
    return relnet::panel::MembershipTable(entries);
}

relnet::panel::EmbeddingSet replicated(const std::map<std::string, std::vector<double>>& vectors, int first,
                                       int last) {
    relnet::panel::EmbeddingSet set;
    relnet::panel::Vintage v;
    v.dim = vectors.begin()->second.size();
    v.vectors = vectors;
    for (int y = first; y <= last; ++y) set.vintages[y] = v;
    return set;
}

std::vector<std::string> ids(std::size_t n, const std::string& prefix) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::string digits = std::to_string(i);
        out.push_back(prefix + std::string(digits.size() < 3 ? 3 - digits.size() : 0, '0') + digits);
    }
    return out;
}

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n, double sd) {
    std::normal_distribution<double> dist(0.0, sd);
    std::vector<double> out(n);
    for (auto& x : out) x = dist(rng);
    return out;
}

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("relnet-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace fixture
