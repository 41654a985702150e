#pragma once

#include "relnet/panel.hpp"

#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace fixture {

std::vector<relnet::Date> weekdays(relnet::Date start, std::size_t n);
relnet::Date ymd(int y, unsigned m, unsigned d);

/// rows[t][i]; no missing cells.
relnet::panel::ReturnPanel make_panel(const std::vector<relnet::Date>& dates, const std::vector<std::string>& ids,
                                      const std::vector<std::vector<double>>& rows);

relnet::panel::MembershipTable full_membership(const std::vector<std::string>& ids, relnet::Date start,
                                               relnet::Date end);

/// The same vectors registered for every year in [first, last].
relnet::panel::EmbeddingSet replicated(const std::map<std::string, std::vector<double>>& vectors, int first,
                                       int last);

std::vector<std::string> ids(std::size_t n, const std::string& prefix = "S");

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n, double sd = 1.0);

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

}  // namespace fixture
