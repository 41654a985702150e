#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relnet {

using Date = std::chrono::year_month_day;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or domain-violating input files.
class LoadError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numerical precondition violated inside a computation.
class DataError : public Error {
public:
    using Error::Error;
};

Date parse_date(std::string_view text);
std::string format_date(const Date& date);
inline int year_of(const Date& date) { return static_cast<int>(date.year()); }

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);
bool parse_double(std::string_view text, double& out);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view line, char sep);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// SplitMix64 finalizer; used to derive independent substream seeds.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t sub);

std::string sha256_hex(std::string_view data);

}  // namespace relnet
