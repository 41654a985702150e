#pragma once

#include "relnet/common.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace relnet::metrics {

inline constexpr double kTradingDaysPerYear = 252.0;

struct AnnualizedStats {
    double r_ann = 0.0;
    double sigma_ann = 0.0;
    double sharpe = 0.0;
};

/// Arithmetic annualization: mean x 252, stdev(n-1) x sqrt(252), zero risk-free rate.
AnnualizedStats annualized_stats(std::span<const double> daily);

/// min_t (C_t / max_{s<=t} C_s - 1) over the compounded curve C_t = prod(1 + r).
double max_drawdown(std::span<const double> daily);

/// floor(4 (T/100)^(2/9)).
std::size_t newey_west_lag(std::size_t n_obs);

/// Bartlett-kernel long-run variance. Autocovariances use the T-1 denominator,
/// so lag 0 reproduces the sample variance.
double long_run_variance(std::span<const double> x, std::size_t lag);

double newey_west_tstat(std::span<const double> daily, std::optional<std::size_t> lag = std::nullopt);

/// mean / (s / sqrt(T)).
double iid_tstat(std::span<const double> daily);

struct PerfReport {
    double r_ann = 0.0;
    double sigma_ann = 0.0;
    double sharpe = 0.0;
    double mdd = 0.0;
    double to_ann = 0.0;
    double t_nw = 0.0;
    std::size_t nw_lag = 0;
    std::size_t n_days = 0;
};

PerfReport performance_report(std::span<const double> daily, double to_ann,
                              std::optional<std::size_t> lag = std::nullopt);

struct FactorRegressionResult {
    double alpha = 0.0;
    std::vector<std::string> factors;
    std::vector<double> betas;
    double t_alpha = 0.0;
    std::vector<double> t_betas;
    double r_squared = 0.0;
    std::size_t n_obs = 0;
    std::size_t nw_lag = 0;
    std::vector<double> residuals;
};

/// OLS of y on an intercept plus the factor columns, with Bartlett-kernel HAC
/// t-statistics using the same automatic lag as newey_west_tstat.
FactorRegressionResult factor_regression(std::span<const double> y, const std::vector<std::vector<double>>& factors,
                                         std::vector<std::string> names = {},
                                         std::optional<std::size_t> lag = std::nullopt);

struct FactorTable {
    std::vector<Date> dates;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;  // one per factor
};

/// `factors.csv`: date, then one column per factor (decimal returns).
FactorTable load_factors(const std::filesystem::path& path);
FactorTable parse_factors(std::string_view csv);

}  // namespace relnet::metrics
