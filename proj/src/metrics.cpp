#include "relnet/metrics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace relnet::metrics {
namespace {

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Rounding in the mean would otherwise leave a tiny spurious dispersion.
bool is_constant(std::span<const double> x) {
    return std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end();
}

double sample_variance(std::span<const double> x) {
    if (is_constant(x)) return 0.0;
    const double m = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

}  // namespace

AnnualizedStats annualized_stats(std::span<const double> daily) {
    if (daily.size() < 2) throw DataError("annualized_stats: need at least two returns");
    AnnualizedStats s;
    s.r_ann = mean_of(daily) * kTradingDaysPerYear;
    s.sigma_ann = std::sqrt(sample_variance(daily)) * std::sqrt(kTradingDaysPerYear);
    if (!(s.sigma_ann > 0.0)) throw DataError("annualized_stats: zero volatility, Sharpe ratio undefined");
    s.sharpe = s.r_ann / s.sigma_ann;
    return s;
}

double max_drawdown(std::span<const double> daily) {
    if (daily.empty()) throw DataError("max_drawdown: empty series");
    double level = 1.0;
    double peak = 1.0;
    double mdd = 0.0;
    for (double r : daily) {
        level *= 1.0 + r;
        peak = std::max(peak, level);
        mdd = std::min(mdd, level / peak - 1.0);
    }
    return mdd;
}

std::size_t newey_west_lag(std::size_t n_obs) {
    return static_cast<std::size_t>(std::floor(4.0 * std::pow(static_cast<double>(n_obs) / 100.0, 2.0 / 9.0)));
}

double long_run_variance(std::span<const double> x, std::size_t lag) {
    const std::size_t n = x.size();
    if (n < 2) throw DataError("long_run_variance: need at least two observations");
    if (is_constant(x)) return 0.0;
    const double m = mean_of(x);
    std::vector<double> dev(n);
    for (std::size_t t = 0; t < n; ++t) dev[t] = x[t] - m;
    const double denom = static_cast<double>(n - 1);
    auto gamma = [&](std::size_t l) {
        double acc = 0.0;
        for (std::size_t t = l; t < n; ++t) acc += dev[t] * dev[t - l];
        return acc / denom;
    };
    double lrv = gamma(0);
    const std::size_t max_lag = std::min(lag, n - 1);
    for (std::size_t l = 1; l <= max_lag; ++l) {
        const double w = 1.0 - static_cast<double>(l) / static_cast<double>(lag + 1);
        lrv += 2.0 * w * gamma(l);
    }
    return lrv;
}

double newey_west_tstat(std::span<const double> daily, std::optional<std::size_t> lag) {
    if (daily.size() < 10) throw DataError("newey_west_tstat: need at least 10 observations");
    const std::size_t L = lag.value_or(newey_west_lag(daily.size()));
    const double lrv = long_run_variance(daily, L);
    if (!(lrv > 0.0)) throw DataError("newey_west_tstat: non-positive long-run variance");
    return mean_of(daily) / std::sqrt(lrv / static_cast<double>(daily.size()));
}

double iid_tstat(std::span<const double> daily) {
    if (daily.size() < 2) throw DataError("iid_tstat: need at least two observations");
    const double s = std::sqrt(sample_variance(daily));
    if (!(s > 0.0)) throw DataError("iid_tstat: zero variance");
    return mean_of(daily) / (s / std::sqrt(static_cast<double>(daily.size())));
}

PerfReport performance_report(std::span<const double> daily, double to_ann, std::optional<std::size_t> lag) {
    PerfReport r;
    const auto stats = annualized_stats(daily);
    r.r_ann = stats.r_ann;
    r.sigma_ann = stats.sigma_ann;
    r.sharpe = stats.sharpe;
    r.mdd = max_drawdown(daily);
    r.to_ann = to_ann;
    r.nw_lag = lag.value_or(newey_west_lag(daily.size()));
    r.t_nw = newey_west_tstat(daily, r.nw_lag);
    r.n_days = daily.size();
    return r;
}

FactorRegressionResult factor_regression(std::span<const double> y, const std::vector<std::vector<double>>& factors,
                                         std::vector<std::string> names, std::optional<std::size_t> lag) {
    const std::size_t n = y.size();
    const std::size_t p = factors.size() + 1;
    for (const auto& f : factors) {
        if (f.size() != n) throw DataError("factor_regression: factor length differs from the return series");
    }
    if (n <= p) throw DataError("factor_regression: not enough observations");
    if (names.empty()) {
        for (std::size_t k = 0; k < factors.size(); ++k) names.push_back("f" + std::to_string(k + 1));
    }
    if (names.size() != factors.size()) throw DataError("factor_regression: one name per factor required");

    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    Eigen::VectorXd Y(static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < n; ++t) {
        const auto r = static_cast<Eigen::Index>(t);
        X(r, 0) = 1.0;
        for (std::size_t k = 0; k < factors.size(); ++k) X(r, static_cast<Eigen::Index>(k + 1)) = factors[k][t];
        Y(r) = y[t];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < static_cast<Eigen::Index>(p)) throw DataError("factor_regression: design matrix is rank deficient");
    const Eigen::VectorXd beta = qr.solve(Y);
    const Eigen::VectorXd u = Y - X * beta;

    const std::size_t L = lag.value_or(newey_west_lag(n));
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    Eigen::MatrixXd scores(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t t = 0; t < n; ++t) {
        const auto r = static_cast<Eigen::Index>(t);
        scores.row(r) = X.row(r) * u(r);
    }
    meat += scores.transpose() * scores;
    for (std::size_t l = 1; l <= std::min(L, n - 1); ++l) {
        const double w = 1.0 - static_cast<double>(l) / static_cast<double>(L + 1);
        const auto len = static_cast<Eigen::Index>(n - l);
        const Eigen::MatrixXd g = scores.bottomRows(len).transpose() * scores.topRows(len);
        meat += w * (g + g.transpose());
    }
    const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
    const Eigen::MatrixXd cov =
        (static_cast<double>(n) / static_cast<double>(n - p)) * bread * meat * bread;

    FactorRegressionResult out;
    out.factors = std::move(names);
    out.alpha = beta(0);
    out.t_alpha = beta(0) / std::sqrt(cov(0, 0));
    for (std::size_t k = 1; k < p; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        out.betas.push_back(beta(i));
        out.t_betas.push_back(beta(i) / std::sqrt(cov(i, i)));
    }
    const double ybar = Y.mean();
    const double sst = (Y.array() - ybar).square().sum();
    const double ssr = u.squaredNorm();
    out.r_squared = sst > 0.0 ? 1.0 - ssr / sst : (ssr == 0.0 ? 1.0 : 0.0);
    out.n_obs = n;
    out.nw_lag = L;
    out.residuals.assign(u.data(), u.data() + u.size());
    return out;
}

FactorTable parse_factors(std::string_view csv) {
    FactorTable table;
    std::size_t row = 0;
    for (auto line : split(csv, '\n')) {
        ++row;
        line = trim(line);
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (table.names.empty()) {
            if (cells.size() < 2) throw LoadError("factors header needs at least one factor column");
            for (std::size_t c = 1; c < cells.size(); ++c) table.names.emplace_back(trim(cells[c]));
            table.columns.resize(table.names.size());
            continue;
        }
        if (cells.size() != table.names.size() + 1) {
            throw LoadError("factors row " + std::to_string(row) + ": wrong field count");
        }
        const Date d = parse_date(cells[0]);
        if (!table.dates.empty() && !(table.dates.back() < d)) {
            throw LoadError("factors row " + std::to_string(row) + ": dates must be strictly increasing");
        }
        table.dates.push_back(d);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            double v = 0.0;
            if (!parse_double(cells[c], v)) {
                throw LoadError("factors row " + std::to_string(row) + ": non-numeric value");
            }
            table.columns[c - 1].push_back(v);
        }
    }
    if (table.names.empty()) throw LoadError("factors file is empty");
    return table;
}

FactorTable load_factors(const std::filesystem::path& path) { return parse_factors(read_file(path)); }

}  // namespace relnet::metrics
