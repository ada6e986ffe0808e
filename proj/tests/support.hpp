#pragma once

// Fixture builders and brute-force oracles shared by the test binaries.
// The oracles deliberately take different algebraic routes from the library.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "trendfolio/csv.hpp"
#include "trendfolio/market_data.hpp"
#include "trendfolio/synthetic.hpp"

namespace tf_test {

using trendfolio::AlignedPanel;
using trendfolio::AssetClass;
using trendfolio::AssetMeta;
using trendfolio::Date;
using trendfolio::PriceSeries;

inline std::vector<Date> weekdays(Date first, std::size_t n) {
    std::vector<Date> out;
    for (Date d = first; out.size() < n; d = d + 1)
        if (d.is_weekday())
            out.push_back(d);
    return out;
}

inline PriceSeries series(const std::string& id, const std::vector<Date>& dates, const std::vector<double>& px,
                          std::size_t offset = 0) {
    PriceSeries s{id, {}};
    for (std::size_t i = 0; i < px.size(); ++i)
        s.observations.push_back({dates[offset + i], px[i]});
    return s;
}

inline AssetMeta meta(const std::string& id, const std::string& bench, AssetClass c = AssetClass::Equity) {
    AssetMeta m;
    m.id = id;
    m.asset_class = c;
    m.benchmark_id = bench;
    return m;
}

/// Geometric random walk with daily log-vol `vol`.
inline std::vector<double> random_walk(std::mt19937_64& rng, std::size_t n, double vol, double drift = 0.0,
                                       double start = 100.0) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> px{start};
    while (px.size() < n)
        px.push_back(px.back() * std::exp(drift + vol * z(rng)));
    return px;
}

inline std::vector<double> random_returns(std::mt19937_64& rng, std::size_t n, double mean = 0.0003,
                                          double vol = 0.01) {
    std::normal_distribution<double> z(mean, vol);
    std::vector<double> r(n);
    for (auto& x : r)
        x = z(rng);
    return r;
}

inline double rel_err(double a, double b) {
    double s = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / s;
}

/// max relative error, treating |x| < floor as absolute.
inline double rel_err_floor(double a, double b, double floor = 1e-12) {
    double s = std::max({std::abs(a), std::abs(b), floor});
    return std::abs(a - b) / s;
}

namespace oracle {

// percent change via an extended-precision ratio
inline double relative_return(double prev, double cur) {
    return static_cast<double>((static_cast<long double>(cur) / prev - 1.0L) * 100.0L);
}

// Compounded value at position t recomputed from scratch.
inline long double compounded_at(const std::vector<double>& r_pct, std::size_t t, long double initial) {
    long double v = initial;
    for (std::size_t k = 0; k < t; ++k)
        v *= 1.0L + static_cast<long double>(r_pct[k]) / 100.0L;
    return v;
}

// nu-day normalized return as an extended-precision product
inline double normalized(const std::vector<double>& daily_pct, std::size_t end, int nu) {
    long double p = 1.0L;
    for (std::size_t i = end + 1 - static_cast<std::size_t>(nu); i <= end; ++i)
        p *= 1.0L + static_cast<long double>(daily_pct[i]) / 100.0L;
    return static_cast<double>(p - 1.0L);
}

// sample std dev, long double, two-pass
inline double sample_std(const std::vector<double>& x, std::size_t begin, std::size_t end) {
    long double m = 0;
    for (std::size_t i = begin; i < end; ++i)
        m += x[i];
    m /= static_cast<long double>(end - begin);
    long double ss = 0;
    for (std::size_t i = begin; i < end; ++i)
        ss += (x[i] - m) * (x[i] - m);
    return static_cast<double>(std::sqrt(ss / static_cast<long double>(end - begin - 1)));
}

inline double spread(double r1, double mean, double vol) { return r1 / mean - 1.0 + 0.01 * vol; }

// tracking error from the explicit active-return series
inline double tracking_error(const std::vector<double>& p, const std::vector<double>& b) {
    std::vector<double> d(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        d[i] = p[i] - b[i];
    return sample_std(d, 0, d.size());
}

// weight_i = prod_{j != i} TE_j / sum_k prod_{j != k} TE_j
inline std::vector<double> inverse_weights(const std::vector<double>& te) {
    std::vector<long double> num(te.size(), 1.0L);
    for (std::size_t i = 0; i < te.size(); ++i)
        for (std::size_t j = 0; j < te.size(); ++j)
            if (j != i)
                num[i] *= te[j];
    long double den = 0;
    for (auto v : num)
        den += v;
    std::vector<double> w;
    for (auto v : num)
        w.push_back(static_cast<double>(v / den));
    return w;
}

inline double annualized_return(const std::vector<double>& r, std::size_t b, std::size_t e) {
    long double s = 0;
    for (std::size_t i = b; i < e; ++i)
        s += std::log1p(static_cast<long double>(r[i]));
    return static_cast<double>(std::expm1(s * 252.0L / static_cast<long double>(e - b)));
}

inline double annualized_return(const std::vector<double>& r) { return annualized_return(r, 0, r.size()); }

inline double annualized_vol(const std::vector<double>& r) { return sample_std(r, 0, r.size()) * std::sqrt(252.0); }

// O(n^2) peak-to-trough scan over the wealth path including the 1.0 base
inline double max_drawdown(const std::vector<double>& r) {
    std::vector<long double> w{1.0L};
    for (double x : r)
        w.push_back(w.back() * (1.0L + x));
    long double best = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = i + 1; j < w.size(); ++j)
            best = std::max(best, 1.0L - w[j] / w[i]);
    return static_cast<double>(best);
}

// Signal cells straight from raw prices: ratio = asset / benchmark,
// CR_t = ratio_t / ratio_first, mom = CR_t > CR_{t-nu}, trend = CR_t above
// the mean of the nu preceding CR values. Returns {} when t lacks nu days.
struct CellOracle {
    std::vector<std::uint8_t> momentum, trend;
};

inline CellOracle cells_from_prices(const std::vector<double>& asset, const std::vector<double>& bench,
                                    std::size_t first, std::size_t t, const std::vector<int>& freqs) {
    auto cr = [&](std::size_t i) {
        return (static_cast<long double>(asset[i]) / bench[i]) / (static_cast<long double>(asset[first]) / bench[first]);
    };
    CellOracle out;
    for (int nu : freqs) {
        bool ok = t >= first + static_cast<std::size_t>(nu);
        out.momentum.push_back(ok && cr(t) > cr(t - nu) ? 1 : 0);
        if (!ok) {
            out.trend.push_back(0);
            continue;
        }
        long double s = 0;
        for (int k = 1; k <= nu; ++k)
            s += cr(t - k);
        out.trend.push_back(cr(t) > s / nu ? 1 : 0);
    }
    return out;
}

inline std::uint8_t strict_majority(const std::vector<std::uint8_t>& v) {
    int ones = 0;
    for (auto c : v)
        ones += c;
    return 2 * ones > static_cast<int>(v.size()) ? 1 : 0;
}

} // namespace oracle

#ifdef TF_TEST_DATA_DIR
inline std::string data_path(const std::string& name) { return std::string(TF_TEST_DATA_DIR) + "/" + name; }
#endif

/// Published calendar-year row, percent units.
struct PublishedYear {
    int year = 0;
    double gross = 0, net = 0, bench = 0, excess_gross = 0, excess_net = 0;
};

inline std::vector<PublishedYear> load_published_years(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::vector<std::string> header;
    std::vector<PublishedYear> out;
    for (const auto& row : trendfolio::csv::read(in, header)) {
        const auto& f = row.fields;
        out.push_back({std::stoi(f.at(0)), std::stod(f.at(1)), std::stod(f.at(2)), std::stod(f.at(3)),
                       std::stod(f.at(4)), std::stod(f.at(5))});
    }
    return out;
}

/// Daily path over each year's weekdays with a constant daily return chosen
/// so the year compounds to `annual_pct`.
struct DailyPaths {
    std::vector<Date> dates;
    std::vector<double> gross, net, bench;
};

inline DailyPaths daily_paths_for(const std::vector<PublishedYear>& years) {
    std::vector<PublishedYear> asc(years.rbegin(), years.rend());
    DailyPaths out;
    for (const auto& y : asc) {
        std::vector<Date> d;
        for (Date x(y.year, 1, 1); x.year() == y.year; x = x + 1)
            if (x.is_weekday())
                d.push_back(x);
        auto daily = [&](double pct) { return std::pow(1.0 + pct / 100.0, 1.0 / static_cast<double>(d.size())) - 1.0; };
        for (const auto& x : d) {
            out.dates.push_back(x);
            out.gross.push_back(daily(y.gross));
            out.net.push_back(daily(y.net));
            out.bench.push_back(daily(y.bench));
        }
    }
    return out;
}

/// The 21-asset synthetic dataset aligned into a panel.
inline AlignedPanel synthetic_panel(std::uint64_t seed = 20231227) {
    auto ds = trendfolio::synthetic::generate(seed);
    std::vector<std::pair<AssetMeta, PriceSeries>> assets;
    for (std::size_t i = 0; i < ds.assets.size(); ++i)
        assets.emplace_back(ds.universe[i], ds.assets[i]);
    return trendfolio::align_panel(assets, ds.benchmarks);
}

} // namespace tf_test
