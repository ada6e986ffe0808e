#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "trendfolio/csv.hpp"
#include "trendfolio/date.hpp"
#include "trendfolio/market_data.hpp"

namespace trendfolio::synthetic {

/// Portable standard normal draws: Box-Muller over mt19937_64, whose output
/// sequence is fixed by the standard (std::normal_distribution is not).
class NormalSource {
public:
    explicit NormalSource(std::uint64_t seed) : eng_(seed) {}

    double uniform() {
        // 53 random bits in (0, 1)
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        constexpr double two_pi = 6.283185307179586476925286766559;
        spare_ = r * std::sin(two_pi * u2);
        have_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

struct AssetSpec {
    const char* id;
    AssetClass asset_class;
    const char* description;
    const char* risk_factors;
    Date inception;
    double rel_vol;    // annualized volatility of the ratio to the benchmark
    double rel_trend;  // annualized drift magnitude of trending regimes
};

struct BenchmarkSpec {
    const char* id;
    double drift;  // annualized
    double vol;
};

inline const std::vector<BenchmarkSpec>& benchmark_specs() {
    static const std::vector<BenchmarkSpec> v{{"SPX", 0.07, 0.17}, {"AGG", 0.03, 0.045}};
    return v;
}

/// The 21-ETF universe with staggered listing dates.
inline const std::vector<AssetSpec>& asset_specs() {
    using AC = AssetClass;
    static const std::vector<AssetSpec> v{
        {"IWD", AC::Equity, "Large U.S. Growth Stocks", "Growth", {2000, 5, 26}, 0.06, 0.04},
        {"IWF", AC::Equity, "Large U.S. Value Stocks", "Value", {2000, 5, 26}, 0.07, 0.04},
        {"IWN", AC::Equity, "Small U.S. Growth Stocks", "Capitalization;Growth", {2000, 7, 28}, 0.10, 0.06},
        {"IWO", AC::Equity, "Small U.S. Value Stocks", "Capitalization;Value", {2000, 7, 28}, 0.11, 0.06},
        {"EFA", AC::Equity, "Large Non-U.S. \"Developed Market\" Stocks", "Domicile", {2001, 8, 17}, 0.09, 0.05},
        {"SCZ", AC::Equity, "Small Non-U.S. \"Developed Market\" Stocks", "Domicile;Capitalization", {2007, 12, 12},
         0.12, 0.06},
        {"EEM", AC::Equity, "Non-U.S. \"Emerging Market\" Stocks", "Domicile", {2003, 4, 11}, 0.15, 0.08},
        {"TIP", AC::FixedIncome, "U.S. Inflation-Protected Bonds", "Inflation", {2003, 12, 5}, 0.04, 0.02},
        {"SHY", AC::FixedIncome, "U.S. Short Duration Bonds", "Short Duration", {2002, 7, 26}, 0.03, 0.015},
        {"TLT", AC::FixedIncome, "U.S. Long Duration Bonds", "Long Duration", {2002, 7, 26}, 0.12, 0.05},
        {"LQD", AC::FixedIncome, "U.S. Investment Grade Credit", "IG Credit Spreads", {2002, 7, 26}, 0.05, 0.02},
        {"HYG", AC::FixedIncome, "U.S. High Yield Credit", "HY Credit Spreads", {2007, 4, 11}, 0.09, 0.04},
        {"BWX", AC::FixedIncome, "Non-U.S. \"Developed Market\" Bonds", "Developed Market Currencies",
         {2007, 10, 5}, 0.08, 0.03},
        {"EMB", AC::FixedIncome, "Non-U.S. \"Emerging Market\" Bonds", "Emerging Market Currencies",
         {2007, 12, 19}, 0.09, 0.04},
        {"BIZD", AC::Alternative, "Private Equity", "Private Capital", {2013, 2, 12}, 0.20, 0.08},
        {"BKLN", AC::Alternative, "Private Credit", "Private Capital", {2011, 3, 3}, 0.07, 0.03},
        {"RWR", AC::Alternative, "Real Estate", "Real Estate", {2001, 4, 27}, 0.20, 0.08},
        {"USO", AC::Alternative, "Energy Commodities", "Commodity", {2006, 4, 10}, 0.35, 0.15},
        {"DBA", AC::Alternative, "Agricultural Commodities", "Commodity", {2007, 1, 5}, 0.20, 0.08},
        {"DBB", AC::Alternative, "Industrial Metal Commodities", "Commodity", {2007, 1, 5}, 0.25, 0.10},
        {"GLD", AC::Alternative, "Precious Metal Commodities", "Commodity", {2004, 11, 18}, 0.16, 0.08},
    };
    return v;
}

/// Weekdays in [first, last] excluding Jan 1, Jul 4 and Dec 25.
inline std::vector<Date> weekday_calendar(const Date& first, const Date& last) {
    std::vector<Date> out;
    for (Date d = first; d <= last; d = d + 1) {
        if (!d.is_weekday())
            continue;
        if ((d.month() == 1 && d.day() == 1) || (d.month() == 7 && d.day() == 4) ||
            (d.month() == 12 && d.day() == 25))
            continue;
        out.push_back(d);
    }
    return out;
}

struct Dataset {
    std::vector<AssetMeta> universe;
    std::vector<PriceSeries> benchmarks;
    std::vector<PriceSeries> assets;
};

/// Benchmarks follow geometric Brownian motion; each asset is its benchmark
/// times a regime-switching relative trend plus noise, so momentum and trend
/// signals have something to find.
inline Dataset generate(std::uint64_t seed = 20231227, Date first = {1997, 12, 23}, Date last = {2023, 12, 27}) {
    const auto dates = weekday_calendar(first, last);
    const double dt = 1.0 / 252.0;
    Dataset ds;
    std::vector<std::vector<double>> bench_px;
    std::uint64_t stream = 0;
    for (const auto& b : benchmark_specs()) {
        NormalSource rng(seed + 7919 * ++stream);
        PriceSeries s{b.id, {}};
        double px = 100.0;
        std::vector<double> path;
        for (std::size_t t = 0; t < dates.size(); ++t) {
            if (t > 0)
                px *= std::exp((b.drift - 0.5 * b.vol * b.vol) * dt + b.vol * std::sqrt(dt) * rng.next());
            path.push_back(px);
            s.observations.push_back({dates[t], px});
        }
        bench_px.push_back(std::move(path));
        ds.benchmarks.push_back(std::move(s));
    }
    for (const auto& a : asset_specs()) {
        NormalSource rng(seed + 7919 * ++stream);
        const std::size_t bi = a.asset_class == AssetClass::Equity ? 0 : 1;
        AssetMeta meta;
        meta.id = a.id;
        meta.asset_class = a.asset_class;
        meta.subset_description = a.description;
        std::string tok;
        for (const char* c = a.risk_factors;; ++c) {
            if (*c == ';' || *c == '\0') {
                meta.risk_factors.insert(tok);
                tok.clear();
                if (*c == '\0')
                    break;
            } else {
                tok.push_back(*c);
            }
        }
        meta.benchmark_id = benchmark_specs()[bi].id;
        meta.inception_date = a.inception;
        PriceSeries s{a.id, {}};
        double rel = 0.0;
        double regime = rng.uniform() < 0.5 ? 1.0 : -1.0;
        std::size_t t0 = 0;
        while (t0 < dates.size() && dates[t0] < a.inception)
            ++t0;
        for (std::size_t t = t0; t < dates.size(); ++t) {
            if (t > t0) {
                if (rng.uniform() < 1.0 / 150.0)
                    regime = -regime;
                rel += regime * a.rel_trend * dt - 0.5 * a.rel_vol * a.rel_vol * dt +
                       a.rel_vol * std::sqrt(dt) * rng.next();
            }
            // every 397th print is missing
            if (t > t0 && (t - t0) % 397 == 0)
                continue;
            double px = 50.0 * bench_px[bi][t] / bench_px[bi][t0] * std::exp(rel);
            s.observations.push_back({dates[t], px});
        }
        ds.universe.push_back(std::move(meta));
        ds.assets.push_back(std::move(s));
    }
    return ds;
}

inline const char* kManifestJson = R"({
  "data_dir": "prices",
  "universe": "universe.csv",
  "output_dir": "results",
  "max_fill_fraction": 0.02,
  "strategies": [
    {"name": "equity", "asset_classes": ["Equity"], "benchmark_id": "SPX"},
    {"name": "fixed_income", "asset_classes": ["Fixed Income"], "benchmark_id": "AGG"},
    {"name": "alternatives", "asset_classes": ["Alternative"], "benchmark_id": "AGG"}
  ],
  "blend": {
    "name": "moderate",
    "components": [
      {"strategy": "equity", "allocation": 0.6},
      {"strategy": "fixed_income", "allocation": 0.3},
      {"strategy": "alternatives", "allocation": 0.1}
    ],
    "benchmark": [
      {"id": "SPX", "weight": 0.6},
      {"id": "AGG", "weight": 0.4}
    ]
  }
}
)";

/// Write prices/<id>.csv, universe.csv and manifest.json under `dir`.
inline void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "prices");
    for (const auto* group : {&ds.benchmarks, &ds.assets})
        for (const auto& s : *group) {
            auto out = csv::open_out((dir / "prices" / (s.asset_id + ".csv")).string());
            write_price_series(out, s);
        }
    {
        auto out = csv::open_out((dir / "universe.csv").string());
        write_universe(out, ds.universe);
    }
    auto out = csv::open_out((dir / "manifest.json").string());
    out << kManifestJson;
}

} // namespace trendfolio::synthetic
