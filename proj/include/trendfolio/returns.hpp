#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "trendfolio/error.hpp"
#include "trendfolio/market_data.hpp"

namespace trendfolio {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Returns series are stored either in percent (x100) or as plain fractions.
enum class Unit { Percent, Fraction };

struct Series {
    std::vector<double> values;
    Unit unit = Unit::Fraction;

    double in(Unit u, std::size_t i) const {
        double v = values[i];
        if (u == unit)
            return v;
        return u == Unit::Percent ? v * 100.0 : v / 100.0;
    }
};

/// Trailing windows in trading days, strictly increasing, starting at 1.
class FrequencySet {
public:
    FrequencySet() : FrequencySet({1, 5, 21, 63, 126, 252}) {}
    FrequencySet(std::initializer_list<int> v) : FrequencySet(std::vector<int>(v)) {}
    explicit FrequencySet(std::vector<int> v) : values_(std::move(v)) {
        if (values_.empty() || values_.front() != 1)
            throw Error(ErrorCode::InvalidConfig, "frequency set must start at 1");
        for (std::size_t i = 1; i < values_.size(); ++i)
            if (values_[i] <= values_[i - 1])
                throw Error(ErrorCode::InvalidConfig, "frequencies must be strictly increasing");
    }

    const std::vector<int>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    int max() const { return values_.back(); }
    auto begin() const { return values_.begin(); }
    auto end() const { return values_.end(); }

private:
    std::vector<int> values_;
};

struct RatioObservation {
    Date date;
    double ratio = 0.0;
};

struct RatioSeries {
    std::string asset_id;
    std::string benchmark_id;
    std::vector<RatioObservation> observations;

    std::vector<double> values() const {
        std::vector<double> v;
        v.reserve(observations.size());
        for (const auto& o : observations)
            v.push_back(o.ratio);
        return v;
    }
};

/// Pointwise asset / benchmark price ratio. Both series must carry the same dates.
inline RatioSeries price_ratio(const PriceSeries& asset, const PriceSeries& benchmark) {
    if (asset.size() != benchmark.size())
        throw Error(ErrorCode::MisalignedSeries, asset.asset_id + " and " + benchmark.asset_id +
                                                     " have different lengths");
    RatioSeries out{asset.asset_id, benchmark.asset_id, {}};
    out.observations.reserve(asset.size());
    for (std::size_t i = 0; i < asset.size(); ++i) {
        const auto& a = asset.observations[i];
        const auto& b = benchmark.observations[i];
        if (a.date != b.date)
            throw Error(ErrorCode::MisalignedSeries, "date mismatch at " + a.date.iso() + " vs " + b.date.iso());
        out.observations.push_back({a.date, a.adjusted_close / b.adjusted_close});
    }
    return out;
}

/// Percent change of consecutive values. Output has one fewer element.
inline std::vector<double> relative_returns(std::span<const double> ratio) {
    if (ratio.size() < 2)
        throw Error(ErrorCode::SeriesTooShort, "relative returns need at least 2 observations");
    std::vector<double> r(ratio.size() - 1);
    for (std::size_t t = 1; t < ratio.size(); ++t)
        r[t - 1] = (ratio[t] - ratio[t - 1]) / ratio[t - 1] * 100.0;
    return r;
}

/// CR_0 = initial, CR_t = CR_{t-1} * (1 + R_t / 100). Returns are in percent.
inline std::vector<double> compound_returns(std::span<const double> returns_pct, double initial = 1.0) {
    if (!(initial > 0))
        throw Error(ErrorCode::NonPositiveGrowthFactor, "initial value must be positive");
    std::vector<double> cr;
    cr.reserve(returns_pct.size() + 1);
    cr.push_back(initial);
    for (std::size_t i = 0; i < returns_pct.size(); ++i) {
        double g = 1.0 + returns_pct[i] / 100.0;
        if (!(g > 0))
            throw Error(ErrorCode::NonPositiveGrowthFactor,
                        "return " + std::to_string(returns_pct[i]) + "% at position " + std::to_string(i));
        cr.push_back(cr.back() * g);
    }
    return cr;
}

/// Percent change of the compounded series (inverse of compound_returns).
inline std::vector<double> normalized_daily_returns(std::span<const double> cr) {
    if (cr.size() < 2)
        throw Error(ErrorCode::SeriesTooShort, "normalized returns need at least 2 observations");
    std::vector<double> r(cr.size() - 1);
    for (std::size_t t = 1; t < cr.size(); ++t)
        r[t - 1] = (cr[t] - cr[t - 1]) / cr[t - 1] * 100.0;
    return r;
}

/// Geometric nu-day compounding of daily percent returns, as a fraction.
/// Output element k covers inputs k .. k+nu-1.
inline std::vector<double> normalized_returns(std::span<const double> daily_pct, int nu) {
    if (nu < 1)
        throw Error(ErrorCode::WindowTooSmall, "frequency must be >= 1");
    auto w = static_cast<std::size_t>(nu);
    if (daily_pct.size() < w)
        throw Error(ErrorCode::WindowExceedsSeries,
                    "window " + std::to_string(nu) + " exceeds series of " + std::to_string(daily_pct.size()));
    std::vector<double> out(daily_pct.size() - w + 1);
    if (w == 1) {
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] = daily_pct[k] / 100.0;
        return out;
    }
    std::vector<double> logs(daily_pct.size());
    for (std::size_t i = 0; i < logs.size(); ++i)
        logs[i] = std::log1p(daily_pct[i] / 100.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        double s = 0.0;
        for (std::size_t i = k; i < k + w; ++i)
            s += logs[i];
        out[k] = std::expm1(s);
    }
    return out;
}

/// Trailing mean over windows of n; element k covers inputs k .. k+n-1.
inline std::vector<double> rolling_mean(std::span<const double> x, std::size_t n) {
    if (n < 1)
        throw Error(ErrorCode::WindowTooSmall, "window must be >= 1");
    if (x.size() < n)
        throw Error(ErrorCode::WindowExceedsSeries, "window exceeds series");
    std::vector<double> out(x.size() - n + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        double s = 0;
        for (std::size_t i = k; i < k + n; ++i)
            s += x[i];
        out[k] = s / static_cast<double>(n);
    }
    return out;
}

/// Trailing sample standard deviation (divisor n-1) of squared deviations
/// from the window mean. Units follow the input.
inline std::vector<double> rolling_volatility(std::span<const double> x, std::size_t n) {
    if (n < 2)
        throw Error(ErrorCode::WindowTooSmall, "volatility window must be >= 2");
    if (x.size() < n)
        throw Error(ErrorCode::WindowExceedsSeries, "window exceeds series");
    std::vector<double> out(x.size() - n + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        double mean = 0;
        for (std::size_t i = k; i < k + n; ++i)
            mean += x[i];
        mean /= static_cast<double>(n);
        double ss = 0;
        bool constant = true;
        for (std::size_t i = k; i < k + n; ++i) {
            double d = x[i] - mean;
            ss += d * d;
            constant = constant && x[i] == x[k];
        }
        out[k] = constant ? 0.0 : std::sqrt(ss / static_cast<double>(n - 1));
    }
    return out;
}

struct ReturnConfig {
    FrequencySet frequencies;
    /// Volatility / mean window; when unset each frequency uses max(nu, 2).
    std::optional<int> vol_window;
    double initial_cr = 1.0;
    /// Unit the normalized nu-returns are expressed in before mean/volatility
    /// feed the spread signal.
    Unit spread_unit = Unit::Percent;

    std::size_t window_for(int nu) const {
        return static_cast<std::size_t>(vol_window ? *vol_window : std::max(nu, 2));
    }
};

/// Per-frequency series, all calendar-length with NaN where undefined.
struct FrequencySeries {
    int nu = 1;
    std::size_t window = 2;
    Series normalized;   // R^nu_t
    Series mean;         // trailing mean of R^nu over `window`
    Series volatility;   // sigma^nu_t
};

/// Calendar-aligned return series for one asset against its benchmark.
/// Index t is a calendar index; values before `first_index` are NaN.
struct AssetReturns {
    std::string asset_id;
    std::string benchmark_id;
    std::size_t first_index = 0;  // first calendar index with a ratio (CR_0)
    Series ratio{{}, Unit::Fraction};
    Series relative{{}, Unit::Percent};     // R_t
    Series compounded{{}, Unit::Fraction};  // CR_t
    Series daily{{}, Unit::Percent};        // R^1_t
    std::vector<FrequencySeries> by_frequency;

    const FrequencySeries& frequency(int nu) const {
        for (const auto& f : by_frequency)
            if (f.nu == nu)
                return f;
        throw Error(ErrorCode::InvalidConfig, "frequency " + std::to_string(nu) + " not computed");
    }
};

struct ReturnPanel {
    std::size_t length = 0;
    FrequencySet frequencies;
    std::map<std::string, AssetReturns> assets;

    const AssetReturns& get(const std::string& id) const {
        auto it = assets.find(id);
        if (it == assets.end())
            throw Error(ErrorCode::UnknownAsset, "no returns for " + id);
        return it->second;
    }
};

namespace detail {

inline void place(std::vector<double>& dst, std::size_t offset, const std::vector<double>& src) {
    std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(offset));
}

} // namespace detail

/// Compute every return, normalized-return and volatility series for one
/// asset versus its benchmark over the panel calendar.
inline AssetReturns compute_asset_returns(const AlignedPanel& panel, const std::string& asset_id,
                                          const ReturnConfig& cfg) {
    const auto& meta = panel.assets.at(asset_id);
    const auto& a = panel.get(asset_id);
    const auto& b = panel.get(meta.benchmark_id);
    const std::size_t n = panel.calendar.size();
    AssetReturns r;
    r.asset_id = asset_id;
    r.benchmark_id = meta.benchmark_id;
    r.first_index = std::max(a.first_index, b.first_index);
    r.ratio.values.assign(n, kNaN);
    r.relative.values.assign(n, kNaN);
    r.compounded.values.assign(n, kNaN);
    r.daily.values.assign(n, kNaN);
    const std::size_t t0 = r.first_index;

    std::vector<double> ratio;
    for (std::size_t t = t0; t < n; ++t)
        ratio.push_back(a.at(t) / b.at(t));
    detail::place(r.ratio.values, t0, ratio);

    for (int nu : cfg.frequencies) {
        FrequencySeries f;
        f.nu = nu;
        f.window = cfg.window_for(nu);
        f.normalized = Series{std::vector<double>(n, kNaN), Unit::Fraction};
        f.mean = Series{std::vector<double>(n, kNaN), cfg.spread_unit};
        f.volatility = Series{std::vector<double>(n, kNaN), cfg.spread_unit};
        r.by_frequency.push_back(std::move(f));
    }
    if (ratio.size() < 2) {
        if (!ratio.empty())
            r.compounded.values[t0] = cfg.initial_cr;
        return r;
    }

    auto rel = relative_returns(ratio);
    detail::place(r.relative.values, t0 + 1, rel);
    auto cr = compound_returns(rel, cfg.initial_cr);
    detail::place(r.compounded.values, t0, cr);
    auto daily = normalized_daily_returns(cr);
    detail::place(r.daily.values, t0 + 1, daily);

    const double scale = cfg.spread_unit == Unit::Percent ? 100.0 : 1.0;
    for (auto& f : r.by_frequency) {
        if (daily.size() < static_cast<std::size_t>(f.nu))
            continue;
        auto norm = normalized_returns(daily, f.nu);
        // element k covers daily[k .. k+nu-1]; daily[j] sits at t0 + 1 + j
        const std::size_t norm_start = t0 + static_cast<std::size_t>(f.nu);
        detail::place(f.normalized.values, norm_start, norm);
        if (norm.size() < f.window)
            continue;
        std::vector<double> scaled(norm.size());
        for (std::size_t k = 0; k < norm.size(); ++k)
            scaled[k] = norm[k] * scale;
        detail::place(f.mean.values, norm_start + f.window - 1, rolling_mean(scaled, f.window));
        detail::place(f.volatility.values, norm_start + f.window - 1, rolling_volatility(scaled, f.window));
    }
    return r;
}

inline ReturnPanel build_return_panel(const AlignedPanel& panel, const std::vector<std::string>& asset_ids,
                                      const ReturnConfig& cfg = {}) {
    ReturnPanel out;
    out.length = panel.calendar.size();
    out.frequencies = cfg.frequencies;
    for (const auto& id : asset_ids)
        out.assets.emplace(id, compute_asset_returns(panel, id, cfg));
    return out;
}

} // namespace trendfolio
