#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "trendfolio/error.hpp"
#include "trendfolio/market_data.hpp"

namespace trendfolio {

inline constexpr int kTradingDaysPerYear = 252;
inline constexpr double kTrackingErrorFloor = 1e-6;

/// Sample standard deviation of centered active returns over the trailing
/// `window` observations of p - b. Scaled by sqrt(252) when `annualize`.
inline double tracking_error(std::span<const double> p, std::span<const double> b, std::size_t window,
                             bool annualize = false) {
    if (window < 2)
        throw Error(ErrorCode::WindowTooSmall, "tracking error window must be >= 2");
    if (p.size() != b.size())
        throw Error(ErrorCode::MisalignedSeries, "portfolio and benchmark series differ in length");
    if (p.size() < window)
        throw Error(ErrorCode::WindowExceedsSeries, "tracking error window exceeds series");
    const std::size_t start = p.size() - window;
    double mp = 0, mb = 0;
    for (std::size_t i = start; i < p.size(); ++i) {
        mp += p[i];
        mb += b[i];
    }
    mp /= static_cast<double>(window);
    mb /= static_cast<double>(window);
    double ss = 0;
    for (std::size_t i = start; i < p.size(); ++i) {
        double d = (p[i] - b[i]) - (mp - mb);
        ss += d * d;
    }
    double te = std::sqrt(ss / static_cast<double>(window - 1));
    return annualize ? te * std::sqrt(static_cast<double>(kTradingDaysPerYear)) : te;
}

struct TrackingErrorVector {
    Date date;
    bool annualized = true;
    std::vector<std::pair<std::string, double>> entries;
};

struct WeightVector {
    Date date;
    std::map<std::string, double> weights;
    double cash_weight = 1.0;
    std::map<std::string, double> tracking_errors;
    std::vector<std::string> clamped;  // assets whose TE hit the floor

    double total() const {
        double s = cash_weight;
        for (const auto& [id, w] : weights)
            s += w;
        return s;
    }
};

/// Weights proportional to 1/TE. TE values under 1e-6 are clamped to the
/// floor and recorded. An empty input yields an all-cash vector.
inline WeightVector inverse_te_weights(const TrackingErrorVector& te) {
    WeightVector w;
    w.date = te.date;
    if (te.entries.empty()) {
        w.cash_weight = 1.0;
        return w;
    }
    std::vector<double> inv;
    inv.reserve(te.entries.size());
    double sum = 0;
    for (const auto& [id, v] : te.entries) {
        if (!(v >= 0) || !std::isfinite(v))
            throw Error(ErrorCode::ZeroTrackingError, id + ": tracking error is not a finite nonnegative value");
        double x = v;
        if (x < kTrackingErrorFloor) {
            x = kTrackingErrorFloor;
            w.clamped.push_back(id);
        }
        w.tracking_errors[id] = v;
        inv.push_back(1.0 / x);
        sum += inv.back();
    }
    for (std::size_t i = 0; i < te.entries.size(); ++i)
        w.weights[te.entries[i].first] = inv[i] / sum;
    w.cash_weight = 0.0;
    return w;
}

struct RebalanceSchedule {
    std::vector<std::size_t> indices;
    std::vector<Date> dates;

    bool contains(std::size_t t) const { return std::binary_search(indices.begin(), indices.end(), t); }
};

/// Every `period` trading days from `start` through the end of the calendar.
inline RebalanceSchedule rebalance_schedule(const TradingCalendar& calendar, const Date& start, int period = 10) {
    if (period < 1)
        throw Error(ErrorCode::InvalidConfig, "rebalance period must be >= 1");
    auto s = calendar.index_of(start);
    if (!s)
        throw Error(ErrorCode::StartOutsideCalendar, start.iso() + " is not in the calendar");
    RebalanceSchedule out;
    for (std::size_t t = *s; t < calendar.size(); t += static_cast<std::size_t>(period)) {
        out.indices.push_back(t);
        out.dates.push_back(calendar[t]);
    }
    return out;
}

/// Daily simple returns of one series over indices (t - window, t], read through the view.
inline std::vector<double> trailing_returns(const PanelView& view, const std::string& id, std::size_t window) {
    const std::size_t t = view.as_of();
    std::vector<double> r;
    r.reserve(window);
    for (std::size_t i = t + 1 - window; i <= t; ++i)
        r.push_back(view.price(id, i) / view.price(id, i - 1) - 1.0);
    return r;
}

/// Annualized tracking error of each asset against its own benchmark over
/// the trailing `window` daily returns ending at the view's as-of date.
inline TrackingErrorVector compute_tracking_errors(const PanelView& view, const std::vector<std::string>& ids,
                                                   std::size_t window) {
    TrackingErrorVector out;
    out.date = view.panel().calendar[view.as_of()];
    out.annualized = true;
    for (const auto& id : ids) {
        const auto& meta = view.panel().assets.at(id);
        auto p = trailing_returns(view, id, window);
        auto b = trailing_returns(view, meta.benchmark_id, window);
        out.entries.emplace_back(id, tracking_error(p, b, window, true));
    }
    return out;
}

inline void write_weights_header(std::ostream& out) { out << "date,asset_id,weight,te,cash_weight\n"; }

inline void write_weights(std::ostream& out, const WeightVector& w) {
    if (w.weights.empty()) {
        out << w.date.iso() << ",CASH," << csv::exact(w.cash_weight) << ",NA," << csv::exact(w.cash_weight) << '\n';
        return;
    }
    for (const auto& [id, weight] : w.weights)
        out << w.date.iso() << ',' << csv::quote(id) << ',' << csv::exact(weight) << ','
            << csv::exact(w.tracking_errors.at(id)) << ',' << csv::exact(w.cash_weight) << '\n';
}

} // namespace trendfolio
