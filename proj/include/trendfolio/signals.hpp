#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "trendfolio/error.hpp"
#include "trendfolio/market_data.hpp"
#include "trendfolio/returns.hpp"

namespace trendfolio {

inline constexpr double kDegenerateMeanEps = 1e-9;

/// (R1 - mean) / mean + vol / 100, or nullopt when |mean| < 1e-9.
/// r1 and mean share a unit; vol is in percent.
inline std::optional<double> try_spread_signal(double r1, double mean, double vol_pct) {
    if (!(std::abs(mean) >= kDegenerateMeanEps))
        return std::nullopt;
    return (r1 - mean) / mean + vol_pct / 100.0;
}

inline double spread_signal(double r1, double mean, double vol_pct) {
    auto s = try_spread_signal(r1, mean, vol_pct);
    if (!s)
        throw Error(ErrorCode::DegenerateMean, "mean return " + std::to_string(mean) + " is below 1e-9");
    return *s;
}

/// Per asset, per frequency spread series. NaN marks undefined cells
/// (missing history or degenerate mean).
struct SpreadPanel {
    std::map<std::string, std::vector<Series>> assets;  // parallel to ReturnPanel::frequencies

    const Series& get(const std::string& id, std::size_t freq_pos) const { return assets.at(id).at(freq_pos); }
};

inline SpreadPanel build_spread_panel(const ReturnPanel& rp) {
    SpreadPanel out;
    for (const auto& [id, r] : rp.assets) {
        auto& row = out.assets[id];
        for (const auto& f : r.by_frequency) {
            Series s{std::vector<double>(rp.length, kNaN), Unit::Fraction};
            for (std::size_t t = 0; t < rp.length; ++t) {
                double m = f.mean.values[t];
                double v = f.volatility.values[t];
                double d = r.daily.values[t];
                if (std::isnan(m) || std::isnan(v) || std::isnan(d))
                    continue;
                if (auto sp = try_spread_signal(r.daily.in(f.mean.unit, t), m, f.volatility.in(Unit::Percent, t)))
                    s.values[t] = *sp;
            }
            row.push_back(std::move(s));
        }
    }
    return out;
}

/// Read-only window onto one asset's returns; any read after `as_of` throws.
class ReturnsView {
public:
    ReturnsView(const AssetReturns& r, std::size_t as_of) : r_(&r), as_of_(as_of) {}

    std::size_t as_of() const { return as_of_; }
    std::size_t first_index() const { return r_->first_index; }
    const std::string& asset_id() const { return r_->asset_id; }

    double compounded(std::size_t t) const { return guard(t, r_->compounded.values); }
    double daily_pct(std::size_t t) const { return guard(t, r_->daily.values); }
    double normalized(int nu, std::size_t t) const { return guard(t, r_->frequency(nu).normalized.values); }

    /// True when the trailing nu-day window ending at as_of is fully defined.
    bool has_history(int nu) const {
        return as_of_ >= r_->first_index + static_cast<std::size_t>(nu);
    }

private:
    double guard(std::size_t t, const std::vector<double>& v) const {
        if (t > as_of_)
            throw Error(ErrorCode::LookAhead, r_->asset_id + ": read at index " + std::to_string(t) +
                                                  " beyond as-of " + std::to_string(as_of_));
        return v[t];
    }

    const AssetReturns* r_;
    std::size_t as_of_;
};

enum class CellKind { Momentum, Trend, Spread };

struct CellColumn {
    CellKind kind;
    int nu;

    std::string name() const {
        const char* p = kind == CellKind::Momentum ? "mom_" : kind == CellKind::Trend ? "trend_" : "spread_";
        return p + std::to_string(nu);
    }
};

enum class FusionMode {
    Both,           // include iff momentum AND trend votes
    Either,         // include iff momentum OR trend votes
    JointMajority,  // include iff a strict majority of all cells are 1
};

inline std::optional<FusionMode> parse_fusion_mode(std::string_view s) {
    if (s == "both")
        return FusionMode::Both;
    if (s == "either")
        return FusionMode::Either;
    if (s == "joint_majority")
        return FusionMode::JointMajority;
    return std::nullopt;
}

/// Momentum cell: positive trailing nu-day relative return.
inline bool momentum_rule(const ReturnsView& v, int nu) {
    if (!v.has_history(nu))
        return false;
    return v.normalized(nu, v.as_of()) > 0.0;
}

/// Trend cell: compounded ratio above its mean over the preceding nu days.
inline bool trend_rule(const ReturnsView& v, int nu) {
    if (!v.has_history(nu))
        return false;
    const std::size_t t = v.as_of();
    double sum = 0;
    for (std::size_t i = t - static_cast<std::size_t>(nu); i < t; ++i)
        sum += v.compounded(i);
    return v.compounded(t) > sum / nu;
}

struct SignalCriteria {
    using CellRule = std::function<bool(const ReturnsView&, int nu)>;

    CellRule momentum = momentum_rule;
    CellRule trend = trend_rule;
    /// When set, spread cells (S > threshold) are added to the matrix.
    std::optional<double> spread_threshold;
    FusionMode mode = FusionMode::Both;
};

struct FusedDecision {
    std::string asset_id;
    std::uint8_t momentum_vote = 0;
    std::uint8_t trend_vote = 0;
    std::uint8_t include = 0;
    Date date;
};

struct SignalRow {
    std::string asset_id;
    std::vector<std::uint8_t> cells;  // parallel to SignalMatrix::columns
    std::uint8_t momentum_vote = 0;
    std::uint8_t trend_vote = 0;
    std::uint8_t include = 0;

    friend bool operator==(const SignalRow&, const SignalRow&) = default;
};

struct SignalMatrix {
    Date date;
    std::size_t index = 0;
    std::vector<CellColumn> columns;
    std::vector<SignalRow> rows;

    const SignalRow* find(const std::string& id) const {
        for (const auto& r : rows)
            if (r.asset_id == id)
                return &r;
        return nullptr;
    }

    std::vector<FusedDecision> decisions() const {
        std::vector<FusedDecision> out;
        for (const auto& r : rows)
            out.push_back({r.asset_id, r.momentum_vote, r.trend_vote, r.include, date});
        return out;
    }
};

/// Strict majority of ones; ties resolve to 0.
inline std::uint8_t majority(std::span<const std::uint8_t> cells) {
    if (cells.empty())
        throw Error(ErrorCode::EmptyRow, "vote over an empty row");
    std::size_t ones = 0;
    for (auto c : cells)
        ones += c ? 1 : 0;
    return 2 * ones > cells.size() ? 1 : 0;
}

inline std::uint8_t momentum_vote(std::span<const std::uint8_t> cells) { return majority(cells); }
inline std::uint8_t trend_vote(std::span<const std::uint8_t> cells) { return majority(cells); }

inline std::uint8_t fuse_majority_vote(std::uint8_t m, std::uint8_t t, FusionMode mode = FusionMode::Both) {
    switch (mode) {
    case FusionMode::Both: return (m && t) ? 1 : 0;
    case FusionMode::Either: return (m || t) ? 1 : 0;
    case FusionMode::JointMajority:
        throw Error(ErrorCode::InvalidConfig, "joint majority needs the full cell row");
    }
    return 0;
}

/// Evaluate every cell for each asset available at calendar index `t`.
/// Rows are ordered by asset id.
inline SignalMatrix build_signal_matrix(const TradingCalendar& calendar, const ReturnPanel& rp,
                                        const SpreadPanel& spreads, std::size_t t,
                                        const SignalCriteria& criteria = {}) {
    if (t >= calendar.size())
        throw Error(ErrorCode::DateOutsideCalendar, "signal index beyond calendar");
    SignalMatrix m;
    m.date = calendar[t];
    m.index = t;
    for (int nu : rp.frequencies)
        m.columns.push_back({CellKind::Momentum, nu});
    for (int nu : rp.frequencies)
        m.columns.push_back({CellKind::Trend, nu});
    if (criteria.spread_threshold)
        for (int nu : rp.frequencies)
            m.columns.push_back({CellKind::Spread, nu});

    const std::size_t nf = rp.frequencies.size();
    bool any_full = false;
    for (const auto& [id, r] : rp.assets) {
        if (r.first_index > t)
            continue;
        ReturnsView view(r, t);
        any_full = any_full || view.has_history(rp.frequencies.max());
        SignalRow row;
        row.asset_id = id;
        row.cells.reserve(m.columns.size());
        for (int nu : rp.frequencies)
            row.cells.push_back(criteria.momentum(view, nu) ? 1 : 0);
        for (int nu : rp.frequencies)
            row.cells.push_back(criteria.trend(view, nu) ? 1 : 0);
        if (criteria.spread_threshold) {
            for (std::size_t k = 0; k < nf; ++k) {
                double s = spreads.get(id, k).values[t];
                row.cells.push_back(!std::isnan(s) && s > *criteria.spread_threshold ? 1 : 0);
            }
        }
        std::span<const std::uint8_t> cells(row.cells);
        row.momentum_vote = momentum_vote(cells.subspan(0, nf));
        row.trend_vote = trend_vote(cells.subspan(nf, nf));
        row.include = criteria.mode == FusionMode::JointMajority
                          ? majority(cells)
                          : fuse_majority_vote(row.momentum_vote, row.trend_vote, criteria.mode);
        m.rows.push_back(std::move(row));
    }
    if (!any_full)
        throw Error(ErrorCode::NoEligibleAssets, "no asset has " + std::to_string(rp.frequencies.max()) +
                                                     " days of history at " + m.date.iso());
    return m;
}

inline void write_signal_matrix(std::ostream& out, const SignalMatrix& m) {
    out << "asset_id";
    for (const auto& c : m.columns)
        out << ',' << c.name();
    out << ",momentum_vote,trend_vote,include\n";
    for (const auto& r : m.rows) {
        out << csv::quote(r.asset_id);
        for (auto c : r.cells)
            out << ',' << static_cast<int>(c);
        out << ',' << static_cast<int>(r.momentum_vote) << ',' << static_cast<int>(r.trend_vote) << ','
            << static_cast<int>(r.include) << '\n';
    }
}

} // namespace trendfolio
