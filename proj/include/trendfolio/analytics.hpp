#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "trendfolio/backtest.hpp"
#include "trendfolio/csv.hpp"
#include "trendfolio/date.hpp"
#include "trendfolio/error.hpp"
#include "trendfolio/portfolio.hpp"

namespace trendfolio {

// Dispersion below this is treated as zero by the ratio guards.
inline constexpr double kZeroDispersion = 1e-14;

/// Geometric annualization: (prod(1 + r))^(252 / D) - 1.
inline double annualized_return(std::span<const double> r, int periods_per_year = kTradingDaysPerYear) {
    if (r.empty())
        throw Error(ErrorCode::EmptySeries, "annualized return of an empty series");
    double growth = 1.0;
    for (double x : r)
        growth *= 1.0 + x;
    return std::pow(growth, static_cast<double>(periods_per_year) / static_cast<double>(r.size())) - 1.0;
}

inline double sample_std(std::span<const double> r) {
    if (r.size() < 2)
        throw Error(ErrorCode::SeriesTooShort, "standard deviation needs at least 2 observations");
    if (std::all_of(r.begin(), r.end(), [&](double x) { return x == r.front(); }))
        return 0.0;
    double mean = 0;
    for (double x : r)
        mean += x;
    mean /= static_cast<double>(r.size());
    double ss = 0;
    for (double x : r)
        ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(r.size() - 1));
}

inline double annualized_volatility(std::span<const double> r, int periods_per_year = kTradingDaysPerYear) {
    return sample_std(r) * std::sqrt(static_cast<double>(periods_per_year));
}

/// Annualized sample standard deviation of min(r, 0).
inline double downside_deviation(std::span<const double> r, int periods_per_year = kTradingDaysPerYear) {
    std::vector<double> d(r.size());
    std::transform(r.begin(), r.end(), d.begin(), [](double x) { return std::min(x, 0.0); });
    return annualized_volatility(d, periods_per_year);
}

/// Annualized return over annualized volatility; no risk-free rate.
inline double sharpe_modified(std::span<const double> r) {
    double vol = annualized_volatility(r);
    if (vol <= kZeroDispersion)
        throw Error(ErrorCode::ZeroVolatility, "return series has zero volatility");
    return annualized_return(r) / vol;
}

inline double sortino_modified(std::span<const double> r) {
    if (std::none_of(r.begin(), r.end(), [](double x) { return x < 0; }))
        throw Error(ErrorCode::ZeroDownside, "no negative returns");
    double dd = downside_deviation(r);
    if (dd <= kZeroDispersion)
        throw Error(ErrorCode::ZeroDownside, "downside deviation is zero");
    return annualized_return(r) / dd;
}

/// Largest peak-to-trough loss of the wealth path that starts at 1.0.
inline double max_drawdown(std::span<const double> r) {
    double wealth = 1.0, peak = 1.0, mdd = 0.0;
    for (double x : r) {
        wealth *= 1.0 + x;
        peak = std::max(peak, wealth);
        mdd = std::max(mdd, 1.0 - wealth / peak);
    }
    return mdd;
}

inline double calmar(std::span<const double> r) {
    double mdd = max_drawdown(r);
    if (mdd <= 0)
        throw Error(ErrorCode::ZeroDrawdown, "wealth path never draws down");
    return annualized_return(r) / std::abs(mdd);
}

/// Annualized tracking error over the whole span.
inline double annualized_tracking_error(std::span<const double> p, std::span<const double> b) {
    return tracking_error(p, b, p.size(), true);
}

/// Annualized excess return over annualized tracking error.
inline double information_ratio(std::span<const double> p, std::span<const double> b) {
    double te = annualized_tracking_error(p, b);
    if (te <= kZeroDispersion)
        throw Error(ErrorCode::ZeroTrackingError, "active returns have zero tracking error");
    return (annualized_return(p) - annualized_return(b)) / te;
}

/// Cumulative wealth path; element 0 is the 1.0 base, element k follows return k-1.
inline std::vector<double> growth_of_dollar(std::span<const double> r) {
    std::vector<double> w;
    w.reserve(r.size() + 1);
    w.push_back(1.0);
    for (double x : r)
        w.push_back(w.back() * (1.0 + x));
    return w;
}

struct RollingExcessSeries {
    int window_years = 1;
    std::vector<Date> dates;
    std::vector<double> values;  // annualized excess return, fraction
};

/// Annualized excess return over each trailing window of window_years * 252 days.
inline RollingExcessSeries rolling_excess(std::span<const double> p, std::span<const double> b,
                                          std::span<const Date> dates, int window_years) {
    if (p.size() != b.size() || p.size() != dates.size())
        throw Error(ErrorCode::MisalignedSeries, "rolling excess inputs differ in length");
    if (window_years < 1)
        throw Error(ErrorCode::WindowTooSmall, "window must be at least one year");
    RollingExcessSeries out;
    out.window_years = window_years;
    const std::size_t w = static_cast<std::size_t>(window_years) * kTradingDaysPerYear;
    for (std::size_t i = w; i <= p.size(); ++i) {
        out.dates.push_back(dates[i - 1]);
        out.values.push_back(annualized_return(p.subspan(i - w, w)) - annualized_return(b.subspan(i - w, w)));
    }
    return out;
}

struct CalendarYearRow {
    int year = 0;
    double gross = 0;  // fractions
    double net = 0;
    double benchmark = 0;
    double excess_gross = 0;
    double excess_net = 0;
    bool partial = false;
};

struct AnnualReturns {
    int year = 0;
    double gross = 0;
    double net = 0;
    double benchmark = 0;
};

inline CalendarYearRow make_calendar_row(const AnnualReturns& a, bool partial = false) {
    return {a.year, a.gross, a.net, a.benchmark, a.gross - a.benchmark, a.net - a.benchmark, partial};
}

/// Compounded returns per calendar year, newest year first. The first year
/// is partial when the path's base date lies inside it; the last when a
/// weekday of that year remains after the final date.
inline std::vector<CalendarYearRow> calendar_year_table(std::span<const Date> dates, std::span<const double> gross,
                                                        std::span<const double> net, std::span<const double> bench,
                                                        const Date& base) {
    if (gross.size() != dates.size() || net.size() != dates.size() || bench.size() != dates.size())
        throw Error(ErrorCode::MisalignedSeries, "calendar-year inputs differ in length");
    std::vector<CalendarYearRow> rows;
    std::size_t i = 0;
    while (i < dates.size()) {
        const int year = dates[i].year();
        AnnualReturns a{year, 1.0, 1.0, 1.0};
        std::size_t j = i;
        for (; j < dates.size() && dates[j].year() == year; ++j) {
            a.gross *= 1.0 + gross[j];
            a.net *= 1.0 + net[j];
            a.benchmark *= 1.0 + bench[j];
        }
        a.gross -= 1.0;
        a.net -= 1.0;
        a.benchmark -= 1.0;
        bool partial = (i == 0 && base.year() == year) ||
                       (j == dates.size() && !is_last_weekday_of_year(dates[j - 1]));
        rows.push_back(make_calendar_row(a, partial));
        i = j;
    }
    std::reverse(rows.begin(), rows.end());
    return rows;
}

enum class Horizon { OneYear, ThreeYear, FiveYear, TenYear, SinceInception };

inline constexpr std::array<Horizon, 5> kHorizons{Horizon::OneYear, Horizon::ThreeYear, Horizon::FiveYear,
                                                  Horizon::TenYear, Horizon::SinceInception};

inline std::string horizon_label(Horizon h) {
    switch (h) {
    case Horizon::OneYear: return "1-Year";
    case Horizon::ThreeYear: return "3-Year";
    case Horizon::FiveYear: return "5-Year";
    case Horizon::TenYear: return "10-Year";
    case Horizon::SinceInception: return "Since Inception";
    }
    return "?";
}

/// Trading days covered by a horizon; 0 means the whole path.
inline std::size_t horizon_days(Horizon h) {
    switch (h) {
    case Horizon::OneYear: return 1 * kTradingDaysPerYear;
    case Horizon::ThreeYear: return 3 * kTradingDaysPerYear;
    case Horizon::FiveYear: return 5 * kTradingDaysPerYear;
    case Horizon::TenYear: return 10 * kTradingDaysPerYear;
    case Horizon::SinceInception: return 0;
    }
    return 0;
}

/// One horizon column. Percent units for returns, deviations and TE.
/// Absent cells mean too little data or a zero denominator.
struct HorizonMetrics {
    std::optional<double> composite_net, composite_gross, index;
    std::optional<double> excess_net, excess_gross;
    std::optional<double> composite_std, index_std;
    std::optional<double> composite_sharpe, index_sharpe;
    std::optional<double> tracking_error, information_ratio;
    std::optional<double> composite_sortino, composite_calmar, composite_max_drawdown;
};

struct MetricPanel {
    Date as_of;
    std::array<HorizonMetrics, kHorizons.size()> columns;
};

namespace detail {

template <class F>
std::optional<double> guarded(F&& f) {
    try {
        return f();
    } catch (const Error&) {
        return std::nullopt;
    }
}

} // namespace detail

inline HorizonMetrics horizon_metrics(std::span<const double> gross, std::span<const double> net,
                                      std::span<const double> bench) {
    HorizonMetrics m;
    if (net.size() < 2)
        return m;
    const double pct = 100.0;
    double an = annualized_return(net), ag = annualized_return(gross), ab = annualized_return(bench);
    m.composite_net = an * pct;
    m.composite_gross = ag * pct;
    m.index = ab * pct;
    m.excess_net = (an - ab) * pct;
    m.excess_gross = (ag - ab) * pct;
    m.composite_std = annualized_volatility(net) * pct;
    m.index_std = annualized_volatility(bench) * pct;
    m.composite_sharpe = detail::guarded([&] { return sharpe_modified(net); });
    m.index_sharpe = detail::guarded([&] { return sharpe_modified(bench); });
    m.tracking_error = annualized_tracking_error(net, bench) * pct;
    m.information_ratio = detail::guarded([&] { return information_ratio(net, bench); });
    m.composite_sortino = detail::guarded([&] { return sortino_modified(net); });
    m.composite_calmar = detail::guarded([&] { return calmar(net); });
    m.composite_max_drawdown = max_drawdown(net) * pct;
    return m;
}

/// Metric panel over trailing horizons ending at the last date of the path.
inline MetricPanel compute_metric_panel(std::span<const Date> dates, std::span<const double> gross,
                                        std::span<const double> net, std::span<const double> bench) {
    if (dates.empty())
        throw Error(ErrorCode::EmptySeries, "metric panel of an empty path");
    MetricPanel panel;
    panel.as_of = dates.back();
    const std::size_t n = dates.size();
    for (std::size_t h = 0; h < kHorizons.size(); ++h) {
        std::size_t days = horizon_days(kHorizons[h]);
        if (days == 0)
            days = n;
        if (days > n)
            continue;
        panel.columns[h] =
            horizon_metrics(gross.subspan(n - days, days), net.subspan(n - days, days), bench.subspan(n - days, days));
    }
    return panel;
}

inline MetricPanel compute_metric_panel(const BacktestResult& r) {
    return compute_metric_panel(r.dates, r.gross, r.net, r.benchmark);
}

namespace detail {

inline std::string us_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02u/%02u/%04d", d.month(), d.day(), d.year());
    return buf;
}

} // namespace detail

/// Table-style export: one row per metric, one column per horizon.
inline void write_metric_panel(std::ostream& out, const MetricPanel& p) {
    using Field = std::optional<double> HorizonMetrics::*;
    static const std::array<std::pair<const char*, Field>, 11> rows{{
        {"Composite Net Return (%)", &HorizonMetrics::composite_net},
        {"Composite Gross Return (%)", &HorizonMetrics::composite_gross},
        {"Index Return (%)", &HorizonMetrics::index},
        {"Excess Return (net)", &HorizonMetrics::excess_net},
        {"Excess Return (gross)", &HorizonMetrics::excess_gross},
        {"Composite Standard Deviation", &HorizonMetrics::composite_std},
        {"Index Standard Deviation", &HorizonMetrics::index_std},
        {"Composite Sharpe Ratio", &HorizonMetrics::composite_sharpe},
        {"Index Sharpe Ratio", &HorizonMetrics::index_sharpe},
        {"Tracking Error", &HorizonMetrics::tracking_error},
        {"Information Ratio", &HorizonMetrics::information_ratio},
    }};
    out << csv::quote("Annualized as of " + detail::us_date(p.as_of));
    for (auto h : kHorizons)
        out << ',' << horizon_label(h);
    out << '\n';
    for (const auto& [label, field] : rows) {
        out << csv::quote(label);
        for (const auto& col : p.columns) {
            const auto& v = col.*field;
            out << ',' << (v ? csv::fixed(*v, 2) : "NA");
        }
        out << '\n';
    }
}

/// Downside and drawdown ratios that sit outside the main panel.
inline void write_risk_ratios(std::ostream& out, const MetricPanel& p) {
    using Field = std::optional<double> HorizonMetrics::*;
    static const std::array<std::pair<const char*, Field>, 3> rows{{
        {"Sortino Ratio", &HorizonMetrics::composite_sortino},
        {"Calmar Ratio", &HorizonMetrics::composite_calmar},
        {"Maximum Drawdown (%)", &HorizonMetrics::composite_max_drawdown},
    }};
    out << "metric";
    for (auto h : kHorizons)
        out << ',' << horizon_label(h);
    out << '\n';
    for (const auto& [label, field] : rows) {
        out << csv::quote(label);
        for (const auto& col : p.columns) {
            const auto& v = col.*field;
            out << ',' << (v ? csv::fixed(*v, 2) : "NA");
        }
        out << '\n';
    }
}

inline void write_calendar_years(std::ostream& out, const std::vector<CalendarYearRow>& rows) {
    out << "calendar_year,strategy_gross_pct,strategy_net_pct,benchmark_pct,excess_gross_pct,excess_net_pct,partial\n";
    for (const auto& r : rows)
        out << r.year << ',' << csv::fixed(r.gross * 100, 2) << ',' << csv::fixed(r.net * 100, 2) << ','
            << csv::fixed(r.benchmark * 100, 2) << ',' << csv::fixed(r.excess_gross * 100, 2) << ','
            << csv::fixed(r.excess_net * 100, 2) << ',' << (r.partial ? 1 : 0) << '\n';
}

} // namespace trendfolio
