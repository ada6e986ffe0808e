#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "trendfolio/error.hpp"
#include "trendfolio/market_data.hpp"
#include "trendfolio/portfolio.hpp"
#include "trendfolio/returns.hpp"
#include "trendfolio/signals.hpp"

namespace trendfolio {

struct StrategyConfig {
    std::string name;
    std::set<AssetClass> asset_classes;
    std::string benchmark_id;
    ReturnConfig returns;
    FusionMode vote_mode = FusionMode::Both;
    std::optional<double> spread_threshold;
    int te_window = 63;
    int rebalance_period = 10;
    double fee_rate_annual = 0.0055;

    void validate() const {
        if (!(fee_rate_annual >= 0) || !std::isfinite(fee_rate_annual))
            throw Error(ErrorCode::InvalidConfig, name + ": fee_rate_annual must be >= 0");
        if (asset_classes.empty())
            throw Error(ErrorCode::InvalidConfig, name + ": universe (asset_classes) is empty");
        if (benchmark_id.empty())
            throw Error(ErrorCode::InvalidConfig, name + ": benchmark_id is empty");
        if (te_window < 2)
            throw Error(ErrorCode::InvalidConfig, name + ": te_window must be >= 2");
        if (rebalance_period < 1)
            throw Error(ErrorCode::InvalidConfig, name + ": rebalance_period must be >= 1");
        if (returns.vol_window && *returns.vol_window < 2)
            throw Error(ErrorCode::InvalidConfig, name + ": vol_window must be >= 2");
    }

    /// Trading days of ratio history an asset needs before it can receive weight.
    std::size_t required_history() const {
        return static_cast<std::size_t>(returns.frequencies.max()) + static_cast<std::size_t>(te_window);
    }

    SignalCriteria criteria() const {
        SignalCriteria c;
        c.mode = vote_mode;
        c.spread_threshold = spread_threshold;
        return c;
    }
};

struct RebalanceRecord {
    Date date;
    std::size_t index = 0;  // calendar index
    SignalMatrix signals;
    WeightVector target;
    double turnover = 0.0;  // one-way: 0.5 * sum |target - drifted|
    std::size_t available = 0;
    std::size_t eligible = 0;
    std::size_t included = 0;
};

/// Daily return paths start the trading day after `inception`; the
/// inception date is the first rebalance (the base of every wealth path).
struct BacktestResult {
    std::string name;
    std::string benchmark_id;
    Date inception;
    std::vector<Date> dates;
    std::vector<double> gross;
    std::vector<double> net;
    std::vector<double> benchmark;
    std::vector<WeightVector> holdings;  // end-of-day, after any rebalance
    std::vector<RebalanceRecord> rebalances;
};

/// Monthly fee at annual_rate / 12 applied on each month's final trading
/// day: net = (1 + gross) * (1 - rate / 12) - 1.
inline std::vector<double> apply_fees(std::span<const double> gross, double fee_rate_annual,
                                      const TradingCalendar& calendar) {
    if (calendar.size() != gross.size())
        throw Error(ErrorCode::MisalignedSeries, "fee calendar and return path differ in length");
    if (!(fee_rate_annual >= 0))
        throw Error(ErrorCode::InvalidConfig, "fee rate must be >= 0");
    const double keep = 1.0 - fee_rate_annual / 12.0;
    std::vector<double> net(gross.begin(), gross.end());
    if (fee_rate_annual == 0)
        return net;
    for (std::size_t i = 0; i < net.size(); ++i)
        if (calendar.is_month_end(i))
            net[i] = (1.0 + gross[i]) * keep - 1.0;
    return net;
}

namespace detail {

inline double simple_return(const AlignedSeries& s, std::size_t t) { return s.at(t) / s.at(t - 1) - 1.0; }

/// Apply one day of returns to end-of-day weights; returns the portfolio return.
inline double drift(std::map<std::string, double>& w, double& cash, const std::map<std::string, double>& r) {
    double port = 0.0;
    for (const auto& [id, x] : w)
        port += x * r.at(id);
    const double grow = 1.0 + port;
    if (!(grow > 0))
        throw Error(ErrorCode::NonPositiveGrowthFactor, "portfolio value wiped out");
    for (auto& [id, x] : w)
        x = x * (1.0 + r.at(id)) / grow;
    cash = cash / grow;
    return port;
}

inline double turnover(const std::map<std::string, double>& from, double from_cash, const WeightVector& to) {
    double s = std::abs(to.cash_weight - from_cash);
    std::set<std::string> ids;
    for (const auto& [id, x] : from)
        ids.insert(id);
    for (const auto& [id, x] : to.weights)
        ids.insert(id);
    for (const auto& id : ids) {
        double a = from.count(id) ? from.at(id) : 0.0;
        double b = to.weights.count(id) ? to.weights.at(id) : 0.0;
        s += std::abs(a - b);
    }
    return 0.5 * s;
}

} // namespace detail

/// Day-by-day simulation of one strategy over an aligned panel. Weights set
/// at a rebalance date's close use data up to that date and earn from the
/// next trading day.
inline BacktestResult run_backtest(const StrategyConfig& config, const AlignedPanel& panel) {
    config.validate();
    if (!panel.benchmarks.count(config.benchmark_id))
        throw Error(ErrorCode::ConfigUniverseUnavailable,
                    config.name + ": benchmark " + config.benchmark_id + " not loaded");
    std::vector<std::string> universe;
    for (const auto& [id, meta] : panel.assets)
        if (config.asset_classes.count(meta.asset_class))
            universe.push_back(id);
    if (universe.empty())
        throw Error(ErrorCode::ConfigUniverseUnavailable, config.name + ": no assets of the configured classes");

    const auto& cal = panel.calendar;
    const std::size_t n = cal.size();
    ReturnPanel rp = build_return_panel(panel, universe, config.returns);
    SpreadPanel spreads = build_spread_panel(rp);
    const SignalCriteria criteria = config.criteria();
    const std::size_t need = config.required_history();

    std::size_t start = n;
    for (const auto& [id, r] : rp.assets)
        start = std::min(start, r.first_index + need);
    if (start >= n)
        throw Error(ErrorCode::InsufficientHistory, config.name + ": no asset accumulates " + std::to_string(need) +
                                                        " trading days of history");
    const auto schedule = rebalance_schedule(cal, cal[start], config.rebalance_period);
    const auto& bench = panel.get(config.benchmark_id);
    if (bench.first_index > start)
        throw Error(ErrorCode::InsufficientHistory, config.name + ": benchmark starts after first rebalance");

    BacktestResult res;
    res.name = config.name;
    res.benchmark_id = config.benchmark_id;
    res.inception = cal[start];

    std::map<std::string, double> w;
    double cash = 1.0;
    std::vector<Date> fee_dates;

    auto rebalance = [&](std::size_t t) {
        PanelView view(panel, t);
        RebalanceRecord rec;
        rec.date = cal[t];
        rec.index = t;
        rec.signals = build_signal_matrix(cal, rp, spreads, t, criteria);
        rec.available = rec.signals.rows.size();
        std::vector<std::string> chosen;
        for (const auto& row : rec.signals.rows) {
            const bool eligible = t >= rp.get(row.asset_id).first_index + need;
            rec.eligible += eligible ? 1 : 0;
            if (eligible && row.include)
                chosen.push_back(row.asset_id);
        }
        rec.included = chosen.size();
        rec.target = inverse_te_weights(
            compute_tracking_errors(view, chosen, static_cast<std::size_t>(config.te_window)));
        rec.target.date = cal[t];
        rec.turnover = detail::turnover(w, cash, rec.target);
        w = rec.target.weights;
        cash = rec.target.cash_weight;
        res.rebalances.push_back(std::move(rec));
    };

    rebalance(start);
    std::size_t next = 1;
    std::map<std::string, double> day_ret;
    for (std::size_t t = start + 1; t < n; ++t) {
        day_ret.clear();
        for (const auto& [id, x] : w)
            day_ret[id] = detail::simple_return(panel.get(id), t);
        res.dates.push_back(cal[t]);
        res.gross.push_back(detail::drift(w, cash, day_ret));
        res.benchmark.push_back(detail::simple_return(bench, t));
        if (next < schedule.indices.size() && schedule.indices[next] == t) {
            rebalance(t);
            ++next;
        }
        WeightVector h;
        h.date = cal[t];
        h.weights = w;
        h.cash_weight = cash;
        res.holdings.push_back(std::move(h));
    }
    res.net = apply_fees(res.gross, config.fee_rate_annual, TradingCalendar(res.dates));
    return res;
}

struct BlendBenchmarkLeg {
    std::string id;
    double weight = 0.0;
    std::vector<Date> dates;
    std::vector<double> returns;
};

struct BlendSpec {
    std::string name = "blend";
    std::vector<std::pair<BacktestResult, double>> components;  // result, target allocation
    std::vector<BlendBenchmarkLeg> benchmark;                   // e.g. 60% equity index, 40% bond index
};

/// Benchmark leg built from a panel series (daily simple returns for all
/// dates after the series' first).
inline BlendBenchmarkLeg benchmark_leg(const AlignedPanel& panel, const std::string& id, double weight) {
    const auto& s = panel.get(id);
    BlendBenchmarkLeg leg{id, weight, {}, {}};
    for (std::size_t t = s.first_index + 1; t < panel.calendar.size(); ++t) {
        leg.dates.push_back(panel.calendar[t]);
        leg.returns.push_back(detail::simple_return(s, t));
    }
    return leg;
}

namespace detail {

/// Drifting fixed-mix of several return streams, reset to target on `reset` days.
inline std::vector<double> fixed_mix(const std::vector<std::vector<double>>& streams, const std::vector<double>& target,
                                     const std::vector<bool>& reset) {
    const std::size_t days = streams.empty() ? 0 : streams.front().size();
    std::vector<double> w = target;
    std::vector<double> out(days);
    for (std::size_t d = 0; d < days; ++d) {
        double port = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k)
            port += w[k] * streams[k][d];
        const double grow = 1.0 + port;
        if (!(grow > 0))
            throw Error(ErrorCode::NonPositiveGrowthFactor, "blend value wiped out");
        for (std::size_t k = 0; k < w.size(); ++k)
            w[k] = w[k] * (1.0 + streams[k][d]) / grow;
        out[d] = port;
        if (reset[d])
            w = target;
    }
    return out;
}

inline std::vector<double> tail_from(const std::vector<Date>& dates, const std::vector<double>& v, const Date& after,
                                     const std::vector<Date>& expect, const std::string& who) {
    auto it = std::upper_bound(dates.begin(), dates.end(), after);
    auto off = static_cast<std::size_t>(it - dates.begin());
    if (dates.size() - off != expect.size() || !std::equal(expect.begin(), expect.end(), it))
        throw Error(ErrorCode::CalendarMismatch, who + " does not share the blend calendar");
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(off), v.end());
}

} // namespace detail

/// Fixed-allocation blend of component strategies, reset to target at every
/// component rebalance date. The blended benchmark drifts and resets on the
/// same dates.
inline BacktestResult blend_portfolios(const BlendSpec& spec) {
    if (spec.components.empty())
        throw Error(ErrorCode::InvalidConfig, spec.name + ": blend has no components");
    double asum = 0, bsum = 0;
    for (const auto& [r, a] : spec.components) {
        if (!(a >= 0))
            throw Error(ErrorCode::InvalidConfig, spec.name + ": negative allocation");
        asum += a;
    }
    for (const auto& leg : spec.benchmark)
        bsum += leg.weight;
    if (std::abs(asum - 1.0) > 1e-9)
        throw Error(ErrorCode::InvalidConfig, spec.name + ": allocations sum to " + std::to_string(asum));
    if (!spec.benchmark.empty() && std::abs(bsum - 1.0) > 1e-9)
        throw Error(ErrorCode::InvalidConfig, spec.name + ": benchmark weights sum to " + std::to_string(bsum));

    Date base = spec.components.front().first.inception;
    for (const auto& [r, a] : spec.components)
        base = std::max(base, r.inception);
    // the component that starts last defines the blend calendar
    std::vector<Date> dates;
    for (const auto& [r, a] : spec.components)
        if (r.inception == base) {
            dates = r.dates;
            break;
        }

    std::vector<std::vector<double>> gross, net;
    std::vector<double> target;
    std::set<Date> resets;
    for (const auto& [r, a] : spec.components) {
        gross.push_back(detail::tail_from(r.dates, r.gross, base, dates, r.name));
        net.push_back(detail::tail_from(r.dates, r.net, base, dates, r.name));
        target.push_back(a);
        for (const auto& rb : r.rebalances)
            if (rb.date > base)
                resets.insert(rb.date);
    }
    std::vector<bool> reset(dates.size());
    for (std::size_t d = 0; d < dates.size(); ++d)
        reset[d] = resets.count(dates[d]) > 0;

    BacktestResult out;
    out.name = spec.name;
    out.inception = base;
    out.dates = dates;
    out.gross = detail::fixed_mix(gross, target, reset);
    out.net = detail::fixed_mix(net, target, reset);
    if (spec.benchmark.empty()) {
        out.benchmark.assign(dates.size(), 0.0);
    } else {
        std::vector<std::vector<double>> legs;
        std::vector<double> lw;
        for (const auto& leg : spec.benchmark) {
            out.benchmark_id += (out.benchmark_id.empty() ? "" : "+") + leg.id;
            legs.push_back(detail::tail_from(leg.dates, leg.returns, base, dates, "benchmark " + leg.id));
            lw.push_back(leg.weight);
        }
        out.benchmark = detail::fixed_mix(legs, lw, reset);
    }

    // holdings: component weights, drifted with gross returns
    std::vector<double> w = target;
    auto make_record = [&](const Date& d, double turnover) {
        RebalanceRecord rec;
        rec.date = d;
        rec.target.date = d;
        rec.target.cash_weight = 0.0;
        for (std::size_t k = 0; k < target.size(); ++k)
            rec.target.weights[spec.components[k].first.name] = target[k];
        rec.turnover = turnover;
        rec.available = rec.eligible = rec.included = target.size();
        out.rebalances.push_back(std::move(rec));
    };
    make_record(base, 0.0);
    for (std::size_t d = 0; d < dates.size(); ++d) {
        const double grow = 1.0 + out.gross[d];
        for (std::size_t k = 0; k < w.size(); ++k)
            w[k] = w[k] * (1.0 + gross[k][d]) / grow;
        if (reset[d]) {
            double t = 0;
            for (std::size_t k = 0; k < w.size(); ++k)
                t += std::abs(w[k] - target[k]);
            make_record(dates[d], 0.5 * t);
            w = target;
        }
        WeightVector h;
        h.date = dates[d];
        h.cash_weight = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k)
            h.weights[spec.components[k].first.name] = w[k];
        out.holdings.push_back(std::move(h));
    }
    return out;
}

} // namespace trendfolio
