#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "trendfolio/analytics.hpp"
#include "trendfolio/backtest.hpp"
#include "trendfolio/csv.hpp"

namespace trendfolio {

namespace fs = std::filesystem;

/// Write every artifact of a backtest into `dir` (created if missing):
/// meta.csv, returns.csv, holdings.csv, weights.csv, rebalance_log.csv and
/// one signals/<date>.csv per rebalance.
inline void write_result(const BacktestResult& r, const fs::path& dir) {
    fs::create_directories(dir);
    fs::remove_all(dir / "signals");
    {
        auto out = csv::open_out((dir / "meta.csv").string());
        out << "key,value\n"
            << "name," << csv::quote(r.name) << '\n'
            << "benchmark_id," << csv::quote(r.benchmark_id) << '\n'
            << "inception," << r.inception.iso() << '\n';
    }
    {
        auto out = csv::open_out((dir / "returns.csv").string());
        out << "date,gross,net,benchmark\n";
        for (std::size_t i = 0; i < r.dates.size(); ++i)
            out << r.dates[i].iso() << ',' << csv::exact(r.gross[i]) << ',' << csv::exact(r.net[i]) << ','
                << csv::exact(r.benchmark[i]) << '\n';
    }
    {
        auto out = csv::open_out((dir / "holdings.csv").string());
        out << "date,asset_id,weight\n";
        for (const auto& h : r.holdings) {
            for (const auto& [id, w] : h.weights)
                out << h.date.iso() << ',' << csv::quote(id) << ',' << csv::exact(w) << '\n';
            out << h.date.iso() << ",CASH," << csv::exact(h.cash_weight) << '\n';
        }
    }
    {
        auto out = csv::open_out((dir / "weights.csv").string());
        write_weights_header(out);
        for (const auto& rb : r.rebalances) {
            if (rb.target.tracking_errors.empty() && !rb.target.weights.empty()) {
                // blend targets carry no tracking errors
                for (const auto& [id, w] : rb.target.weights)
                    out << rb.date.iso() << ',' << csv::quote(id) << ',' << csv::exact(w) << ",NA,"
                        << csv::exact(rb.target.cash_weight) << '\n';
            } else {
                write_weights(out, rb.target);
            }
        }
    }
    {
        auto out = csv::open_out((dir / "rebalance_log.csv").string());
        out << "date,available,eligible,included,cash_weight,turnover,te_floor_clamped\n";
        for (const auto& rb : r.rebalances) {
            std::string clamped;
            for (const auto& id : rb.target.clamped)
                clamped += (clamped.empty() ? "" : ";") + id;
            out << rb.date.iso() << ',' << rb.available << ',' << rb.eligible << ',' << rb.included << ','
                << csv::exact(rb.target.cash_weight) << ',' << csv::exact(rb.turnover) << ',' << csv::quote(clamped)
                << '\n';
        }
    }
    bool any_signals = false;
    for (const auto& rb : r.rebalances)
        any_signals = any_signals || !rb.signals.rows.empty();
    if (any_signals) {
        fs::create_directories(dir / "signals");
        for (const auto& rb : r.rebalances) {
            if (rb.signals.rows.empty())
                continue;
            auto out = csv::open_out((dir / "signals" / (rb.date.iso() + ".csv")).string());
            write_signal_matrix(out, rb.signals);
        }
    }
}

/// Read back the return paths and identity of a result directory.
inline BacktestResult read_result(const fs::path& dir) {
    const auto meta_p = dir / "meta.csv", ret_p = dir / "returns.csv";
    if (!fs::exists(meta_p) || !fs::exists(ret_p))
        throw Error(ErrorCode::MissingResultFiles, dir.string() + " lacks meta.csv or returns.csv");
    BacktestResult r;
    {
        auto in = csv::open_in(meta_p.string());
        std::vector<std::string> header;
        std::map<std::string, std::string> kv;
        for (auto& row : csv::read(in, header))
            if (row.fields.size() == 2)
                kv[row.fields[0]] = row.fields[1];
        r.name = kv["name"];
        r.benchmark_id = kv["benchmark_id"];
        auto d = Date::parse(kv["inception"]);
        if (!d)
            throw Error(ErrorCode::MalformedRow, meta_p.string() + ": bad inception date");
        r.inception = *d;
    }
    auto in = csv::open_in(ret_p.string());
    std::vector<std::string> header;
    for (const auto& row : csv::read(in, header)) {
        auto where = ret_p.string() + " line " + std::to_string(row.line);
        if (row.fields.size() != 4)
            throw Error(ErrorCode::MalformedRow, where + ": expected 4 fields");
        auto d = Date::parse(row.fields[0]);
        double g, n, b;
        if (!d || !csv::parse_double(row.fields[1], g) || !csv::parse_double(row.fields[2], n) ||
            !csv::parse_double(row.fields[3], b))
            throw Error(ErrorCode::MalformedRow, where);
        r.dates.push_back(*d);
        r.gross.push_back(g);
        r.net.push_back(n);
        r.benchmark.push_back(b);
    }
    if (r.dates.empty())
        throw Error(ErrorCode::MissingResultFiles, ret_p.string() + " has no rows");
    return r;
}

/// Analytics exports for one result: metrics.csv (annualized panel),
/// risk_ratios.csv, calendar_years.csv, rolling_excess_{1,3,5}y.csv and
/// growth_of_dollar.csv.
inline void write_report(const BacktestResult& r, const fs::path& dir) {
    fs::create_directories(dir);
    const auto panel = compute_metric_panel(r);
    {
        auto out = csv::open_out((dir / "metrics.csv").string());
        write_metric_panel(out, panel);
    }
    {
        auto out = csv::open_out((dir / "risk_ratios.csv").string());
        write_risk_ratios(out, panel);
    }
    {
        auto out = csv::open_out((dir / "calendar_years.csv").string());
        write_calendar_years(out, calendar_year_table(r.dates, r.gross, r.net, r.benchmark, r.inception));
    }
    for (int years : {1, 3, 5}) {
        auto out = csv::open_out((dir / ("rolling_excess_" + std::to_string(years) + "y.csv")).string());
        out << "date,excess_gross,excess_net\n";
        auto g = rolling_excess(r.gross, r.benchmark, r.dates, years);
        auto n = rolling_excess(r.net, r.benchmark, r.dates, years);
        for (std::size_t i = 0; i < g.dates.size(); ++i)
            out << g.dates[i].iso() << ',' << csv::exact(g.values[i]) << ',' << csv::exact(n.values[i]) << '\n';
    }
    {
        auto out = csv::open_out((dir / "growth_of_dollar.csv").string());
        out << "date,strategy_gross,strategy_net,benchmark\n";
        auto g = growth_of_dollar(r.gross), n = growth_of_dollar(r.net), b = growth_of_dollar(r.benchmark);
        for (std::size_t i = 0; i < g.size(); ++i)
            out << (i == 0 ? r.inception : r.dates[i - 1]).iso() << ',' << csv::exact(g[i]) << ','
                << csv::exact(n[i]) << ',' << csv::exact(b[i]) << '\n';
    }
}

} // namespace trendfolio
