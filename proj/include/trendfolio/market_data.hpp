#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "trendfolio/csv.hpp"
#include "trendfolio/date.hpp"
#include "trendfolio/error.hpp"

namespace trendfolio {

enum class AssetClass { Equity, FixedIncome, Alternative };

inline std::string to_string(AssetClass c) {
    switch (c) {
    case AssetClass::Equity: return "Equity";
    case AssetClass::FixedIncome: return "Fixed Income";
    case AssetClass::Alternative: return "Alternative";
    }
    return "?";
}

/// Accepts "Equity", "Fixed Income"/"FixedIncome", "Alternative"/"Alternatives".
inline std::optional<AssetClass> parse_asset_class(std::string_view s) {
    std::string k;
    for (char c : s)
        if (c != ' ' && c != '_')
            k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (k == "equity" || k == "equities")
        return AssetClass::Equity;
    if (k == "fixedincome")
        return AssetClass::FixedIncome;
    if (k == "alternative" || k == "alternatives")
        return AssetClass::Alternative;
    return std::nullopt;
}

struct AssetMeta {
    std::string id;
    AssetClass asset_class = AssetClass::Equity;
    std::string subset_description;
    std::set<std::string> risk_factors;
    std::string benchmark_id;
    std::optional<Date> inception_date;  // defaults to the first observation
};

struct Observation {
    Date date;
    double adjusted_close = 0.0;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Validated price history: dates strictly increasing, prices > 0.
struct PriceSeries {
    std::string asset_id;
    std::vector<Observation> observations;

    std::size_t size() const { return observations.size(); }
    bool empty() const { return observations.empty(); }
    const Date& first_date() const { return observations.front().date; }
    const Date& last_date() const { return observations.back().date; }

    /// Observations dated on or before `d`.
    PriceSeries truncated(const Date& d) const {
        PriceSeries out{asset_id, {}};
        for (const auto& o : observations)
            if (o.date <= d)
                out.observations.push_back(o);
        return out;
    }
};

namespace detail {

inline PriceSeries finish_series(std::string id, std::vector<std::pair<Observation, std::size_t>> rows) {
    if (rows.empty())
        throw Error(ErrorCode::EmptySeries, "no observations for " + id);
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first.date < b.first.date; });
    PriceSeries s{std::move(id), {}};
    s.observations.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].first.date == rows[i - 1].first.date)
            throw Error(ErrorCode::DuplicateDate, s.asset_id + " line " + std::to_string(rows[i].second) +
                                                      ": duplicate date " + rows[i].first.date.iso());
        s.observations.push_back(rows[i].first);
    }
    return s;
}

} // namespace detail

/// Parse a `date,adjusted_close` table. Rows may arrive in any order.
inline PriceSeries load_price_series(std::istream& in, const std::string& asset_id,
                                     std::optional<Date> inception = std::nullopt) {
    std::vector<std::string> header;
    auto rows = csv::read(in, header);
    if (header.size() < 2 || header[0] != "date" || header[1] != "adjusted_close")
        throw Error(ErrorCode::MalformedRow, asset_id + " line 1: expected header date,adjusted_close");
    std::vector<std::pair<Observation, std::size_t>> obs;
    obs.reserve(rows.size());
    for (const auto& r : rows) {
        auto where = asset_id + " line " + std::to_string(r.line);
        if (r.fields.size() != 2)
            throw Error(ErrorCode::MalformedRow, where + ": expected 2 fields");
        auto d = Date::parse(r.fields[0]);
        if (!d)
            throw Error(ErrorCode::MalformedRow, where + ": bad date '" + r.fields[0] + "'");
        double px = 0;
        if (!csv::parse_double(r.fields[1], px) || !(px > 0) || !std::isfinite(px))
            throw Error(ErrorCode::MalformedRow, where + ": bad price '" + r.fields[1] + "'");
        if (inception && *d < *inception)
            throw Error(ErrorCode::MalformedRow,
                        where + ": observation precedes inception date " + inception->iso());
        obs.emplace_back(Observation{*d, px}, r.line);
    }
    return detail::finish_series(asset_id, std::move(obs));
}

inline PriceSeries load_price_series(std::istream& in, const AssetMeta& meta) {
    return load_price_series(in, meta.id, meta.inception_date);
}

inline PriceSeries load_price_file(const std::filesystem::path& path, const std::string& asset_id,
                                   std::optional<Date> inception = std::nullopt) {
    auto in = csv::open_in(path.string());
    return load_price_series(in, asset_id, inception);
}

inline void write_price_series(std::ostream& out, const PriceSeries& s) {
    out << "date,adjusted_close\n";
    for (const auto& o : s.observations)
        out << o.date.iso() << ',' << csv::exact(o.adjusted_close) << '\n';
}

/// Universe manifest: etf_proxy,asset_class,subset_description,risk_factors,benchmark_id[,inception_date].
/// Risk factors are separated by ';' or ','.
inline std::vector<AssetMeta> load_universe(std::istream& in) {
    std::vector<std::string> header;
    auto rows = csv::read(in, header);
    auto col = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return i;
        return std::nullopt;
    };
    auto id_c = col("etf_proxy"), cls_c = col("asset_class"), desc_c = col("subset_description"),
         rf_c = col("risk_factors"), bm_c = col("benchmark_id"), inc_c = col("inception_date");
    if (!id_c || !cls_c || !desc_c || !rf_c || !bm_c)
        throw Error(ErrorCode::MalformedRow,
                    "universe line 1: header must contain etf_proxy,asset_class,subset_description,"
                    "risk_factors,benchmark_id");
    std::vector<AssetMeta> out;
    std::set<std::string> seen;
    for (const auto& r : rows) {
        auto where = "universe line " + std::to_string(r.line);
        if (r.fields.size() != header.size())
            throw Error(ErrorCode::MalformedRow, where + ": expected " + std::to_string(header.size()) + " fields");
        AssetMeta m;
        m.id = r.fields[*id_c];
        if (m.id.empty())
            throw Error(ErrorCode::MalformedRow, where + ": empty ticker");
        if (!seen.insert(m.id).second)
            throw Error(ErrorCode::MalformedRow, where + ": duplicate ticker " + m.id);
        auto cls = parse_asset_class(r.fields[*cls_c]);
        if (!cls)
            throw Error(ErrorCode::MalformedRow, where + ": unknown asset class '" + r.fields[*cls_c] + "'");
        m.asset_class = *cls;
        m.subset_description = r.fields[*desc_c];
        std::string tok;
        for (char c : r.fields[*rf_c] + ";") {
            if (c == ';' || c == ',') {
                if (auto t = csv::trim(tok); !t.empty())
                    m.risk_factors.insert(t);
                tok.clear();
            } else {
                tok.push_back(c);
            }
        }
        m.benchmark_id = r.fields[*bm_c];
        if (m.benchmark_id.empty())
            throw Error(ErrorCode::MalformedRow, where + ": empty benchmark_id");
        if (inc_c && !r.fields[*inc_c].empty()) {
            auto d = Date::parse(r.fields[*inc_c]);
            if (!d)
                throw Error(ErrorCode::MalformedRow, where + ": bad inception_date");
            m.inception_date = d;
        }
        out.push_back(std::move(m));
    }
    return out;
}

inline void write_universe(std::ostream& out, const std::vector<AssetMeta>& metas) {
    out << "etf_proxy,asset_class,subset_description,risk_factors,benchmark_id,inception_date\n";
    for (const auto& m : metas) {
        std::string rf;
        for (const auto& f : m.risk_factors)
            rf += (rf.empty() ? "" : ";") + f;
        out << csv::quote(m.id) << ',' << csv::quote(to_string(m.asset_class)) << ','
            << csv::quote(m.subset_description) << ',' << csv::quote(rf) << ',' << csv::quote(m.benchmark_id)
            << ',' << (m.inception_date ? m.inception_date->iso() : "") << '\n';
    }
}

class TradingCalendar {
public:
    TradingCalendar() = default;
    explicit TradingCalendar(std::vector<Date> dates) : dates_(std::move(dates)) {
        for (std::size_t i = 1; i < dates_.size(); ++i)
            if (!(dates_[i - 1] < dates_[i]))
                throw Error(ErrorCode::MisalignedSeries, "calendar dates must be strictly increasing");
    }

    std::size_t size() const { return dates_.size(); }
    bool empty() const { return dates_.empty(); }
    const Date& operator[](std::size_t i) const { return dates_[i]; }
    const Date& front() const { return dates_.front(); }
    const Date& back() const { return dates_.back(); }
    const std::vector<Date>& dates() const { return dates_; }

    std::optional<std::size_t> index_of(const Date& d) const {
        auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
        if (it == dates_.end() || *it != d)
            return std::nullopt;
        return static_cast<std::size_t>(it - dates_.begin());
    }

    std::size_t require_index(const Date& d) const {
        auto i = index_of(d);
        if (!i)
            throw Error(ErrorCode::DateOutsideCalendar, d.iso() + " is not a trading date");
        return *i;
    }

    /// Last trading day of a calendar month. The final date counts only when
    /// no weekday remains in its month, so the flag never depends on data
    /// beyond that date.
    bool is_month_end(std::size_t i) const {
        if (i + 1 < dates_.size())
            return !same_month(dates_[i], dates_[i + 1]);
        return is_last_weekday_of_month(dates_[i]);
    }

    friend bool operator==(const TradingCalendar&, const TradingCalendar&) = default;

private:
    std::vector<Date> dates_;
};

/// One series resampled onto the master calendar, covering the suffix
/// [first_index, calendar.size()).
struct AlignedSeries {
    std::string id;
    std::size_t first_index = 0;
    std::vector<double> prices;       // prices[k] is the price at calendar index first_index + k
    std::vector<bool> filled;         // true where the value was forward-filled
    std::size_t fill_count = 0;
    std::size_t dropped_off_calendar = 0;

    bool covers(std::size_t t) const { return t >= first_index && t < first_index + prices.size(); }
    double at(std::size_t t) const { return prices[t - first_index]; }
};

struct CalendarPolicy {
    double max_fill_fraction = 0.02;
};

class AlignedPanel {
public:
    TradingCalendar calendar;
    std::map<std::string, AlignedSeries> series;  // assets and benchmarks
    std::map<std::string, AssetMeta> assets;
    std::set<std::string> benchmarks;

    const AlignedSeries& get(const std::string& id) const {
        auto it = series.find(id);
        if (it == series.end())
            throw Error(ErrorCode::UnknownAsset, "no series for " + id);
        return it->second;
    }

    Date availability(const std::string& id) const { return calendar[get(id).first_index]; }

    std::vector<std::string> asset_ids() const {
        std::vector<std::string> ids;
        for (const auto& [id, m] : assets)
            ids.push_back(id);
        return ids;
    }

    /// Back out the panel's observations for one series as a PriceSeries.
    PriceSeries to_price_series(const std::string& id) const {
        const auto& s = get(id);
        PriceSeries out{id, {}};
        for (std::size_t k = 0; k < s.prices.size(); ++k)
            out.observations.push_back({calendar[s.first_index + k], s.prices[k]});
        return out;
    }
};

/// Price accessor pinned to an as-of index; reads past it throw LookAhead.
class PanelView {
public:
    PanelView(const AlignedPanel& panel, std::size_t as_of) : panel_(&panel), as_of_(as_of) {
        if (as_of >= panel.calendar.size())
            throw Error(ErrorCode::DateOutsideCalendar, "as-of index beyond calendar");
    }

    std::size_t as_of() const { return as_of_; }
    const AlignedPanel& panel() const { return *panel_; }

    double price(const std::string& id, std::size_t t) const {
        if (t > as_of_)
            throw Error(ErrorCode::LookAhead, "read of " + id + " at " + panel_->calendar[t].iso() +
                                                  " after as-of " + panel_->calendar[as_of_].iso());
        const auto& s = panel_->get(id);
        if (!s.covers(t))
            throw Error(ErrorCode::DateOutsideCalendar, id + " not available at " + panel_->calendar[t].iso());
        return s.at(t);
    }

private:
    const AlignedPanel* panel_;
    std::size_t as_of_;
};

namespace detail {

inline AlignedSeries resample(const PriceSeries& s, const TradingCalendar& cal, double max_fill) {
    AlignedSeries out;
    out.id = s.asset_id;
    std::size_t k = 0;
    std::optional<std::size_t> first;
    for (std::size_t t = 0; t < cal.size(); ++t) {
        // observations falling between calendar dates are dropped
        while (k < s.size() && s.observations[k].date < cal[t]) {
            ++out.dropped_off_calendar;
            ++k;
        }
        if (k < s.size() && s.observations[k].date == cal[t]) {
            if (!first)
                first = t;
            out.prices.push_back(s.observations[k].adjusted_close);
            out.filled.push_back(false);
            ++k;
        } else if (first) {
            out.prices.push_back(out.prices.back());
            out.filled.push_back(true);
            ++out.fill_count;
        }
    }
    out.dropped_off_calendar += s.size() - k;
    if (!first)
        throw Error(ErrorCode::EmptySeries, s.asset_id + " has no observation on the master calendar");
    out.first_index = *first;
    double frac = static_cast<double>(out.fill_count) / static_cast<double>(out.prices.size());
    if (frac > max_fill)
        throw Error(ErrorCode::ExcessiveGaps, s.asset_id + ": forward-filled " + std::to_string(out.fill_count) +
                                                  " of " + std::to_string(out.prices.size()) + " dates");
    return out;
}

} // namespace detail

/// Align assets and benchmarks onto the union of benchmark dates. Dates
/// before an asset's first observation stay unavailable; interior gaps are
/// forward-filled and counted.
inline AlignedPanel align_panel(const std::vector<std::pair<AssetMeta, PriceSeries>>& assets,
                                const std::vector<PriceSeries>& benchmarks, CalendarPolicy policy = {}) {
    if (benchmarks.empty())
        throw Error(ErrorCode::NoBenchmarkCoverage, "no benchmark series supplied");
    std::set<Date> all;
    for (const auto& b : benchmarks) {
        if (b.empty())
            throw Error(ErrorCode::EmptySeries, "benchmark " + b.asset_id + " is empty");
        for (const auto& o : b.observations)
            all.insert(o.date);
    }
    AlignedPanel panel;
    panel.calendar = TradingCalendar(std::vector<Date>(all.begin(), all.end()));
    bool spanning = std::any_of(benchmarks.begin(), benchmarks.end(), [&](const PriceSeries& b) {
        return b.first_date() == panel.calendar.front() && b.last_date() == panel.calendar.back();
    });
    if (!spanning)
        throw Error(ErrorCode::NoBenchmarkCoverage, "no benchmark spans " + panel.calendar.front().iso() +
                                                        " to " + panel.calendar.back().iso());
    for (const auto& b : benchmarks) {
        if (panel.series.count(b.asset_id))
            throw Error(ErrorCode::DuplicateDate, "benchmark " + b.asset_id + " supplied twice");
        panel.series.emplace(b.asset_id, detail::resample(b, panel.calendar, policy.max_fill_fraction));
        panel.benchmarks.insert(b.asset_id);
    }
    for (const auto& [meta, s] : assets) {
        if (meta.id != s.asset_id)
            throw Error(ErrorCode::UnknownAsset, "series " + s.asset_id + " paired with meta " + meta.id);
        if (panel.series.count(meta.id))
            throw Error(ErrorCode::MalformedRow, "asset id " + meta.id + " is not unique");
        if (!panel.benchmarks.count(meta.benchmark_id))
            throw Error(ErrorCode::UnknownAsset, meta.id + " references unknown benchmark " + meta.benchmark_id);
        if (meta.inception_date && !s.empty() && s.first_date() < *meta.inception_date)
            throw Error(ErrorCode::MalformedRow, meta.id + ": first observation precedes inception date");
        panel.series.emplace(meta.id, detail::resample(s, panel.calendar, policy.max_fill_fraction));
        panel.assets.emplace(meta.id, meta);
    }
    return panel;
}

/// Assets whose availability date is on or before `d` (inclusive boundary).
inline std::set<std::string> available_universe(const AlignedPanel& panel, const Date& d) {
    std::size_t t = panel.calendar.require_index(d);
    std::set<std::string> out;
    for (const auto& [id, meta] : panel.assets)
        if (panel.get(id).first_index <= t)
            out.insert(id);
    return out;
}

/// Write every series of the panel as `<id>.csv` plus `universe.csv` into `dir`.
inline void write_panel(const AlignedPanel& panel, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& [id, s] : panel.series) {
        auto out = csv::open_out((dir / (id + ".csv")).string());
        write_price_series(out, panel.to_price_series(id));
    }
    std::vector<AssetMeta> metas;
    for (const auto& [id, m] : panel.assets)
        metas.push_back(m);
    auto out = csv::open_out((dir / "universe.csv").string());
    write_universe(out, metas);
}

/// Load a universe manifest and its price files (`<data_dir>/<id>.csv`),
/// plus the named benchmark files, and align them.
inline AlignedPanel load_panel(const std::filesystem::path& data_dir, const std::vector<AssetMeta>& metas,
                               const std::set<std::string>& benchmark_ids, CalendarPolicy policy = {}) {
    std::vector<PriceSeries> bms;
    for (const auto& id : benchmark_ids)
        bms.push_back(load_price_file(data_dir / (id + ".csv"), id));
    std::vector<std::pair<AssetMeta, PriceSeries>> assets;
    for (const auto& m : metas)
        assets.emplace_back(m, load_price_file(data_dir / (m.id + ".csv"), m.id, m.inception_date));
    return align_panel(assets, bms, policy);
}

} // namespace trendfolio
