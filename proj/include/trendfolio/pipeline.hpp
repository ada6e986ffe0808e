#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include <unistd.h>

#include "trendfolio/backtest.hpp"
#include "trendfolio/market_data.hpp"
#include "trendfolio/results_io.hpp"

namespace trendfolio {

struct BlendConfig {
    std::string name = "moderate";
    std::vector<std::pair<std::string, double>> components;  // strategy name, allocation
    std::vector<std::pair<std::string, double>> benchmark;   // benchmark id, weight
};

/// Declarative run description; relative paths resolve against the manifest's directory.
struct RunManifest {
    fs::path data_dir;
    fs::path universe;
    fs::path output_dir;
    double max_fill_fraction = 0.02;
    std::vector<StrategyConfig> strategies;
    std::optional<BlendConfig> blend;

    std::set<std::string> benchmark_ids(const std::vector<AssetMeta>& metas) const {
        std::set<std::string> ids;
        for (const auto& m : metas)
            ids.insert(m.benchmark_id);
        for (const auto& s : strategies)
            ids.insert(s.benchmark_id);
        if (blend)
            for (const auto& [id, w] : blend->benchmark)
                ids.insert(id);
        return ids;
    }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object())
        throw Error(ErrorCode::InvalidConfig, where + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k))
            throw Error(ErrorCode::InvalidConfig, where + ": unknown key '" + k + "'");
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key))
        throw Error(ErrorCode::InvalidConfig, where + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::InvalidConfig, where + ": key '" + key + "' has the wrong type");
    }
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& where) {
    return j.contains(key) ? get<T>(j, key, where) : fallback;
}

inline StrategyConfig parse_strategy(const json& j, std::size_t idx) {
    std::string where = "strategies[" + std::to_string(idx) + "]";
    check_keys(j,
               {"name", "asset_classes", "benchmark_id", "frequencies", "vol_window", "vote_mode", "spread_threshold",
                "te_window", "rebalance_period", "fee_rate_annual"},
               where);
    StrategyConfig s;
    s.name = get<std::string>(j, "name", where);
    where += " (" + s.name + ")";
    for (const auto& c : get<std::vector<std::string>>(j, "asset_classes", where)) {
        auto cls = parse_asset_class(c);
        if (!cls)
            throw Error(ErrorCode::InvalidConfig, where + ": unknown asset class '" + c + "'");
        s.asset_classes.insert(*cls);
    }
    s.benchmark_id = get<std::string>(j, "benchmark_id", where);
    if (j.contains("frequencies"))
        s.returns.frequencies = FrequencySet(get<std::vector<int>>(j, "frequencies", where));
    if (j.contains("vol_window"))
        s.returns.vol_window = get<int>(j, "vol_window", where);
    auto mode = get_or<std::string>(j, "vote_mode", "both", where);
    auto fm = parse_fusion_mode(mode);
    if (!fm)
        throw Error(ErrorCode::InvalidConfig, where + ": vote_mode must be both, either or joint_majority");
    s.vote_mode = *fm;
    if (j.contains("spread_threshold"))
        s.spread_threshold = get<double>(j, "spread_threshold", where);
    s.te_window = get_or<int>(j, "te_window", 63, where);
    s.rebalance_period = get_or<int>(j, "rebalance_period", 10, where);
    s.fee_rate_annual = get_or<double>(j, "fee_rate_annual", 0.0055, where);
    return s;
}

inline std::vector<std::pair<std::string, double>> parse_weights(const json& j, const std::string& key,
                                                                 const std::string& name_key,
                                                                 const std::string& weight_key,
                                                                 const std::string& where) {
    std::vector<std::pair<std::string, double>> out;
    if (!j.contains(key) || !j.at(key).is_array())
        throw Error(ErrorCode::InvalidConfig, where + ": '" + key + "' must be an array");
    std::size_t i = 0;
    for (const auto& e : j.at(key)) {
        auto w = where + "." + key + "[" + std::to_string(i++) + "]";
        check_keys(e, {name_key, weight_key}, w);
        out.emplace_back(get<std::string>(e, name_key, w), get<double>(e, weight_key, w));
    }
    return out;
}

} // namespace detail

inline RunManifest parse_manifest(const nlohmann::json& j, const fs::path& base_dir) {
    detail::check_keys(j, {"data_dir", "universe", "output_dir", "max_fill_fraction", "strategies", "blend"},
                       "manifest");
    RunManifest m;
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };
    m.data_dir = resolve(detail::get<std::string>(j, "data_dir", "manifest"));
    m.universe = resolve(detail::get<std::string>(j, "universe", "manifest"));
    m.output_dir = resolve(detail::get<std::string>(j, "output_dir", "manifest"));
    m.max_fill_fraction = detail::get_or<double>(j, "max_fill_fraction", 0.02, "manifest");
    if (!j.contains("strategies") || !j.at("strategies").is_array() || j.at("strategies").empty())
        throw Error(ErrorCode::InvalidConfig, "manifest: 'strategies' must be a nonempty array");
    std::size_t i = 0;
    for (const auto& s : j.at("strategies"))
        m.strategies.push_back(detail::parse_strategy(s, i++));
    if (j.contains("blend")) {
        const auto& b = j.at("blend");
        detail::check_keys(b, {"name", "components", "benchmark"}, "blend");
        BlendConfig bc;
        bc.name = detail::get_or<std::string>(b, "name", "moderate", "blend");
        bc.components = detail::parse_weights(b, "components", "strategy", "allocation", "blend");
        bc.benchmark = detail::parse_weights(b, "benchmark", "id", "weight", "blend");
        m.blend = std::move(bc);
    }
    return m;
}

inline RunManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::InvalidConfig, "cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
    }
    return parse_manifest(j, path.parent_path());
}

struct Finding {
    ErrorClass cls = ErrorClass::Config;
    std::string where;
    std::string message;
};

/// Check every config invariant, universe entry and price file. An empty
/// result means the manifest can be run.
inline std::vector<Finding> validate_manifest(const RunManifest& m) {
    std::vector<Finding> out;
    auto record = [&](const std::string& where, const Error& e) {
        out.push_back({e.error_class(), where, e.what()});
    };
    std::set<std::string> names;
    for (const auto& s : m.strategies) {
        if (!names.insert(s.name).second)
            out.push_back({ErrorClass::Config, "strategy " + s.name, "duplicate strategy name"});
        try {
            s.validate();
        } catch (const Error& e) {
            record("strategy " + s.name, e);
        }
    }
    if (!(m.max_fill_fraction >= 0 && m.max_fill_fraction <= 1))
        out.push_back({ErrorClass::Config, "manifest", "max_fill_fraction must lie in [0, 1]"});
    if (m.blend) {
        double a = 0, b = 0;
        for (const auto& [name, w] : m.blend->components) {
            a += w;
            if (!names.count(name))
                out.push_back({ErrorClass::Config, "blend", "unknown component strategy '" + name + "'"});
            if (w < 0)
                out.push_back({ErrorClass::Config, "blend", "negative allocation for '" + name + "'"});
        }
        for (const auto& [id, w] : m.blend->benchmark)
            b += w;
        if (std::abs(a - 1.0) > 1e-9)
            out.push_back({ErrorClass::Config, "blend", "allocations sum to " + std::to_string(a)});
        if (!m.blend->benchmark.empty() && std::abs(b - 1.0) > 1e-9)
            out.push_back({ErrorClass::Config, "blend", "benchmark weights sum to " + std::to_string(b)});
        if (names.count(m.blend->name))
            out.push_back({ErrorClass::Config, "blend", "name collides with a strategy"});
    }

    {
        // nearest existing ancestor of the output directory must accept writes
        fs::path probe = m.output_dir;
        while (!probe.empty() && !fs::exists(probe) && probe != probe.parent_path())
            probe = probe.parent_path();
        std::error_code ec;
        if (!fs::is_directory(probe, ec) || ::access(probe.c_str(), W_OK) != 0)
            out.push_back({ErrorClass::Data, m.output_dir.string(), "output directory is not writable"});
    }

    std::vector<AssetMeta> metas;
    try {
        auto in = csv::open_in(m.universe.string());
        metas = load_universe(in);
    } catch (const Error& e) {
        record(m.universe.string(), e);
        return out;
    }
    std::vector<std::pair<AssetMeta, PriceSeries>> assets;
    std::vector<PriceSeries> benchmarks;
    bool files_ok = true;
    for (const auto& id : m.benchmark_ids(metas)) {
        auto p = m.data_dir / (id + ".csv");
        try {
            if (!fs::exists(p))
                throw Error(ErrorCode::Io, "benchmark file " + p.string() + " is missing");
            benchmarks.push_back(load_price_file(p, id));
        } catch (const Error& e) {
            record(p.string(), e);
            files_ok = false;
        }
    }
    for (const auto& meta : metas) {
        auto p = m.data_dir / (meta.id + ".csv");
        try {
            if (!fs::exists(p))
                throw Error(ErrorCode::Io, "price file " + p.string() + " is missing");
            assets.emplace_back(meta, load_price_file(p, meta.id, meta.inception_date));
        } catch (const Error& e) {
            record(p.string(), e);
            files_ok = false;
        }
    }
    if (!files_ok)
        return out;
    try {
        auto panel = align_panel(assets, benchmarks, {m.max_fill_fraction});
        for (const auto& s : m.strategies) {
            bool any = false;
            for (const auto& [id, meta] : panel.assets)
                any = any || s.asset_classes.count(meta.asset_class) > 0;
            if (!any)
                out.push_back({ErrorClass::Config, "strategy " + s.name, "universe has no assets of its classes"});
        }
    } catch (const Error& e) {
        record("panel", e);
    }
    return out;
}

inline AlignedPanel load_manifest_panel(const RunManifest& m) {
    auto in = csv::open_in(m.universe.string());
    auto metas = load_universe(in);
    return load_panel(m.data_dir, metas, m.benchmark_ids(metas), {m.max_fill_fraction});
}

/// Run every strategy, then the blend, writing one directory per result
/// under the output directory. Returns the directories in run order.
inline std::vector<fs::path> run_manifest(const RunManifest& m) {
    auto panel = load_manifest_panel(m);
    std::vector<fs::path> dirs;
    std::map<std::string, BacktestResult> results;
    for (const auto& s : m.strategies) {
        BacktestResult r;
        try {
            r = run_backtest(s, panel);
        } catch (const Error& e) {
            throw Error(e.code(), "strategy " + s.name + ": " + e.message());
        }
        auto dir = m.output_dir / s.name;
        write_result(r, dir);
        dirs.push_back(dir);
        results.emplace(s.name, std::move(r));
    }
    if (m.blend) {
        BlendSpec spec;
        spec.name = m.blend->name;
        for (const auto& [name, a] : m.blend->components) {
            auto it = results.find(name);
            if (it == results.end())
                throw Error(ErrorCode::InvalidConfig, "blend references unknown strategy " + name);
            spec.components.emplace_back(it->second, a);
        }
        for (const auto& [id, w] : m.blend->benchmark)
            spec.benchmark.push_back(benchmark_leg(panel, id, w));
        auto r = blend_portfolios(spec);
        auto dir = m.output_dir / spec.name;
        write_result(r, dir);
        dirs.push_back(dir);
    }
    return dirs;
}

/// Analytics exports for one result directory, written to <dir>/report.
inline fs::path report_result_dir(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw Error(ErrorCode::MissingResultFiles, dir.string() + " is not a directory");
    auto r = read_result(dir);
    auto out = dir / "report";
    write_report(r, out);
    return out;
}

} // namespace trendfolio
