#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"
#include "trendfolio/signals.hpp"

using namespace trendfolio;
using tf_test::meta;
using tf_test::series;
using tf_test::weekdays;

namespace {

struct Fixture {
    AlignedPanel panel;
    ReturnPanel returns;
    SpreadPanel spreads;
};

Fixture make_fixture(std::uint64_t seed, std::size_t days, std::vector<int> freqs = {1, 5, 21},
                     std::vector<std::size_t> offsets = {0, 30, 200}) {
    std::mt19937_64 rng(seed);
    auto d = weekdays(Date(2015, 3, 2), days);
    auto b = tf_test::random_walk(rng, days, 0.008, 0.0002);
    std::vector<std::pair<AssetMeta, PriceSeries>> assets;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        std::string id = "A" + std::to_string(i);
        auto px = tf_test::random_walk(rng, days - offsets[i], 0.012, 0.0004 * (i % 2 ? -1 : 1));
        assets.emplace_back(meta(id, "B"), series(id, d, px, offsets[i]));
        ids.push_back(id);
    }
    Fixture f{align_panel(assets, {series("B", d, b)}), {}, {}};
    ReturnConfig cfg;
    cfg.frequencies = FrequencySet(freqs);
    f.returns = build_return_panel(f.panel, ids, cfg);
    f.spreads = build_spread_panel(f.returns);
    return f;
}

std::vector<double> padded(const AlignedSeries& s) {
    std::vector<double> v(s.first_index, kNaN);
    v.insert(v.end(), s.prices.begin(), s.prices.end());
    return v;
}

} // namespace

TEST(SpreadSignal, HandValues) {
    EXPECT_NEAR(spread_signal(2.0, 1.0, 10.0), 1.1, 1e-15);
    EXPECT_NEAR(spread_signal(1.0, 1.0, 0.0), 0.0, 1e-15);
    EXPECT_NEAR(spread_signal(0.5, 1.0, 0.0), -0.5, 1e-15);
    EXPECT_THROW(spread_signal(1.0, 0.0, 1.0), Error);
    EXPECT_THROW(spread_signal(1.0, 5e-10, 1.0), Error);
    EXPECT_FALSE(try_spread_signal(1.0, -1e-10, 1.0).has_value());
}

TEST(SpreadSignal, MatchesOracleOnRandomInputs) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-5, 5), v(0, 30);
    for (int i = 0; i < 1000; ++i) {
        double r = u(rng), m = u(rng), s = v(rng);
        if (std::abs(m) < 1e-3)
            continue;
        EXPECT_LT(tf_test::rel_err_floor(spread_signal(r, m, s), tf_test::oracle::spread(r, m, s)), 1e-12);
    }
}

TEST(SpreadPanel, UsesPercentMeanAndVolatility) {
    auto f = make_fixture(4, 300);
    const auto& r = f.returns.get("A0");
    const auto& f5 = r.frequency(5);
    const auto& s = f.spreads.get("A0", 1);
    std::size_t checked = 0;
    for (std::size_t t = 0; t < 300; ++t) {
        if (std::isnan(s.values[t]))
            continue;
        double expect = tf_test::oracle::spread(r.daily.values[t], f5.mean.values[t], f5.volatility.values[t]);
        EXPECT_LT(tf_test::rel_err_floor(s.values[t], expect, 1e-9), 1e-10);
        ++checked;
    }
    EXPECT_GT(checked, 250u);
}

TEST(Votes, StrictMajorityWithTiesToZero) {
    using V = std::vector<std::uint8_t>;
    EXPECT_EQ(majority(V{1, 1, 1, 0, 0, 0}), 0);
    EXPECT_EQ(majority(V{1, 1, 1, 1, 0, 0}), 1);
    EXPECT_EQ(majority(V{1, 0, 1}), 1);
    EXPECT_EQ(majority(V{0}), 0);
    EXPECT_EQ(majority(V{1}), 1);
    EXPECT_THROW(majority(V{}), Error);
}

TEST(Votes, MonotoneInCells) {
    // flipping any 0 to 1 never lowers the vote
    for (unsigned mask = 0; mask < 64; ++mask) {
        std::vector<std::uint8_t> v(6);
        for (int i = 0; i < 6; ++i)
            v[i] = (mask >> i) & 1;
        auto base = majority(v);
        for (int i = 0; i < 6; ++i) {
            if (v[i])
                continue;
            auto w = v;
            w[i] = 1;
            EXPECT_GE(majority(w), base);
        }
    }
}

TEST(Fusion, Modes) {
    EXPECT_EQ(fuse_majority_vote(1, 1), 1);
    EXPECT_EQ(fuse_majority_vote(1, 0), 0);
    EXPECT_EQ(fuse_majority_vote(0, 1), 0);
    EXPECT_EQ(fuse_majority_vote(0, 1, FusionMode::Either), 1);
    EXPECT_EQ(fuse_majority_vote(0, 0, FusionMode::Either), 0);
    EXPECT_THROW(fuse_majority_vote(1, 1, FusionMode::JointMajority), Error);
    EXPECT_EQ(parse_fusion_mode("both"), FusionMode::Both);
    EXPECT_FALSE(parse_fusion_mode("any").has_value());
}

TEST(SignalMatrix, ShapeAndColumnNames) {
    auto f = make_fixture(1, 400);
    auto m = build_signal_matrix(f.panel.calendar, f.returns, f.spreads, 399);
    ASSERT_EQ(m.columns.size(), 6u);
    EXPECT_EQ(m.columns[0].name(), "mom_1");
    EXPECT_EQ(m.columns[5].name(), "trend_21");
    ASSERT_EQ(m.rows.size(), 3u);
    for (const auto& r : m.rows)
        EXPECT_EQ(r.cells.size(), 6u);

    SignalCriteria c;
    c.spread_threshold = 0.0;
    auto with_spread = build_signal_matrix(f.panel.calendar, f.returns, f.spreads, 399, c);
    EXPECT_EQ(with_spread.columns.size(), 9u);
    EXPECT_EQ(with_spread.columns[8].name(), "spread_21");

    std::ostringstream out;
    write_signal_matrix(out, m);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
              "asset_id,mom_1,mom_5,mom_21,trend_1,trend_5,trend_21,momentum_vote,trend_vote,include");
}

TEST(SignalMatrix, OnlyAvailableAssetsAppear) {
    auto f = make_fixture(2, 400);
    auto m = build_signal_matrix(f.panel.calendar, f.returns, f.spreads, 100);
    EXPECT_EQ(m.rows.size(), 2u);
    EXPECT_EQ(m.find("A2"), nullptr);
    // A1 starts at 30 and has only 4 days of history at 34: long cells are 0
    auto early = build_signal_matrix(f.panel.calendar, f.returns, f.spreads, 34);
    const auto* a1 = early.find("A1");
    ASSERT_NE(a1, nullptr);
    EXPECT_EQ(a1->cells[2], 0);
    EXPECT_EQ(a1->cells[5], 0);
    EXPECT_THROW(build_signal_matrix(f.panel.calendar, f.returns, f.spreads, 10), Error);
}

TEST(SignalMatrix, MatchesBruteForceFromPrices) {
    auto f = make_fixture(3, 400);
    std::vector<int> freqs{1, 5, 21};
    for (std::size_t t = 21; t < 400; ++t) {
        auto m = build_signal_matrix(f.panel.calendar, f.returns, f.spreads, t);
        for (const auto& row : m.rows) {
            const auto& a = f.panel.get(row.asset_id);
            const auto& b = f.panel.get("B");
            auto o = tf_test::oracle::cells_from_prices(padded(a), padded(b), a.first_index, t, freqs);
            for (std::size_t k = 0; k < 3; ++k) {
                ASSERT_EQ(row.cells[k], o.momentum[k]) << row.asset_id << " t=" << t << " nu=" << freqs[k];
                ASSERT_EQ(row.cells[3 + k], o.trend[k]) << row.asset_id << " t=" << t << " nu=" << freqs[k];
            }
            auto mv = tf_test::oracle::strict_majority(o.momentum);
            auto tv = tf_test::oracle::strict_majority(o.trend);
            EXPECT_EQ(row.include, mv && tv ? 1 : 0);
        }
    }
}

TEST(SignalMatrix, AssetEqualToBenchmarkNeverVotesIn) {
    std::mt19937_64 rng(8);
    auto d = weekdays(Date(2018, 1, 1), 300);
    auto b = tf_test::random_walk(rng, 300, 0.01);
    auto panel = align_panel({{meta("X", "B"), series("X", d, b)}}, {series("B", d, b)});
    ReturnConfig cfg;
    cfg.frequencies = FrequencySet({1, 5, 21});
    auto rp = build_return_panel(panel, {"X"}, cfg);
    auto sp = build_spread_panel(rp);
    for (std::size_t t = 21; t < 300; ++t) {
        auto m = build_signal_matrix(panel.calendar, rp, sp, t);
        for (auto c : m.rows[0].cells)
            EXPECT_EQ(c, 0);
        EXPECT_EQ(m.rows[0].include, 0);
    }
}

TEST(SignalMatrix, StrongUptrendVotesIn) {
    auto d = weekdays(Date(2018, 1, 1), 100);
    std::vector<double> a, b(100, 50.0);
    for (int i = 0; i < 100; ++i)
        a.push_back(100.0 * std::pow(1.001, i));
    auto panel = align_panel({{meta("U", "B"), series("U", d, a)}}, {series("B", d, b)});
    ReturnConfig cfg;
    cfg.frequencies = FrequencySet({1, 5, 21});
    auto rp = build_return_panel(panel, {"U"}, cfg);
    auto m = build_signal_matrix(panel.calendar, rp, build_spread_panel(rp), 99);
    for (auto c : m.rows[0].cells)
        EXPECT_EQ(c, 1);
    EXPECT_EQ(m.rows[0].include, 1);
}

TEST(SignalMatrix, CustomCellRulesAreUsed) {
    auto f = make_fixture(5, 400);
    SignalCriteria c;
    c.momentum = [](const ReturnsView&, int) { return true; };
    c.trend = [](const ReturnsView&, int nu) { return nu != 21; };
    auto m = build_signal_matrix(f.panel.calendar, f.returns, f.spreads, 150, c);
    for (const auto& r : m.rows) {
        EXPECT_EQ(r.momentum_vote, 1);
        EXPECT_EQ(r.trend_vote, 1);
        EXPECT_EQ(r.include, 1);
    }
    c.mode = FusionMode::JointMajority;
    c.trend = [](const ReturnsView&, int) { return false; };
    auto j = build_signal_matrix(f.panel.calendar, f.returns, f.spreads, 150, c);
    for (const auto& r : j.rows)
        EXPECT_EQ(r.include, 0);  // 3 of 6 is a tie
}

TEST(ReturnsView, RejectsReadsPastAsOf) {
    auto f = make_fixture(6, 100, {1, 5, 21}, {0, 30});
    ReturnsView v(f.returns.get("A0"), 50);
    EXPECT_NO_THROW(v.compounded(50));
    try {
        v.daily_pct(51);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::LookAhead);
    }
}

TEST(SignalMatrix, TruncatedHistoryGivesIdenticalRows) {
    auto full = make_fixture(7, 400);
    for (std::size_t cut : {60u, 150u, 333u}) {
        // rebuild from prices up to `cut`
        std::vector<std::pair<AssetMeta, PriceSeries>> assets;
        std::vector<std::string> ids;
        for (const auto& [id, m] : full.panel.assets) {
            auto s = full.panel.to_price_series(id);
            std::erase_if(s.observations, [&](const Observation& o) { return o.date > full.panel.calendar[cut]; });
            if (s.observations.empty())
                continue;
            assets.emplace_back(m, s);
            ids.push_back(id);
        }
        auto bs = full.panel.to_price_series("B");
        std::erase_if(bs.observations, [&](const Observation& o) { return o.date > full.panel.calendar[cut]; });
        auto tp = align_panel(assets, {bs});
        ReturnConfig cfg;
        cfg.frequencies = FrequencySet({1, 5, 21});
        auto rp = build_return_panel(tp, ids, cfg);
        auto a = build_signal_matrix(full.panel.calendar, full.returns, full.spreads, cut);
        auto b = build_signal_matrix(tp.calendar, rp, build_spread_panel(rp), cut);
        EXPECT_EQ(a.rows, b.rows) << "cut=" << cut;
    }
}

TEST(SpreadSignal, MeanCancelsAndVolatilityOnly) {
    EXPECT_NEAR(spread_signal(2.0, 2.0, 1.0), 0.01, 1e-15);
    EXPECT_NEAR(spread_signal(4.0, 2.0, 0.0), 1.0, 1e-15);
}

TEST(Votes, TrendVoteExamples) {
    using V = std::vector<std::uint8_t>;
    EXPECT_EQ(trend_vote(V{1, 1, 1, 1, 1, 1}), 1);
    EXPECT_EQ(trend_vote(V{1, 0, 1, 0, 1, 0}), 0);
    EXPECT_EQ(trend_vote(V{1, 0, 0, 0, 0, 0}), 0);
    EXPECT_EQ(momentum_vote(V{0, 0, 0, 0, 0, 0}), 0);
}
