#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "support.hpp"
#include "trendfolio/market_data.hpp"

using namespace trendfolio;
using tf_test::meta;
using tf_test::series;
using tf_test::weekdays;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::Io;
}

} // namespace

TEST(LoadPriceSeries, ParsesValidRows) {
    std::istringstream in("date,adjusted_close\n2020-01-02,100\n2020-01-03,101.5\n2020-01-06,99.25\n");
    auto s = load_price_series(in, "IWD");
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.first_date(), Date(2020, 1, 2));
    EXPECT_DOUBLE_EQ(s.observations[1].adjusted_close, 101.5);
}

TEST(LoadPriceSeries, SortsOutOfOrderRows) {
    std::istringstream a("date,adjusted_close\n2020-01-02,100\n2020-01-03,101\n2020-01-06,102\n");
    std::istringstream b("date,adjusted_close\n2020-01-06,102\n2020-01-02,100\n2020-01-03,101\n");
    auto sa = load_price_series(a, "X");
    auto sb = load_price_series(b, "X");
    EXPECT_EQ(sa.observations, sb.observations);
}

TEST(LoadPriceSeries, RejectsZeroPriceNamingTheRow) {
    std::istringstream in("date,adjusted_close\n2020-01-02,100\n2020-01-03,0\n");
    try {
        load_price_series(in, "X");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MalformedRow);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(LoadPriceSeries, ErrorPaths) {
    EXPECT_EQ(code_of([] {
                  std::istringstream in("date,adjusted_close\n2020-13-02,100\n");
                  load_price_series(in, "X");
              }),
              ErrorCode::MalformedRow);
    EXPECT_EQ(code_of([] {
                  std::istringstream in("date,adjusted_close\n2020-01-02,abc\n");
                  load_price_series(in, "X");
              }),
              ErrorCode::MalformedRow);
    EXPECT_EQ(code_of([] {
                  std::istringstream in("date,adjusted_close\n");
                  load_price_series(in, "X");
              }),
              ErrorCode::EmptySeries);
    EXPECT_EQ(code_of([] {
                  std::istringstream in("date,adjusted_close\n2020-01-02,1\n2020-01-02,2\n");
                  load_price_series(in, "X");
              }),
              ErrorCode::DuplicateDate);
    EXPECT_EQ(code_of([] {
                  std::istringstream in("date,adjusted_close\n2020-01-02,1\n");
                  load_price_series(in, "X", Date(2020, 1, 3));
              }),
              ErrorCode::MalformedRow);
}

TEST(LoadUniverse, ParsesQuotedDescriptionsAndFactors) {
    std::istringstream in(
        "etf_proxy,asset_class,subset_description,risk_factors,benchmark_id,inception_date\n"
        "IWN,Equity,Small U.S. Growth Stocks,\"Capitalization, Growth\",SPX,2000-07-28\n"
        "EFA,Equity,\"Large Non-U.S. \"\"Developed Market\"\" Stocks\",Domicile,SPX,\n"
        "TIP,Fixed Income,U.S. Inflation-Protected Bonds,Inflation,AGG,\n");
    auto u = load_universe(in);
    ASSERT_EQ(u.size(), 3u);
    EXPECT_EQ(u[0].risk_factors, (std::set<std::string>{"Capitalization", "Growth"}));
    EXPECT_EQ(u[1].subset_description, "Large Non-U.S. \"Developed Market\" Stocks");
    EXPECT_EQ(u[2].asset_class, AssetClass::FixedIncome);
    EXPECT_EQ(*u[0].inception_date, Date(2000, 7, 28));
    EXPECT_FALSE(u[1].inception_date);

    std::ostringstream out;
    write_universe(out, u);
    std::istringstream back(out.str());
    auto u2 = load_universe(back);
    ASSERT_EQ(u2.size(), 3u);
    EXPECT_EQ(u2[1].subset_description, u[1].subset_description);
    EXPECT_EQ(u2[0].risk_factors, u[0].risk_factors);
}

TEST(LoadUniverse, RejectsDuplicateTicker) {
    std::istringstream in("etf_proxy,asset_class,subset_description,risk_factors,benchmark_id\n"
                          "A,Equity,d,f,SPX\nA,Equity,d,f,SPX\n");
    EXPECT_EQ(code_of([&] { load_universe(in); }), ErrorCode::MalformedRow);
}

TEST(AlignPanel, LateAssetBecomesAvailableAtFirstObservation) {
    auto d = weekdays(Date(2006, 12, 1), 60);
    std::vector<double> bpx(60, 100.0), apx(40, 50.0);
    auto panel = align_panel({{meta("A", "B"), series("A", d, apx, 20)}}, {series("B", d, bpx)});
    EXPECT_EQ(panel.availability("A"), d[20]);
    EXPECT_EQ(panel.get("A").first_index, 20u);
    EXPECT_EQ(panel.calendar.size(), 60u);
}

TEST(AlignPanel, IdenticalDatesGiveThatCalendar) {
    auto d = weekdays(Date(2020, 1, 1), 10);
    std::vector<double> px(10, 1.0);
    auto panel = align_panel({{meta("A", "B"), series("A", d, px)}}, {series("B", d, px), series("C", d, px)});
    EXPECT_EQ(panel.calendar.dates(), d);
}

TEST(AlignPanel, InteriorGapIsForwardFilledAndCounted) {
    auto d = weekdays(Date(2020, 1, 1), 100);
    std::vector<double> bpx(100, 100.0);
    auto a = series("A", d, std::vector<double>(100, 0.0));
    for (std::size_t i = 0; i < 100; ++i)
        a.observations[i].adjusted_close = 10.0 + static_cast<double>(i);
    a.observations.erase(a.observations.begin() + 50);
    auto panel = align_panel({{meta("A", "B"), a}}, {series("B", d, bpx)});
    const auto& s = panel.get("A");
    EXPECT_EQ(s.fill_count, 1u);
    EXPECT_TRUE(s.filled[50]);
    EXPECT_DOUBLE_EQ(s.at(50), 59.0);
    EXPECT_DOUBLE_EQ(s.at(51), 61.0);
}

TEST(AlignPanel, ExcessiveGapsAndCoverageErrors) {
    auto d = weekdays(Date(2020, 1, 1), 100);
    std::vector<double> px(100, 100.0);
    auto sparse = series("A", d, px);
    for (int k = 0; k < 5; ++k)
        sparse.observations.erase(sparse.observations.begin() + 10 + k * 10);
    EXPECT_EQ(code_of([&] { align_panel({{meta("A", "B"), sparse}}, {series("B", d, px)}); }),
              ErrorCode::ExcessiveGaps);
    EXPECT_EQ(code_of([&] { align_panel({{meta("A", "B"), series("A", d, px)}}, {}); }),
              ErrorCode::NoBenchmarkCoverage);
    // neither benchmark spans the union window
    std::vector<double> half(50, 1.0);
    EXPECT_EQ(code_of([&] { align_panel({}, {series("B", d, half), series("C", d, half, 50)}); }),
              ErrorCode::NoBenchmarkCoverage);
    EXPECT_EQ(code_of([&] { align_panel({{meta("A", "Z"), series("A", d, px)}}, {series("B", d, px)}); }),
              ErrorCode::UnknownAsset);
}

TEST(AvailableUniverse, BoundariesAreInclusive) {
    auto d = weekdays(Date(2020, 1, 1), 30);
    std::vector<double> px(30, 1.0);
    auto panel = align_panel({{meta("A", "B"), series("A", d, std::vector<double>(20, 1.0), 10)},
                              {meta("C", "B"), series("C", d, std::vector<double>(10, 1.0), 20)}},
                             {series("B", d, px)});
    EXPECT_TRUE(available_universe(panel, d[0]).empty());
    EXPECT_EQ(available_universe(panel, d[10]), (std::set<std::string>{"A"}));
    EXPECT_EQ(available_universe(panel, d[29]), (std::set<std::string>{"A", "C"}));
    EXPECT_EQ(code_of([&] { available_universe(panel, Date(2019, 1, 1)); }), ErrorCode::DateOutsideCalendar);
}

TEST(AvailableUniverse, IsMonotoneOverTheSyntheticPanel) {
    auto panel = tf_test::synthetic_panel();
    std::set<std::string> prev;
    for (std::size_t t = 0; t < panel.calendar.size(); t += 97) {
        auto cur = available_universe(panel, panel.calendar[t]);
        EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
        prev = cur;
    }
    EXPECT_EQ(available_universe(panel, panel.calendar.back()).size(), 21u);
}

TEST(PanelView, RejectsFutureReads) {
    auto d = weekdays(Date(2020, 1, 1), 10);
    std::vector<double> px(10, 1.0);
    auto panel = align_panel({}, {series("B", d, px)});
    PanelView view(panel, 4);
    EXPECT_DOUBLE_EQ(view.price("B", 4), 1.0);
    EXPECT_EQ(code_of([&] { view.price("B", 5); }), ErrorCode::LookAhead);
}

TEST(PanelSerialization, RoundTripReproducesObservations) {
    auto panel = tf_test::synthetic_panel();
    auto dir = std::filesystem::temp_directory_path() / "trendfolio_panel_roundtrip";
    std::filesystem::remove_all(dir);
    write_panel(panel, dir);
    auto in = csv::open_in((dir / "universe.csv").string());
    auto metas = load_universe(in);
    auto back = load_panel(dir, metas, panel.benchmarks);
    EXPECT_EQ(back.calendar, panel.calendar);
    for (const auto& [id, s] : panel.series) {
        EXPECT_EQ(back.to_price_series(id).observations, panel.to_price_series(id).observations) << id;
        EXPECT_EQ(back.get(id).first_index, s.first_index);
    }
    std::filesystem::remove_all(dir);
}

TEST(TradingCalendar, MonthEndFlagsNeverNeedFutureDates) {
    TradingCalendar cal({Date(2021, 1, 28), Date(2021, 1, 29), Date(2021, 2, 1), Date(2021, 2, 25)});
    EXPECT_FALSE(cal.is_month_end(0));
    EXPECT_TRUE(cal.is_month_end(1));  // next date is in February
    EXPECT_FALSE(cal.is_month_end(2));
    EXPECT_FALSE(cal.is_month_end(3));  // Feb 26 is a later weekday
    TradingCalendar end({Date(2021, 2, 25), Date(2021, 2, 26)});
    EXPECT_TRUE(end.is_month_end(1));
}
