#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "kfrev/errors.hpp"
#include "kfrev/market_data.hpp"
#include "test_support.hpp"

namespace kfrev {
namespace {

using testing::day;
using testing::nth_day;

const std::string kHeader = "Date,Open,High,Low,Close,Volume\n";

CsvLoad parse(const std::string& text) {
  std::istringstream in(text);
  return read_csv(in, "TEST");
}

std::string row(Date d, double o, double h, double l, double c, double v = 100) {
  std::ostringstream out;
  out << format_date(d) << ',' << o << ',' << h << ',' << l << ',' << c << ',' << v << '\n';
  return out.str();
}

std::string good_rows(int n, int first_day = 0) {
  std::string text;
  for (int i = 0; i < n; ++i) text += row(nth_day(first_day + i), 10 + i, 11 + i, 9 + i, 10.5 + i);
  return text;
}

TEST(CsvLoader, ReadsWellFormedRows) {
  const auto load = parse(kHeader + row(day(2024, 1, 2), 10, 11, 9, 10.5, 500) +
                          row(day(2024, 1, 3), 10.5, 12, 10, 11.5, 600) +
                          row(day(2024, 1, 4), 11.5, 11.6, 11, 11.2, 700));
  ASSERT_EQ(load.series.size(), 3u);
  EXPECT_EQ(load.rows, 3u);
  EXPECT_EQ(load.skipped, 0u);
  EXPECT_FALSE(load.resorted);
  EXPECT_EQ(load.series.bars()[1], (Bar{day(2024, 1, 3), 10.5, 12, 10, 11.5, 600}));
  EXPECT_EQ(load.series.basis(), PriceBasis::Close);
}

TEST(CsvLoader, ColumnOrderComesFromHeader) {
  const auto load = parse("Volume,Close,Low,High,Open,Date\n100,10.5,9,11,10,2024-01-02\n");
  EXPECT_EQ(load.series.bars()[0], (Bar{day(2024, 1, 2), 10, 11, 9, 10.5, 100}));
}

TEST(CsvLoader, SkipsZeroCloseRowAndCountsIt) {
  std::string text = kHeader + good_rows(20, 0);
  text += row(nth_day(30), 10, 11, 9, 0);
  const auto load = parse(text);
  EXPECT_EQ(load.rows, 21u);
  EXPECT_EQ(load.skipped, 1u);
  EXPECT_EQ(load.series.size(), 20u);
}

TEST(CsvLoader, SkipsMalformedAndInconsistentRows) {
  std::string text = kHeader + good_rows(40, 0);
  text += "2024-03-01,abc,11,9,10,1\n";                  // not a number
  text += row(nth_day(61), 10, 9.5, 9, 9.2);               // high below open
  const auto load = parse(text);
  EXPECT_EQ(load.skipped, 2u);
  EXPECT_EQ(load.series.size(), 40u);
  for (const auto& b : load.series.bars()) EXPECT_TRUE(is_valid(b));
}

TEST(CsvLoader, TooManyBadRowsAborts) {
  std::string text = kHeader + good_rows(10, 0);
  text += row(nth_day(20), 10, 11, 9, -1);
  EXPECT_THROW(parse(text), DataError);
}

TEST(CsvLoader, ResortsShuffledRows) {
  const std::vector<std::string> rows = {row(day(2024, 1, 4), 3, 3, 3, 3),
                                         row(day(2024, 1, 2), 1, 1, 1, 1),
                                         row(day(2024, 1, 3), 2, 2, 2, 2)};
  const auto load = parse(kHeader + rows[0] + rows[1] + rows[2]);
  const auto sorted = parse(kHeader + rows[1] + rows[2] + rows[0]);
  EXPECT_TRUE(load.resorted);
  EXPECT_FALSE(load.warnings.empty());
  EXPECT_EQ(load.series, sorted.series);
}

TEST(CsvLoader, DuplicateDateFails) {
  EXPECT_THROW(parse(kHeader + row(day(2024, 1, 2), 1, 1, 1, 1) + row(day(2024, 1, 2), 2, 2, 2, 2)),
               DataError);
}

TEST(CsvLoader, StructuralFailures) {
  EXPECT_THROW(parse(""), DataError);
  EXPECT_THROW(parse(kHeader), DataError);
  EXPECT_THROW(parse("Date,Open,High,Low,Volume\n2024-01-02,1,1,1,1\n"), DataError);
  EXPECT_THROW(load_csv("/nonexistent/kfrev/none.csv", "X"), DataError);
}

TEST(CsvLoader, AdjustedCloseScalesAllPrices) {
  const auto load =
      parse("Date,Open,High,Low,Close,Adj Close,Volume\n2024-01-02,20,22,18,20,10,100\n");
  EXPECT_EQ(load.series.basis(), PriceBasis::AdjustedClose);
  EXPECT_EQ(load.series.bars()[0], (Bar{day(2024, 1, 2), 10, 11, 9, 10, 100}));
}

TEST(CsvLoader, EveryLoadedBarSatisfiesInvariants) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 20.0);
  std::string text = kHeader;
  for (int i = 0; i < 400; ++i) {
    // mostly valid rows, roughly 1 in 100 perturbed
    double o = 10 + (i % 7), c = 10 + (i % 5);
    double h = std::max(o, c) + 1, l = std::min(o, c) - 1;
    if (i % 100 == 17) l = u(rng) + 30;
    text += row(nth_day(i), o, h, l, c);
  }
  const auto load = parse(text);
  EXPECT_GT(load.skipped, 0u);
  for (const auto& b : load.series.bars()) EXPECT_TRUE(is_valid(b));
}

TEST(CsvLoader, WriteThenReadIsIdentity) {
  const auto original = testing::series("X", {{0, 10.25, 10.5}, {1, 10.5, 9.875}, {3, 9.9, 10.1}});
  std::stringstream buf;
  write_csv(buf, original);
  EXPECT_EQ(read_csv(buf, "X").series, original);
}

TEST(PriceSeries, RejectsUnorderedDatesAndInvalidBars) {
  EXPECT_THROW(PriceSeries("X", {testing::flat_bar(nth_day(1), 1), testing::flat_bar(nth_day(0), 1)}),
               DataError);
  EXPECT_THROW(PriceSeries("X", {testing::flat_bar(nth_day(0), 0)}), DataError);
}

TEST(PriceSeries, SliceIsInclusive) {
  const auto s = testing::close_series("X", {1, 2, 3, 4, 5});
  const auto cut = s.slice(nth_day(1), nth_day(3));
  ASSERT_EQ(cut.size(), 3u);
  EXPECT_EQ(cut.bars().front().close, 2);
  EXPECT_EQ(cut.bars().back().close, 4);
}

TEST(Calendar, UnionOfTwoSeries) {
  const std::vector<PriceSeries> set = {testing::close_series("A", {1, 1, 1}, 0),
                                        testing::close_series("B", {1, 1, 1}, 2)};
  const auto cal = build_calendar(set, "M");
  EXPECT_EQ(cal.sessions, (std::vector<Date>{nth_day(0), nth_day(1), nth_day(2), nth_day(3),
                                             nth_day(4)}));
  EXPECT_EQ(cal.index_of(nth_day(3)), 3u);
  EXPECT_FALSE(cal.index_of(nth_day(9)).has_value());
}

TEST(Calendar, MatchesBruteForceUnion) {
  std::mt19937_64 rng(11);
  std::bernoulli_distribution keep(0.6);
  std::vector<PriceSeries> set;
  std::set<Date> oracle;
  for (int s = 0; s < 6; ++s) {
    std::vector<Bar> bars;
    for (int d = 0; d < 120; ++d) {
      if (keep(rng)) {
        bars.push_back(testing::flat_bar(nth_day(d), 5.0));
        oracle.insert(nth_day(d));
      }
    }
    set.emplace_back("S" + std::to_string(s), bars);
  }
  const auto cal = build_calendar(set);
  EXPECT_EQ(cal.sessions, std::vector<Date>(oracle.begin(), oracle.end()));
}

TEST(Calendar, SingleSeriesIsItsOwnCalendarAndEmptyFails) {
  const auto s = testing::close_series("A", {1, 2, 3}, 5);
  const auto cal = build_calendar(std::span(&s, 1));
  ASSERT_EQ(cal.size(), 3u);
  EXPECT_EQ(cal.sessions.front(), nth_day(5));
  EXPECT_THROW(build_calendar(std::span<const PriceSeries>{}), DataError);
}

TEST(Align, IdentityWhenAlreadyOnCalendar) {
  const auto s = testing::close_series("A", {1, 2, 3, 4});
  const auto cal = build_calendar(std::span(&s, 1));
  const auto aligned = align(s, cal);
  EXPECT_EQ(aligned.missing_count(), 0u);
  EXPECT_EQ(aligned.to_series(), s);
}

TEST(Align, MissingSessionsAreFlaggedNotFilled) {
  TradingCalendar cal{"M", {}};
  for (int d = 0; d < 10; ++d) cal.sessions.push_back(nth_day(d));
  std::vector<Bar> bars;
  for (int d : {0, 1, 3, 4, 6, 8, 9}) bars.push_back(testing::flat_bar(nth_day(d), 10.0 + d));
  const PriceSeries s("A", bars);
  const auto aligned = align(s, cal);
  EXPECT_EQ(aligned.size(), 10u);
  EXPECT_EQ(aligned.observed_count(), 7u);
  EXPECT_EQ(aligned.missing_count(), 3u);
  for (int d : {2, 5, 7}) EXPECT_FALSE(aligned.observed(d));
  EXPECT_EQ(aligned.at(6)->close, 16.0);
  EXPECT_EQ(aligned.to_series(), s);
}

TEST(Align, IsIdempotent) {
  TradingCalendar cal{"M", {nth_day(0), nth_day(1), nth_day(2), nth_day(3)}};
  const auto s = testing::close_series("A", {1, 2}, 1);
  const auto once = align(s, cal);
  EXPECT_EQ(align(once, cal), once);
}

TEST(Align, DateOutsideCalendarFails) {
  TradingCalendar cal{"M", {nth_day(0), nth_day(1)}};
  EXPECT_THROW(align(testing::close_series("A", {1, 2, 3}), cal), DataError);
}

TEST(AlignedMarket, FindsSeriesById) {
  const std::vector<PriceSeries> set = {testing::close_series("A", {1, 2}),
                                        testing::close_series("B", {1, 2}, 1)};
  const auto market = AlignedMarket::from_series(set, "M", 2);
  EXPECT_EQ(market.calendar().size(), 3u);
  ASSERT_NE(market.find("B"), nullptr);
  EXPECT_FALSE(market.find("B")->observed(0));
  EXPECT_EQ(market.find("C"), nullptr);
}

TEST(Universe, RoundTripAndValidation) {
  testing::TempDir dir("universe");
  const Universe u{"US", "S&P 500", {"AAPL", "MSFT"}, day(2010, 1, 1), day(2020, 1, 1)};
  save_universe(dir / "u.json", u);
  const auto back = load_universe(dir / "u.json");
  EXPECT_EQ(back.market_code, "US");
  EXPECT_EQ(back.instruments, u.instruments);
  EXPECT_EQ(back.end, u.end);

  Universe dup = u;
  dup.instruments.push_back("AAPL");
  EXPECT_THROW(validate(dup), DataError);
  Universe backwards = u;
  std::swap(backwards.start, backwards.end);
  EXPECT_THROW(validate(backwards), DataError);
}

TEST(ReferenceMarkets, NineMarketsKnown) {
  EXPECT_EQ(reference_markets().size(), 9u);
  ASSERT_NE(find_reference_market("KR"), nullptr);
  EXPECT_EQ(find_reference_market("XX"), nullptr);
}

}  // namespace
}  // namespace kfrev
