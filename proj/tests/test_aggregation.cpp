#include <gtest/gtest.h>

#include <map>
#include <numeric>
#include <random>

#include "tradestats/aggregation.hpp"
#include "tradestats/error.hpp"

using namespace tradestats;
using namespace std::chrono;

namespace {

const Date kDay = Date{year{2003} / 1 / 6};

TradeRecord trade(Date d, seconds tod, std::int64_t size) { return {make_timestamp(d, tod), size, Side::unknown}; }

seconds hms(int h, int m, int s) { return hours{h} + minutes{m} + seconds{s}; }

TradeSeries random_series(std::uint64_t seed, int days, int per_day) {
  std::mt19937_64 rng(seed);
  SessionCalendar cal;
  std::vector<TradeRecord> recs;
  for (int d = 0; d < days; ++d) {
    const Date date = kDay + std::chrono::days{d};
    for (int i = 0; i < per_day; ++i) {
      const auto& s = cal.default_sessions()[rng() % 2];
      const auto t = s.open + seconds{static_cast<long>(rng() % static_cast<unsigned>(s.length().count() + 1))};
      recs.push_back(trade(date, t, 1 + static_cast<std::int64_t>(rng() % 10000)));
    }
  }
  return TradeSeries("R", std::move(recs));
}

} // namespace

TEST(AggregateClock, FirstMinuteSum) {
  const TradeSeries s("X", {trade(kDay, hms(9, 30, 10), 100), trade(kDay, hms(9, 30, 40), 200)});
  const auto v = aggregate_clock(s, 1, SessionCalendar{});
  ASSERT_EQ(v.samples.size(), 240u);
  EXPECT_DOUBLE_EQ(v.samples[0], 300.0);
  EXPECT_EQ(v.trade_counts[0], 2u);
  EXPECT_DOUBLE_EQ(std::accumulate(v.samples.begin() + 1, v.samples.end(), 0.0), 0.0);
}

TEST(AggregateClock, WholeDayIsOneSamplePerDay) {
  const auto s = random_series(3, 4, 500);
  const auto v = aggregate_clock(s, 240, SessionCalendar{});
  ASSERT_EQ(v.samples.size(), 4u);
  std::map<Date, double> totals;
  for (const auto& r : s.records()) totals[trade_date(r.time)] += static_cast<double>(r.size);
  std::size_t i = 0;
  for (const auto& [d, total] : totals) EXPECT_DOUBLE_EQ(v.samples[i++], total);
}

TEST(AggregateClock, LunchBreakIsAWindowBoundary) {
  const TradeSeries s("X", {trade(kDay, hms(11, 29, 30), 5), trade(kDay, hms(13, 0, 10), 7)});
  const auto v = aggregate_clock(s, 120, SessionCalendar{});
  ASSERT_EQ(v.samples.size(), 2u);
  EXPECT_DOUBLE_EQ(v.samples[0], 5.0);
  EXPECT_DOUBLE_EQ(v.samples[1], 7.0);
  const auto m = aggregate_clock(s, 30, SessionCalendar{});
  ASSERT_EQ(m.samples.size(), 8u);
  EXPECT_DOUBLE_EQ(m.samples[3], 5.0);
  EXPECT_DOUBLE_EQ(m.samples[4], 7.0);
}

TEST(AggregateClock, CloseTradeGoesToLastWindow) {
  const TradeSeries s("X", {trade(kDay, hms(11, 30, 0), 9)});
  const auto v = aggregate_clock(s, 5, SessionCalendar{});
  EXPECT_DOUBLE_EQ(v.samples[23], 9.0);
}

TEST(AggregateClock, NonDividingStepIsConfigError) {
  const auto s = random_series(1, 1, 10);
  EXPECT_THROW(aggregate_clock(s, 7, SessionCalendar{}), ConfigError);
  EXPECT_THROW(aggregate_clock(s, 0, SessionCalendar{}), ConfigError);
  EXPECT_THROW(aggregate_clock(s, 480, SessionCalendar{}), ConfigError);
}

TEST(AggregateClock, EmptyWindowsCanBeDropped) {
  const TradeSeries s("X", {trade(kDay, hms(9, 30, 10), 100)});
  const auto v = aggregate_clock(s, 1, SessionCalendar{}, EmptyWindows::drop);
  ASSERT_EQ(v.samples.size(), 1u);
  EXPECT_DOUBLE_EQ(v.samples[0], 100.0);
  EXPECT_EQ(positive_samples(aggregate_clock(s, 1, SessionCalendar{})).size(), 1u);
}

TEST(AggregateClock, ConservationPerDay) {
  const auto s = random_series(11, 3, 2000);
  for (const int dt : {1, 2, 3, 5, 10, 15, 30, 60, 120}) {
    const auto v = aggregate_clock(s, dt, SessionCalendar{});
    const std::size_t per_day = static_cast<std::size_t>(240 / dt);
    ASSERT_EQ(v.samples.size(), 3 * per_day);
    std::map<Date, double> totals;
    for (const auto& r : s.records()) totals[trade_date(r.time)] += static_cast<double>(r.size);
    std::size_t d = 0;
    for (const auto& [date, total] : totals) {
      const double sum = std::accumulate(v.samples.begin() + static_cast<std::ptrdiff_t>(d * per_day),
                                         v.samples.begin() + static_cast<std::ptrdiff_t>((d + 1) * per_day), 0.0);
      EXPECT_DOUBLE_EQ(sum, total) << "dt=" << dt;
      ++d;
    }
    for (const double x : v.samples) EXPECT_GE(x, 0.0);
  }
}

TEST(AggregateClock, PairwiseRefinement) {
  const auto s = random_series(12, 2, 3000);
  for (const int dt : {1, 5, 15, 30, 60}) {
    const auto fine = aggregate_clock(s, dt, SessionCalendar{});
    const auto coarse = aggregate_clock(s, 2 * dt, SessionCalendar{});
    ASSERT_EQ(fine.samples.size(), 2 * coarse.samples.size());
    for (std::size_t i = 0; i < coarse.samples.size(); ++i)
      EXPECT_DOUBLE_EQ(fine.samples[2 * i] + fine.samples[2 * i + 1], coarse.samples[i]) << dt;
  }
}

TEST(AggregateClock, ExplicitCalendarDatesIncludeQuietDays) {
  SessionCalendar cal;
  cal.add_day(kDay, {cal.default_sessions().begin(), cal.default_sessions().end()});
  cal.add_day(kDay + days{1}, {cal.default_sessions().begin(), cal.default_sessions().end()});
  const TradeSeries s("X", {trade(kDay, hms(10, 0, 0), 4)});
  const auto v = aggregate_clock(s, 240, cal);
  EXPECT_EQ(v.samples, (std::vector<double>{4.0, 0.0}));
}

TEST(AggregateEvent, UnitBlocksAreTheSizes) {
  const auto s = random_series(5, 1, 300);
  const auto v = aggregate_event(s, 1);
  ASSERT_EQ(v.samples.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_DOUBLE_EQ(v.samples[i], static_cast<double>(s.records()[i].size));
}

TEST(AggregateEvent, BlockSumsAndRemainder) {
  std::vector<TradeRecord> recs;
  for (int i = 1; i <= 5; ++i) recs.push_back(trade(kDay, hms(10, 0, i), i));
  const TradeSeries five("X", recs);
  EXPECT_EQ(aggregate_event(five, 2).samples, (std::vector<double>{3.0, 7.0}));
  recs.pop_back();
  const TradeSeries four("X", recs);
  EXPECT_EQ(aggregate_event(four, 2).samples, (std::vector<double>{3.0, 7.0}));
  EXPECT_TRUE(aggregate_event(NormalizedSeries{}, 3).samples.empty());
  EXPECT_THROW(aggregate_event(four, 0), ConfigError);
}

TEST(AggregateEvent, BlocksCrossSessions) {
  const TradeSeries s("X", {trade(kDay, hms(11, 29, 0), 1), trade(kDay, hms(13, 1, 0), 2)});
  EXPECT_EQ(aggregate_event(s, 2).samples, (std::vector<double>{3.0}));
}

TEST(Aggregate, DispatchesOnMode) {
  const auto s = as_normalized(random_series(6, 1, 100));
  EXPECT_EQ(aggregate(s, AggregationSpec::event(4), SessionCalendar{}).samples.size(), 25u);
  EXPECT_EQ(aggregate(s, AggregationSpec::clock(60), SessionCalendar{}).samples.size(), 4u);
}
