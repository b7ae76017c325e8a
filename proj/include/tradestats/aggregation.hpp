#pragma once

#include <cstddef>
#include <vector>

#include "tradestats/ingestion.hpp"

namespace tradestats {

enum class AggregationMode { clock, event };

struct AggregationSpec {
  AggregationMode mode = AggregationMode::event;
  int dt_minutes = 1;     // clock mode
  std::size_t dn = 1;     // event mode

  static AggregationSpec clock(int dt) { return {AggregationMode::clock, dt, 1}; }
  static AggregationSpec event(std::size_t dn) { return {AggregationMode::event, 1, dn}; }
};

// Volume samples for one series at one scale. trade_counts is filled in
// clock mode only (number of trades per window).
struct VolumeSeries {
  AggregationSpec spec;
  std::vector<double> samples;
  std::vector<std::size_t> trade_counts;
};

enum class EmptyWindows { keep, drop };

// Sums sizes over non-overlapping windows of dt minutes. Windows restart at
// every session open, so none of them spans a break. dt must divide every
// session length, or equal the full trading-day length, in which case each
// day is one window. Trades at a session close fall in its last window.
VolumeSeries aggregate_clock(const NormalizedSeries& series, int dt_minutes,
                             const SessionCalendar& calendar,
                             EmptyWindows empty = EmptyWindows::keep);
VolumeSeries aggregate_clock(const TradeSeries& series, int dt_minutes,
                             const SessionCalendar& calendar,
                             EmptyWindows empty = EmptyWindows::keep);

// Sums consecutive blocks of exactly dn trades; a trailing partial block is
// dropped. Blocks may cross session and day boundaries.
VolumeSeries aggregate_event(const NormalizedSeries& series, std::size_t dn);
VolumeSeries aggregate_event(const TradeSeries& series, std::size_t dn);

VolumeSeries aggregate(const NormalizedSeries& series, const AggregationSpec& spec,
                       const SessionCalendar& calendar,
                       EmptyWindows empty = EmptyWindows::keep);

// Positive samples only; zero windows cannot enter log-binned densities.
std::vector<double> positive_samples(const VolumeSeries& volume);

} // namespace tradestats
