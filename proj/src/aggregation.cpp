#include "tradestats/aggregation.hpp"

#include <algorithm>
#include <iterator>
#include <string>

#include "tradestats/error.hpp"

namespace tradestats {

using namespace std::chrono;

namespace {

struct DayLayout {
  bool whole_day = false;
  std::vector<std::size_t> offsets; // first window index of each session
  std::size_t windows = 0;
};

DayLayout layout_for(std::span<const Session> sessions, seconds dt, Date date) {
  DayLayout layout;
  seconds day_length{0};
  bool divides = true;
  for (const auto& s : sessions) {
    day_length += s.length();
    if (s.length() % dt != seconds{0}) divides = false;
  }
  if (divides) {
    for (const auto& s : sessions) {
      layout.offsets.push_back(layout.windows);
      layout.windows += static_cast<std::size_t>(s.length() / dt);
    }
  } else if (dt == day_length) {
    layout.whole_day = true;
    layout.windows = 1;
  } else {
    throw ConfigError("dt of " + std::to_string(dt.count() / 60) +
                      " min neither divides every session nor equals the trading day on " +
                      format_date(date));
  }
  return layout;
}

} // namespace

VolumeSeries aggregate_clock(const NormalizedSeries& series, int dt_minutes,
                             const SessionCalendar& calendar, EmptyWindows empty) {
  if (dt_minutes <= 0) throw ConfigError("dt must be a positive number of minutes");
  const seconds dt = minutes{dt_minutes};

  std::vector<Date> dates;
  if (calendar.has_explicit_dates()) {
    dates = calendar.dates();
  } else {
    for (const auto t : series.times) {
      const auto d = trade_date(t);
      if (dates.empty() || dates.back() != d) dates.push_back(d);
    }
  }

  VolumeSeries out;
  out.spec = AggregationSpec::clock(dt_minutes);
  std::size_t next = 0;
  const auto n = series.times.size();
  std::vector<double> sums;
  std::vector<std::size_t> counts;
  for (const auto date : dates) {
    const auto sessions = calendar.sessions_for(date);
    if (sessions.empty()) continue;
    const auto layout = layout_for(sessions, dt, date);
    sums.assign(layout.windows, 0.0);
    counts.assign(layout.windows, 0);

    while (next < n && trade_date(series.times[next]) < date) ++next;
    for (; next < n && trade_date(series.times[next]) == date; ++next) {
      const auto tod = time_of_day(series.times[next]);
      for (std::size_t s = 0; s < sessions.size(); ++s) {
        const auto& sess = sessions[s];
        if (tod < sess.open || tod > sess.close) continue;
        std::size_t w = 0;
        if (!layout.whole_day) {
          const auto per_session = static_cast<std::size_t>(sess.length() / dt);
          const auto offset = static_cast<std::size_t>((tod - sess.open) / dt);
          w = layout.offsets[s] + std::min(offset, per_session - 1);
        }
        sums[w] += series.sizes[next];
        ++counts[w];
        break;
      }
    }
    for (std::size_t w = 0; w < layout.windows; ++w) {
      if (empty == EmptyWindows::drop && counts[w] == 0) continue;
      out.samples.push_back(sums[w]);
      out.trade_counts.push_back(counts[w]);
    }
  }
  return out;
}

VolumeSeries aggregate_clock(const TradeSeries& series, int dt_minutes,
                             const SessionCalendar& calendar, EmptyWindows empty) {
  return aggregate_clock(as_normalized(series), dt_minutes, calendar, empty);
}

VolumeSeries aggregate_event(const NormalizedSeries& series, std::size_t dn) {
  if (dn < 1) throw ConfigError("dn must be at least 1");
  VolumeSeries out;
  out.spec = AggregationSpec::event(dn);
  const auto blocks = series.sizes.size() / dn;
  out.samples.reserve(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    double sum = 0.0;
    for (std::size_t i = b * dn; i < (b + 1) * dn; ++i) sum += series.sizes[i];
    out.samples.push_back(sum);
  }
  return out;
}

VolumeSeries aggregate_event(const TradeSeries& series, std::size_t dn) {
  return aggregate_event(as_normalized(series), dn);
}

VolumeSeries aggregate(const NormalizedSeries& series, const AggregationSpec& spec,
                       const SessionCalendar& calendar, EmptyWindows empty) {
  if (spec.mode == AggregationMode::clock)
    return aggregate_clock(series, spec.dt_minutes, calendar, empty);
  return aggregate_event(series, spec.dn);
}

std::vector<double> positive_samples(const VolumeSeries& volume) {
  std::vector<double> out;
  out.reserve(volume.samples.size());
  std::copy_if(volume.samples.begin(), volume.samples.end(), std::back_inserter(out),
               [](double v) { return v > 0.0; });
  return out;
}

} // namespace tradestats
