#include "tradestats/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "tradestats/error.hpp"
#include "text.hpp"

namespace tradestats {

using namespace std::chrono;
using detail::split;
using detail::to_int;
using detail::trim;

Date trade_date(Timestamp ts) { return floor<days>(ts); }

milliseconds time_of_day(Timestamp ts) { return ts - time_point_cast<milliseconds>(trade_date(ts)); }

Timestamp make_timestamp(Date date, milliseconds tod) { return time_point_cast<milliseconds>(date) + tod; }

std::optional<Date> parse_date(std::string_view text) {
  text = trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  const auto y = to_int(text.substr(0, 4));
  const auto m = to_int(text.substr(5, 2));
  const auto d = to_int(text.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  const year_month_day ymd{year{static_cast<int>(*y)}, month{static_cast<unsigned>(*m)},
                           day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd};
}

std::optional<milliseconds> parse_time_of_day(std::string_view text) {
  text = trim(text);
  std::string_view frac;
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    frac = text.substr(dot + 1);
    text = text.substr(0, dot);
    if (frac.empty() || frac.size() > 3) return std::nullopt;
  }
  const auto parts = split(text, ':');
  if (parts.size() < 2 || parts.size() > 3) return std::nullopt;
  std::int64_t fields[3] = {0, 0, 0};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].size() != 2) return std::nullopt;
    const auto v = to_int(parts[i]);
    if (!v || *v < 0) return std::nullopt;
    fields[i] = *v;
  }
  if (fields[0] > 23 || fields[1] > 59 || fields[2] > 59) return std::nullopt;
  if (!frac.empty() && parts.size() != 3) return std::nullopt;
  std::int64_t ms = 0;
  if (!frac.empty()) {
    const auto f = to_int(frac);
    if (!f || *f < 0) return std::nullopt;
    ms = *f;
    for (std::size_t i = frac.size(); i < 3; ++i) ms *= 10;
  }
  return hours{fields[0]} + minutes{fields[1]} + seconds{fields[2]} + milliseconds{ms};
}

std::string format_date(Date date) {
  const year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_time_of_day(milliseconds tod) {
  const auto total = tod.count();
  const auto ms = total % 1000;
  const auto s = total / 1000;
  char buf[48];
  if (ms == 0)
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", static_cast<long long>(s / 3600),
                  static_cast<long long>(s / 60 % 60), static_cast<long long>(s % 60));
  else
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld.%03lld", static_cast<long long>(s / 3600),
                  static_cast<long long>(s / 60 % 60), static_cast<long long>(s % 60),
                  static_cast<long long>(ms));
  return buf;
}

TradeSeries::TradeSeries(std::string ticker, std::vector<TradeRecord> records)
    : ticker_(std::move(ticker)), records_(std::move(records)) {
  for (const auto& r : records_)
    if (r.size <= 0) throw DomainError("trade size must be positive");
  std::stable_sort(records_.begin(), records_.end(),
                   [](const TradeRecord& a, const TradeRecord& b) { return a.time < b.time; });
  if (!records_.empty()) {
    long double sum = 0;
    for (const auto& r : records_) sum += static_cast<long double>(r.size);
    mean_size_ = static_cast<double>(sum / static_cast<long double>(records_.size()));
  }
}

NormalizedSeries as_normalized(const TradeSeries& series) {
  NormalizedSeries out;
  out.ticker = series.ticker();
  out.times.reserve(series.size());
  out.sizes.reserve(series.size());
  for (const auto& r : series.records()) {
    out.times.push_back(r.time);
    out.sizes.push_back(static_cast<double>(r.size));
  }
  return out;
}

namespace {

std::vector<Session> shenzhen_sessions() {
  return {{hours{9} + minutes{30}, hours{11} + minutes{30}},
          {hours{13}, hours{15}}};
}

} // namespace

SessionCalendar::SessionCalendar() : default_(shenzhen_sessions()) {}

SessionCalendar::SessionCalendar(std::vector<Session> default_sessions)
    : default_(std::move(default_sessions)) {
  check(default_);
}

void SessionCalendar::check(const std::vector<Session>& sessions) {
  if (sessions.empty()) throw ConfigError("a trading day needs at least one session");
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    const auto& s = sessions[i];
    if (s.open < seconds{0} || s.close > hours{24} || s.close <= s.open)
      throw ConfigError("session must satisfy 00:00 <= open < close <= 24:00");
    if (i > 0 && s.open <= sessions[i - 1].close)
      throw ConfigError("sessions within a day must be disjoint and ordered");
  }
}

void SessionCalendar::add_day(Date date, std::vector<Session> sessions) {
  check(sessions);
  days_[date] = std::move(sessions);
}

std::vector<Date> SessionCalendar::dates() const {
  std::vector<Date> out;
  out.reserve(days_.size());
  for (const auto& [d, _] : days_) out.push_back(d);
  return out;
}

std::span<const Session> SessionCalendar::sessions_for(Date date) const {
  if (days_.empty()) return default_;
  const auto it = days_.find(date);
  if (it == days_.end()) return {};
  return it->second;
}

bool SessionCalendar::is_trading_day(Date date) const { return !sessions_for(date).empty(); }

bool SessionCalendar::contains(Timestamp ts) const {
  const auto tod = time_of_day(ts);
  for (const auto& s : sessions_for(trade_date(ts)))
    if (tod >= s.open && tod <= s.close) return true;
  return false;
}

namespace {

std::size_t column_index(const std::vector<std::string_view>& header, std::string_view name,
                         bool required) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    if (required) throw ConfigError("column '" + std::string(name) + "' not found in header");
    return static_cast<std::size_t>(-1);
  }
  return static_cast<std::size_t>(it - header.begin());
}

bool next_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) return true;
  }
  return false;
}

Side parse_side(std::string_view s) {
  if (s == "B" || s == "b" || s == "buy" || s == "BUY") return Side::buy;
  if (s == "S" || s == "s" || s == "sell" || s == "SELL") return Side::sell;
  return Side::unknown;
}

std::string_view side_text(Side s) {
  switch (s) {
  case Side::buy: return "B";
  case Side::sell: return "S";
  case Side::unknown: break;
  }
  return "";
}

} // namespace

SessionCalendar load_calendar(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!next_line(in, line, lineno)) throw ConfigError("calendar file is empty");
  const auto header = split(line, ',');
  const auto c_date = column_index(header, "date", true);
  const auto c_open = column_index(header, "open", true);
  const auto c_close = column_index(header, "close", true);
  std::map<Date, std::vector<Session>> days;
  while (next_line(in, line, lineno)) {
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw ParseError(lineno, "expected " + std::to_string(header.size()) + " fields");
    const auto d = parse_date(f[c_date]);
    const auto o = parse_time_of_day(f[c_open]);
    const auto c = parse_time_of_day(f[c_close]);
    if (!d || !o || !c) throw ParseError(lineno, "bad calendar row");
    days[*d].push_back({duration_cast<seconds>(*o), duration_cast<seconds>(*c)});
  }
  SessionCalendar cal;
  for (auto& [d, sessions] : days) {
    std::sort(sessions.begin(), sessions.end(),
              [](const Session& a, const Session& b) { return a.open < b.open; });
    try {
      cal.add_day(d, std::move(sessions));
    } catch (const ConfigError& e) {
      throw ConfigError(format_date(d) + ": " + e.what());
    }
  }
  return cal;
}

ParseResult parse_ticks(std::istream& in, const TickSchema& schema,
                        const SessionCalendar& calendar) {
  if (schema.time_column.empty() || schema.size_column.empty())
    throw ConfigError("schema must name a time column and a size column");
  std::string line;
  std::size_t lineno = 0;
  if (!next_line(in, line, lineno)) throw DataError("tick file has no header");
  const auto header_fields = split(line, schema.delimiter);
  const std::vector<std::string> header(header_fields.begin(), header_fields.end());
  const std::vector<std::string_view> hv(header.begin(), header.end());
  const bool combined = schema.date_column.empty();
  const auto c_date = combined ? std::size_t{0} : column_index(hv, schema.date_column, true);
  const auto c_time = column_index(hv, schema.time_column, true);
  const auto c_size = column_index(hv, schema.size_column, true);
  const auto c_side =
      schema.side_column.empty() ? static_cast<std::size_t>(-1) : column_index(hv, schema.side_column, false);

  std::vector<TradeRecord> records;
  std::size_t dropped = 0;
  while (next_line(in, line, lineno)) {
    const auto f = split(line, schema.delimiter);
    if (f.size() != header.size())
      throw ParseError(lineno, "expected " + std::to_string(header.size()) + " fields, got " +
                                   std::to_string(f.size()));
    std::optional<Date> date;
    std::optional<milliseconds> tod;
    if (combined) {
      const auto stamp = f[c_time];
      const auto sep = stamp.find_first_of(" T");
      if (sep != std::string_view::npos) {
        date = parse_date(stamp.substr(0, sep));
        tod = parse_time_of_day(stamp.substr(sep + 1));
      }
    } else {
      date = parse_date(f[c_date]);
      tod = parse_time_of_day(f[c_time]);
    }
    if (!date) throw ParseError(lineno, "bad date");
    if (!tod) throw ParseError(lineno, "bad time");
    const auto size = to_int(f[c_size]);
    if (!size) throw ParseError(lineno, "size '" + std::string(f[c_size]) + "' is not an integer");
    if (*size <= 0) throw ParseError(lineno, "size must be positive");
    const auto ts = make_timestamp(*date, *tod);
    if (!calendar.contains(ts)) {
      ++dropped;
      continue;
    }
    records.push_back({ts, *size, c_side < f.size() ? parse_side(f[c_side]) : Side::unknown});
  }
  if (records.empty())
    throw DataError("no trades inside calendar sessions (" + std::to_string(dropped) + " dropped)");
  return {TradeSeries(schema.ticker, std::move(records)), dropped};
}

ParseResult parse_ticks_file(const std::string& path, const TickSchema& schema,
                             const SessionCalendar& calendar) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tick file " + path);
  return parse_ticks(in, schema, calendar);
}

void write_ticks(std::ostream& out, const TradeSeries& series, const TickSchema& schema) {
  const char d = schema.delimiter;
  const bool combined = schema.date_column.empty();
  if (!combined) out << schema.date_column << d;
  out << schema.time_column << d << schema.size_column << d << schema.side_column << '\n';
  for (const auto& r : series.records()) {
    if (combined)
      out << format_date(trade_date(r.time)) << ' ' << format_time_of_day(time_of_day(r.time));
    else
      out << format_date(trade_date(r.time)) << d << format_time_of_day(time_of_day(r.time));
    out << d << r.size << d << side_text(r.side) << '\n';
  }
  if (!out) throw IoError("failed writing tick file");
}

std::int64_t StockMeta::shares_on(Date date) const {
  std::int64_t shares = outstanding_shares;
  for (const auto& e : dated) {
    if (e.effective > date) break;
    shares = e.shares;
  }
  return shares;
}

std::map<std::string, StockMeta> load_meta(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!next_line(in, line, lineno)) throw ConfigError("metadata file is empty");
  const auto header = split(line, ',');
  const auto c_ticker = column_index(header, "ticker", true);
  const auto c_shares = column_index(header, "outstanding_shares", true);
  const auto c_date = column_index(header, "effective_date", false);
  std::map<std::string, StockMeta> out;
  while (next_line(in, line, lineno)) {
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw ParseError(lineno, "wrong field count");
    const auto shares = to_int(f[c_shares]);
    if (!shares || *shares <= 0) throw ParseError(lineno, "outstanding_shares must be a positive integer");
    auto& meta = out[std::string(f[c_ticker])];
    meta.ticker = std::string(f[c_ticker]);
    if (c_date < f.size() && !f[c_date].empty()) {
      const auto d = parse_date(f[c_date]);
      if (!d) throw ParseError(lineno, "bad effective_date");
      meta.dated.push_back({*d, *shares});
    } else {
      meta.outstanding_shares = *shares;
    }
  }
  for (auto& [_, meta] : out)
    std::sort(meta.dated.begin(), meta.dated.end(),
              [](const DatedShares& a, const DatedShares& b) { return a.effective < b.effective; });
  return out;
}

NormalizedSeries normalize_shares(const TradeSeries& series, const StockMeta& meta) {
  NormalizedSeries out;
  out.ticker = series.ticker();
  out.times.reserve(series.size());
  out.sizes.reserve(series.size());
  for (const auto& r : series.records()) {
    const auto shares = meta.shares_on(trade_date(r.time));
    if (shares <= 0)
      throw ConfigError("no positive outstanding_shares for " + series.ticker() + " on " +
                        format_date(trade_date(r.time)));
    out.times.push_back(r.time);
    out.sizes.push_back(static_cast<double>(r.size) / static_cast<double>(shares));
  }
  return out;
}

NormalizedSeries normalize_shares(const TradeSeries& series,
                                  const std::map<std::string, StockMeta>& meta) {
  const auto it = meta.find(series.ticker());
  if (it == meta.end()) throw ConfigError("no metadata for ticker " + series.ticker());
  return normalize_shares(series, it->second);
}

std::vector<double> normalize_mean(std::span<const double> values) {
  if (values.empty()) throw DataError("normalize_mean: empty input");
  long double sum = 0;
  for (const double v : values) {
    if (!(v > 0)) throw DomainError("normalize_mean: values must be positive");
    sum += v;
  }
  const double mean = static_cast<double>(sum / static_cast<long double>(values.size()));
  std::vector<double> out(values.begin(), values.end());
  for (double& v : out) v /= mean;
  return out;
}

} // namespace tradestats
