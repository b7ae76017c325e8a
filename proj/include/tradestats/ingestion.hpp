#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tradestats {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using Date = std::chrono::sys_days;

enum class Side { unknown, buy, sell };

Date trade_date(Timestamp ts);
std::chrono::milliseconds time_of_day(Timestamp ts);
Timestamp make_timestamp(Date date, std::chrono::milliseconds time_of_day);

// "YYYY-MM-DD"
std::optional<Date> parse_date(std::string_view text);
// "HH:MM", "HH:MM:SS" or "HH:MM:SS.fff"
std::optional<std::chrono::milliseconds> parse_time_of_day(std::string_view text);
std::string format_date(Date date);
// Fraction printed only when non-zero, so whole-second input round-trips.
std::string format_time_of_day(std::chrono::milliseconds tod);

struct TradeRecord {
  Timestamp time;
  std::int64_t size = 0; // shares, > 0
  Side side = Side::unknown;

  friend bool operator==(const TradeRecord&, const TradeRecord&) = default;
};

// Time-ordered trades of one stock. Immutable once built.
class TradeSeries {
public:
  TradeSeries() = default;
  // Stable-sorts by time (ties keep input order). Throws DomainError on a
  // non-positive size.
  TradeSeries(std::string ticker, std::vector<TradeRecord> records);

  const std::string& ticker() const noexcept { return ticker_; }
  std::span<const TradeRecord> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  double mean_size() const noexcept { return mean_size_; }

private:
  std::string ticker_;
  std::vector<TradeRecord> records_;
  double mean_size_ = 0.0;
};

// Trade series after share normalization: same timestamps, real sizes.
struct NormalizedSeries {
  std::string ticker;
  std::vector<Timestamp> times;
  std::vector<double> sizes;
};

NormalizedSeries as_normalized(const TradeSeries& series);

struct Session {
  std::chrono::seconds open;
  std::chrono::seconds close;

  std::chrono::seconds length() const { return close - open; }
  friend bool operator==(const Session&, const Session&) = default;
};

// Trading sessions per date. Without explicit dates every calendar day uses
// the default sessions; once a date is added, only listed dates trade.
// A trade belongs to a session when open <= t <= close.
class SessionCalendar {
public:
  // 09:30-11:30 and 13:00-15:00, the continuous double auction.
  SessionCalendar();
  explicit SessionCalendar(std::vector<Session> default_sessions);

  void add_day(Date date, std::vector<Session> sessions);

  bool has_explicit_dates() const noexcept { return !days_.empty(); }
  std::vector<Date> dates() const;
  std::span<const Session> sessions_for(Date date) const;
  std::span<const Session> default_sessions() const noexcept { return default_; }
  bool is_trading_day(Date date) const;
  bool contains(Timestamp ts) const;

private:
  static void check(const std::vector<Session>& sessions);

  std::vector<Session> default_;
  std::map<Date, std::vector<Session>> days_;
};

// Rows "date,open,close", one per session, header required.
SessionCalendar load_calendar(std::istream& in);

// Column layout of a delimiter-separated tick file with a header row.
// An empty date_column means time_column holds "YYYY-MM-DD HH:MM:SS".
// The side column is optional in the file; unknown columns are ignored.
struct TickSchema {
  char delimiter = ',';
  std::string date_column = "date";
  std::string time_column = "time";
  std::string size_column = "size";
  std::string side_column = "side";
  std::string ticker = "UNKNOWN";
};

struct ParseResult {
  TradeSeries series;
  std::size_t dropped = 0; // rows outside calendar sessions
};

// Throws ParseError (with line number) on a malformed row and DataError when
// no record survives the session filter.
ParseResult parse_ticks(std::istream& in, const TickSchema& schema,
                        const SessionCalendar& calendar);
ParseResult parse_ticks_file(const std::string& path, const TickSchema& schema,
                             const SessionCalendar& calendar);

void write_ticks(std::ostream& out, const TradeSeries& series,
                 const TickSchema& schema = {});

struct DatedShares {
  Date effective;
  std::int64_t shares;
};

struct StockMeta {
  std::string ticker;
  std::int64_t outstanding_shares = 0; // undated figure, 0 if only dated
  std::vector<DatedShares> dated;      // sorted by effective date

  // Latest dated entry effective on or before `date`, else the undated one.
  std::int64_t shares_on(Date date) const;
};

// Rows "ticker,outstanding_shares[,effective_date]".
std::map<std::string, StockMeta> load_meta(std::istream& in);

// Divides every size by the outstanding shares in force on its trade date.
NormalizedSeries normalize_shares(const TradeSeries& series, const StockMeta& meta);
NormalizedSeries normalize_shares(const TradeSeries& series,
                                  const std::map<std::string, StockMeta>& meta);

// values[i] / mean(values). Values must be positive.
std::vector<double> normalize_mean(std::span<const double> values);

} // namespace tradestats
