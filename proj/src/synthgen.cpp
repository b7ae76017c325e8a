#include "tradestats/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tradestats/error.hpp"
#include "tradestats/preference.hpp"

namespace tradestats {

namespace {

void check_pareto(const ParetoParams& p) {
  if (!(p.alpha > 0.0) || !(p.x_min > 0.0) || !std::isfinite(p.shift))
    throw DomainError("pareto needs alpha > 0 and x_min > 0");
}

double draw_pareto(const ParetoParams& p, Rng& rng) {
  // 1 - canonical lies in (0, 1], keeping the power finite.
  const double u = 1.0 - std::generate_canonical<double, 64>(rng);
  return p.x_min * std::pow(u, -1.0 / p.alpha) + p.shift;
}

double draw_size(const SizeModel& m, Rng& rng) {
  return std::visit(
      [&rng](const auto& v) {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, ParetoParams>)
          return draw_pareto(v, rng);
        else
          return draw(v, rng);
      },
      m);
}

std::vector<std::int64_t> layer_set(const std::vector<int>& ids) {
  std::vector<std::int64_t> out;
  for (const int id : ids) {
    const auto v = layer_by_id(id).values();
    out.insert(out.end(), v.begin(), v.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::int64_t nearest(const std::vector<std::int64_t>& sorted, std::int64_t x) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  if (it == sorted.begin()) return *it;
  if (it == sorted.end()) return sorted.back();
  const auto lo = *std::prev(it);
  return x - lo <= *it - x ? lo : *it;
}

std::chrono::seconds parse_clock(const std::string& s) {
  const auto t = parse_time_of_day(s);
  if (!t) throw ConfigError("bad session time '" + s + "'");
  return std::chrono::duration_cast<std::chrono::seconds>(*t);
}

} // namespace

std::vector<double> gen_pareto(const ParetoParams& p, std::size_t count, std::uint64_t seed) {
  check_pareto(p);
  Rng rng(seed);
  std::vector<double> out(count);
  for (auto& x : out) x = draw_pareto(p, rng);
  return out;
}

std::vector<double> gen_pareto(double alpha, double x_min, double shift, std::size_t count, std::uint64_t seed) {
  return gen_pareto(ParetoParams{alpha, x_min, shift}, count, seed);
}

double pareto_cdf(double x, const ParetoParams& p) {
  const double y = x - p.shift;
  if (y <= p.x_min) return 0.0;
  return -std::expm1(-p.alpha * std::log(y / p.x_min));
}

SessionCalendar StreamSpec::calendar() const {
  SessionCalendar cal = sessions.empty() ? SessionCalendar{} : SessionCalendar{sessions};
  const auto daily = std::vector<Session>(cal.default_sessions().begin(), cal.default_sessions().end());
  Date d = start_date;
  for (int added = 0; added < days; d += std::chrono::days{1}) {
    const std::chrono::weekday wd{d};
    if (wd == std::chrono::Saturday || wd == std::chrono::Sunday) continue;
    cal.add_day(d, daily);
    ++added;
  }
  return cal;
}

void StreamSpec::validate() const {
  if (!(rounding.probability >= 0.0 && rounding.probability <= 1.0))
    throw ConfigError("rounding probability must lie in [0, 1]");
  if (rounding.probability > 0.0 && rounding.layers.empty())
    throw ConfigError("rounding needs at least one layer");
  for (const int id : rounding.layers) layer_by_id(id);
  if (!(buy_probability >= 0.0 && buy_probability <= 1.0))
    throw ConfigError("buy probability must lie in [0, 1]");
  if (trades_per_session < 1) throw ConfigError("trades per session must be >= 1");
  if (days < 1) throw ConfigError("stream needs at least one day");
  if (!(size_scale > 0.0) || !std::isfinite(size_scale)) throw ConfigError("size scale must be positive");
  std::visit(
      [](const auto& v) {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, ParetoParams>)
          check_pareto(v);
        else
          tradestats::validate(v);
      },
      size_model);
}

GeneratedStream generate_stream(const StreamSpec& spec) {
  spec.validate();
  const auto cal = spec.calendar();
  const auto layers = layer_set(spec.rounding.layers);
  Rng rng(spec.seed);
  std::bernoulli_distribution round_it(spec.rounding.probability);
  std::bernoulli_distribution is_buy(spec.buy_probability);

  std::vector<TradeRecord> records;
  records.reserve(cal.dates().size() * cal.default_sessions().size() * spec.trades_per_session);
  std::size_t rounded = 0;
  for (const auto& day : cal.dates()) {
    for (const auto& s : cal.sessions_for(day)) {
      std::uniform_int_distribution<std::int64_t> sec(s.open.count(), s.close.count());
      std::vector<std::int64_t> secs(spec.trades_per_session);
      for (auto& t : secs) t = sec(rng);
      std::sort(secs.begin(), secs.end());
      for (const auto t : secs) {
        const double x = draw_size(spec.size_model, rng) * spec.size_scale;
        std::int64_t size = std::max<std::int64_t>(1, std::llround(std::min(x, 9.0e15)));
        if (round_it(rng)) {
          size = nearest(layers, size);
          ++rounded;
        }
        const Side side = is_buy(rng) ? Side::buy : Side::sell;
        if (side == Side::buy && spec.buy_lot_rule) size = (size + 99) / 100 * 100;
        records.push_back({make_timestamp(day, std::chrono::seconds{t}), size, side});
      }
    }
  }
  return {TradeSeries(spec.ticker, std::move(records)), rounded};
}

TradeSeries gen_trade_stream(const StreamSpec& spec) { return generate_stream(spec).series; }

void to_json(nlohmann::json& j, const StreamSpec& s) {
  nlohmann::json model;
  if (const auto* p = std::get_if<ParetoParams>(&s.size_model))
    model = {{"kind", "pareto"}, {"alpha", p->alpha}, {"x_min", p->x_min}, {"shift", p->shift}};
  else
    model = std::get<ModelParams>(s.size_model);
  nlohmann::json sessions = nlohmann::json::array();
  for (const auto& ss : s.sessions)
    sessions.push_back({format_time_of_day(ss.open), format_time_of_day(ss.close)});
  j = {{"size_model", std::move(model)},
       {"size_scale", s.size_scale},
       {"rounding", {{"probability", s.rounding.probability}, {"layers", s.rounding.layers}}},
       {"buy_lot_rule", s.buy_lot_rule},
       {"buy_probability", s.buy_probability},
       {"start_date", format_date(s.start_date)},
       {"days", s.days},
       {"sessions", std::move(sessions)},
       {"trades_per_session", s.trades_per_session},
       {"seed", s.seed},
       {"ticker", s.ticker}};
}

void from_json(const nlohmann::json& j, StreamSpec& s) {
  try {
    s = StreamSpec{};
    if (j.contains("size_model")) {
      const auto& m = j.at("size_model");
      if (m.at("kind").get<std::string>() == "pareto")
        s.size_model = ParetoParams{m.at("alpha").get<double>(), m.value("x_min", 1.0), m.value("shift", 0.0)};
      else
        s.size_model = m.get<ModelParams>();
    }
    s.size_scale = j.value("size_scale", s.size_scale);
    if (j.contains("rounding")) {
      const auto& r = j.at("rounding");
      s.rounding.probability = r.value("probability", 0.0);
      if (r.contains("layers")) s.rounding.layers = r.at("layers").get<std::vector<int>>();
    }
    s.buy_lot_rule = j.value("buy_lot_rule", s.buy_lot_rule);
    s.buy_probability = j.value("buy_probability", s.buy_probability);
    if (j.contains("start_date")) {
      const auto text = j.at("start_date").get<std::string>();
      const auto d = parse_date(text);
      if (!d) throw ConfigError("bad start_date '" + text + "'");
      s.start_date = *d;
    }
    s.days = j.value("days", s.days);
    if (j.contains("sessions"))
      for (const auto& pair : j.at("sessions"))
        s.sessions.push_back({parse_clock(pair.at(0).get<std::string>()), parse_clock(pair.at(1).get<std::string>())});
    s.trades_per_session = j.value("trades_per_session", s.trades_per_session);
    s.seed = j.value("seed", s.seed);
    s.ticker = j.value("ticker", s.ticker);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("stream spec json: ") + e.what());
  }
}

} // namespace tradestats
