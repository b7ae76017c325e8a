#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tradestats/distributions.hpp"
#include "tradestats/ingestion.hpp"

namespace tradestats {

// x = x_min * U^(-1/alpha) + shift.
struct ParetoParams {
  double alpha = 2.0;
  double x_min = 1.0;
  double shift = 0.0;
};

std::vector<double> gen_pareto(double alpha, double x_min, double shift, std::size_t count, std::uint64_t seed);
std::vector<double> gen_pareto(const ParetoParams& p, std::size_t count, std::uint64_t seed);
double pareto_cdf(double x, const ParetoParams& p);

using SizeModel = std::variant<ModelParams, ParetoParams>;

struct RoundingSpec {
  double probability = 0.0;
  std::vector<int> layers{3}; // layer ids, see preference.hpp
};

struct StreamSpec {
  SizeModel size_model = ParetoParams{1.5, 100.0, 0.0};
  // Draws are multiplied by this before rounding to whole shares.
  double size_scale = 1.0;
  RoundingSpec rounding;
  bool buy_lot_rule = false;
  double buy_probability = 0.5;
  Date start_date = Date{std::chrono::year{2003} / 1 / 2};
  int days = 1;            // consecutive weekdays from start_date
  std::vector<Session> sessions; // empty: default trading sessions
  std::size_t trades_per_session = 1000;
  std::uint64_t seed = 1;
  std::string ticker = "SYN";

  SessionCalendar calendar() const;
  // Throws ConfigError / DomainError when the spec is unusable.
  void validate() const;
};

struct GeneratedStream {
  TradeSeries series;
  std::size_t rounded = 0; // sizes moved onto layer values
};

GeneratedStream generate_stream(const StreamSpec& spec);
TradeSeries gen_trade_stream(const StreamSpec& spec);

void to_json(nlohmann::json& j, const StreamSpec& s);
void from_json(const nlohmann::json& j, StreamSpec& s);

} // namespace tradestats
