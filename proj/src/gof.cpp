#include "tradestats/gof.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tradestats/error.hpp"

namespace tradestats {

double cvm_statistic(std::span<const double> sorted_values, const CdfFunction& cdf) {
  if (sorted_values.empty()) throw DataError("Cramer-von Mises: empty sample");
  if (!std::is_sorted(sorted_values.begin(), sorted_values.end()))
    throw DomainError("Cramer-von Mises: sample must be sorted ascending");
  const double n = static_cast<double>(sorted_values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < sorted_values.size(); ++i) {
    const double d = (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n) - cdf(sorted_values[i]);
    sum += d * d;
  }
  return 1.0 / (12.0 * n) + sum;
}

double cvm_critical_value(double significance) {
  struct Entry {
    double level;
    double critical;
  };
  static constexpr Entry table[] = {{0.10, 0.347}, {0.05, 0.461}, {0.01, 0.743}};
  for (const auto& e : table)
    if (std::abs(e.level - significance) < 1e-12) return e.critical;
  throw ConfigError("Cramer-von Mises: significance must be 0.10, 0.05 or 0.01");
}

GofReport cvm_test(std::span<const double> values, const CdfFunction& cdf, double significance) {
  GofReport r;
  r.significance = significance;
  r.critical_value = cvm_critical_value(significance);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  r.statistic = cvm_statistic(sorted, cdf);
  r.n = sorted.size();
  r.accept = r.statistic < r.critical_value;
  return r;
}

GofReport cvm_test(std::span<const double> values, const ModelParams& model, double significance) {
  validate(model);
  return cvm_test(values, [&model](double v) { return cdf(model, v); }, significance);
}

void to_json(nlohmann::json& j, const GofReport& r) {
  j = {{"statistic", r.statistic},
       {"n", r.n},
       {"significance", r.significance},
       {"critical_value", r.critical_value},
       {"accept", r.accept}};
}

void from_json(const nlohmann::json& j, GofReport& r) {
  r.statistic = j.at("statistic").get<double>();
  r.n = j.at("n").get<std::size_t>();
  r.significance = j.at("significance").get<double>();
  r.critical_value = j.at("critical_value").get<double>();
  r.accept = j.at("accept").get<bool>();
}

} // namespace tradestats
