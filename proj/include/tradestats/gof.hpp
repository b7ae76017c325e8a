#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include <nlohmann/json.hpp>

#include "tradestats/distributions.hpp"

namespace tradestats {

using CdfFunction = std::function<double(double)>;

// One-sample Cramer-von Mises statistic
//   1/(12n) + sum_i [(2i-1)/(2n) - F(v_i)]^2
// over values sorted ascending. Throws DataError on an empty sample and
// DomainError if the values are not sorted.
double cvm_statistic(std::span<const double> sorted_values, const CdfFunction& cdf);

// Asymptotic upper quantiles of the statistic for a fully specified null:
// 0.347 (10%), 0.461 (5%), 0.743 (1%). Other levels raise ConfigError.
double cvm_critical_value(double significance);

struct GofReport {
  double statistic = 0.0;
  std::size_t n = 0;
  double significance = 0.01;
  double critical_value = 0.0;
  bool accept = false;
};

// Sorts a copy of the sample; accept <=> statistic < critical value.
GofReport cvm_test(std::span<const double> values, const CdfFunction& cdf, double significance);
GofReport cvm_test(std::span<const double> values, const ModelParams& model, double significance);

void to_json(nlohmann::json& j, const GofReport& r);
void from_json(const nlohmann::json& j, GofReport& r);

} // namespace tradestats
