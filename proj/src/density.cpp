#include "tradestats/density.hpp"

#include <algorithm>
#include <cmath>

#include "tradestats/error.hpp"

namespace tradestats {

EmpiricalDensity log_binned_density(std::span<const double> values, int bins_per_decade) {
  if (bins_per_decade < 1) throw ConfigError("bins_per_decade must be >= 1");
  if (values.empty()) throw DataError("log_binned_density: empty input");
  for (const double v : values)
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("log-binned density needs finite positive values");

  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double log_lo = std::log10(lo);
  const double bpd = bins_per_decade;
  const auto nbins = static_cast<std::size_t>(std::floor(bpd * (std::log10(*hi_it) - log_lo))) + 1;

  std::vector<std::size_t> counts(nbins, 0);
  for (const double v : values) {
    const double pos = bpd * (std::log10(v) - log_lo);
    const auto j = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), nbins - 1);
    ++counts[j];
  }

  EmpiricalDensity out;
  out.bins_per_decade = bins_per_decade;
  out.sample_count = values.size();
  const double n = static_cast<double>(values.size());
  for (std::size_t j = 0; j < nbins; ++j) {
    if (counts[j] == 0) continue;
    DensityBin b;
    b.lower = lo * std::pow(10.0, static_cast<double>(j) / bpd);
    b.upper = lo * std::pow(10.0, static_cast<double>(j + 1) / bpd);
    b.center = std::sqrt(b.lower * b.upper);
    b.count = counts[j];
    b.density = static_cast<double>(counts[j]) / (n * b.width());
    out.bins.push_back(b);
  }
  return out;
}

} // namespace tradestats
