#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tradestats {

struct DensityBin {
  double lower = 0.0;
  double upper = 0.0;
  double center = 0.0; // geometric mean of the edges
  double density = 0.0;
  std::size_t count = 0;

  double width() const { return upper - lower; }
};

// Log-binned density estimate. Only non-empty bins are stored; every stored
// bin lies on the grid min * 10^(j / bins_per_decade).
struct EmpiricalDensity {
  int bins_per_decade = 0;
  std::size_t sample_count = 0;
  std::vector<DensityBin> bins;
};

// Geometric bins anchored at the sample minimum and covering the maximum.
// Density of a bin is count / (N * width). Throws DomainError on a value
// <= 0 and DataError on empty input.
EmpiricalDensity log_binned_density(std::span<const double> values, int bins_per_decade);

} // namespace tradestats
