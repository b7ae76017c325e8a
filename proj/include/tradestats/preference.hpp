#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "tradestats/ingestion.hpp"

namespace tradestats {

// Round-number sizes 10^exponent * k (integer layer) or 10^exponent *
// (k + 0.5) (half layer), k = 1..9. Ids run 1..6 from the coarsest:
// 1 = 10^4 k, 2 = 10^4 (k+.5), 3 = 10^3 k, 4 = 10^3 (k+.5), 5 = 10^2 k,
// 6 = 10^2 (k+.5).
struct Layer {
  int id = 0;
  int exponent = 0;
  bool half = false;

  std::vector<std::int64_t> values() const;
  friend bool operator==(const Layer&, const Layer&) = default;
};

std::span<const Layer> all_layers();
Layer layer_by_id(int id);
// Layer id of `size`, if it is a layer location.
std::optional<int> layer_of(std::int64_t size);

struct SizeCensus {
  std::map<std::int64_t, std::uint64_t> counts;
  std::uint64_t total = 0;

  void add(std::int64_t size, std::uint64_t count = 1);
  void merge(const SizeCensus& other);
};

SizeCensus size_census(const TradeSeries& series);
// Throws DataError for a non-integer value (normalized input).
SizeCensus size_census(std::span<const double> sizes);

// Median count over the `neighbours` nearest non-layer sizes with a nonzero
// count; 0 when there are none.
double local_background(const SizeCensus& census, std::int64_t size, std::size_t neighbours = 20);

struct SpikeLocation {
  std::int64_t size = 0;
  std::uint64_t count = 0;
  double background = 0.0;
  double ratio = 0.0; // +inf when the background is empty and count > 0
  bool flagged = false;
};

struct LayerReport {
  Layer layer;
  std::vector<SpikeLocation> locations; // all nine, ascending
  std::size_t flagged = 0;
};

struct SpikeReport {
  double threshold = 5.0;
  std::uint64_t total = 0;
  bool inconclusive = false; // total below 1000
  std::vector<LayerReport> layers;
  double score = 0.0;

  std::size_t flagged_count() const;
};

SpikeReport spike_layers(const SizeCensus& census, double threshold = 5.0);

// (layer count - background at layer locations) / total, clamped to [0, 1].
double preference_score(const SizeCensus& census);

void to_json(nlohmann::json& j, const SpikeReport& r);
void from_json(const nlohmann::json& j, SpikeReport& r);

} // namespace tradestats
