#include "tradestats/preference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "tradestats/error.hpp"

namespace tradestats {

namespace {

constexpr std::array<Layer, 6> kLayers{{
    {1, 4, false}, {2, 4, true}, {3, 3, false}, {4, 3, true}, {5, 2, false}, {6, 2, true},
}};

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

} // namespace

std::vector<std::int64_t> Layer::values() const {
  std::int64_t unit = 1;
  for (int i = 0; i < exponent; ++i) unit *= 10;
  std::vector<std::int64_t> out;
  for (std::int64_t k = 1; k <= 9; ++k) out.push_back(half ? unit * k + unit / 2 : unit * k);
  return out;
}

std::span<const Layer> all_layers() { return kLayers; }

Layer layer_by_id(int id) {
  if (id < 1 || id > 6) throw ConfigError("layer id must be 1..6, got " + std::to_string(id));
  return kLayers[static_cast<std::size_t>(id - 1)];
}

std::optional<int> layer_of(std::int64_t size) {
  for (const auto& l : kLayers) {
    std::int64_t unit = 1;
    for (int i = 0; i < l.exponent; ++i) unit *= 10;
    const std::int64_t base = l.half ? size - unit / 2 : size;
    if (base % unit == 0 && base / unit >= 1 && base / unit <= 9) return l.id;
  }
  return std::nullopt;
}

void SizeCensus::add(std::int64_t size, std::uint64_t count) {
  if (count == 0) return;
  counts[size] += count;
  total += count;
}

void SizeCensus::merge(const SizeCensus& other) {
  for (const auto& [size, n] : other.counts) add(size, n);
}

SizeCensus size_census(const TradeSeries& series) {
  SizeCensus c;
  for (const auto& r : series.records()) c.add(r.size);
  return c;
}

SizeCensus size_census(std::span<const double> sizes) {
  SizeCensus c;
  for (const double x : sizes) {
    if (!std::isfinite(x) || x != std::floor(x) || std::abs(x) > 9.0e15)
      throw DataError("size census needs raw integer sizes; got " + std::to_string(x) +
                      " (use the series before share normalization)");
    c.add(static_cast<std::int64_t>(x));
  }
  return c;
}

double local_background(const SizeCensus& census, std::int64_t size, std::size_t neighbours) {
  const auto& m = census.counts;
  auto up = m.upper_bound(size);
  auto down = m.lower_bound(size); // first key >= size; step back before use
  std::vector<double> picked;
  auto usable = [](const auto& it) { return it->second > 0 && !layer_of(it->first); };
  while (picked.size() < neighbours && (up != m.end() || down != m.begin())) {
    const bool has_down = down != m.begin();
    const bool has_up = up != m.end();
    bool take_down = has_down;
    if (has_down && has_up) take_down = size - std::prev(down)->first <= up->first - size;
    if (take_down) {
      --down;
      if (usable(down)) picked.push_back(static_cast<double>(down->second));
    } else {
      if (usable(up)) picked.push_back(static_cast<double>(up->second));
      ++up;
    }
  }
  return median(std::move(picked));
}

std::size_t SpikeReport::flagged_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.flagged;
  return n;
}

SpikeReport spike_layers(const SizeCensus& census, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("spike threshold must be positive");
  SpikeReport r;
  r.threshold = threshold;
  r.total = census.total;
  r.inconclusive = census.total < 1000;
  for (const auto& layer : kLayers) {
    LayerReport lr;
    lr.layer = layer;
    for (const auto w : layer.values()) {
      SpikeLocation s;
      s.size = w;
      const auto it = census.counts.find(w);
      s.count = it == census.counts.end() ? 0 : it->second;
      s.background = local_background(census, w);
      if (s.background > 0.0)
        s.ratio = static_cast<double>(s.count) / s.background;
      else
        s.ratio = s.count > 0 ? std::numeric_limits<double>::infinity() : 0.0;
      s.flagged = s.ratio > threshold;
      if (s.flagged) ++lr.flagged;
      lr.locations.push_back(s);
    }
    r.layers.push_back(std::move(lr));
  }
  r.score = preference_score(census);
  return r;
}

double preference_score(const SizeCensus& census) {
  if (census.total == 0) return 0.0;
  double excess = 0.0;
  for (const auto& layer : kLayers) {
    for (const auto w : layer.values()) {
      const auto it = census.counts.find(w);
      const double n = it == census.counts.end() ? 0.0 : static_cast<double>(it->second);
      excess += n - local_background(census, w);
    }
  }
  return std::clamp(excess / static_cast<double>(census.total), 0.0, 1.0);
}

namespace {

nlohmann::json ratio_json(double r) {
  if (std::isinf(r)) return "inf";
  return r;
}

double ratio_from(const nlohmann::json& j) {
  if (j.is_string()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

} // namespace

void to_json(nlohmann::json& j, const SpikeReport& r) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : r.layers) {
    nlohmann::json locs = nlohmann::json::array();
    for (const auto& s : l.locations)
      locs.push_back({{"size", s.size},
                      {"count", s.count},
                      {"background", s.background},
                      {"ratio", ratio_json(s.ratio)},
                      {"flagged", s.flagged}});
    layers.push_back({{"id", l.layer.id},
                      {"exponent", l.layer.exponent},
                      {"half", l.layer.half},
                      {"flagged", l.flagged},
                      {"locations", std::move(locs)}});
  }
  j = {{"threshold", r.threshold},
       {"total", r.total},
       {"inconclusive", r.inconclusive},
       {"score", r.score},
       {"layers", std::move(layers)}};
}

void from_json(const nlohmann::json& j, SpikeReport& r) {
  try {
    r.threshold = j.at("threshold").get<double>();
    r.total = j.at("total").get<std::uint64_t>();
    r.inconclusive = j.at("inconclusive").get<bool>();
    r.score = j.at("score").get<double>();
    r.layers.clear();
    for (const auto& lj : j.at("layers")) {
      LayerReport l;
      l.layer = layer_by_id(lj.at("id").get<int>());
      l.flagged = lj.at("flagged").get<std::size_t>();
      for (const auto& sj : lj.at("locations"))
        l.locations.push_back({sj.at("size").get<std::int64_t>(), sj.at("count").get<std::uint64_t>(),
                               sj.at("background").get<double>(), ratio_from(sj.at("ratio")),
                               sj.at("flagged").get<bool>()});
      r.layers.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("spike report json: ") + e.what());
  }
}

} // namespace tradestats
