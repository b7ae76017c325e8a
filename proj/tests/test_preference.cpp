#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "tradestats/error.hpp"
#include "tradestats/preference.hpp"

using namespace tradestats;

namespace {

// N(w) = round(c * w^-1.5) for w = 1..max: smooth decay without round numbers.
SizeCensus geometric_census(double c, std::int64_t max) {
  SizeCensus s;
  for (std::int64_t w = 1; w <= max; ++w) s.add(w, static_cast<std::uint64_t>(std::llround(c * std::pow(w, -1.5))));
  return s;
}

SizeCensus times(const SizeCensus& c, std::uint64_t f) {
  SizeCensus out;
  for (const auto& [w, n] : c.counts) out.add(w, n * f);
  return out;
}

} // namespace

TEST(Census, Examples) {
  const std::vector<double> a{100, 100, 500};
  const auto c = size_census(a);
  EXPECT_EQ(c.counts, (std::map<std::int64_t, std::uint64_t>{{100, 2}, {500, 1}}));
  EXPECT_EQ(c.total, 3u);
  std::vector<double> ten;
  for (int i = 1; i <= 10; ++i) ten.push_back(i);
  const auto t = size_census(ten);
  EXPECT_EQ(t.counts.size(), 10u);
  for (const auto& [w, n] : t.counts) EXPECT_EQ(n, 1u);
  EXPECT_THROW(size_census(std::vector<double>{1.5}), DataError);
}

TEST(Census, TotalMatchesSeriesLength) {
  std::vector<TradeRecord> recs;
  std::mt19937_64 rng(3);
  const auto day = Date{std::chrono::year{2003} / 1 / 6};
  for (int i = 0; i < 777; ++i)
    recs.push_back({make_timestamp(day, std::chrono::hours{10}), 1 + static_cast<std::int64_t>(rng() % 50), Side::unknown});
  const auto c = size_census(TradeSeries("X", recs));
  EXPECT_EQ(c.total, 777u);
  std::uint64_t sum = 0;
  for (const auto& [w, n] : c.counts) sum += n;
  EXPECT_EQ(sum, c.total);
}

TEST(Layers, DefinitionsAndDisjointness) {
  EXPECT_EQ(layer_by_id(1).values().front(), 10000);
  EXPECT_EQ(layer_by_id(2).values().front(), 15000);
  EXPECT_EQ(layer_by_id(3).values().back(), 9000);
  EXPECT_EQ(layer_by_id(4).values().back(), 9500);
  EXPECT_EQ(layer_by_id(6).values().front(), 150);
  EXPECT_THROW(layer_by_id(0), ConfigError);
  EXPECT_THROW(layer_by_id(7), ConfigError);
  std::set<std::int64_t> seen;
  std::size_t n = 0;
  for (const auto& l : all_layers())
    for (const auto w : l.values()) {
      seen.insert(w);
      ++n;
      EXPECT_EQ(layer_of(w), l.id);
    }
  EXPECT_EQ(seen.size(), n);
  EXPECT_FALSE(layer_of(100000).has_value());
  EXPECT_FALSE(layer_of(1234).has_value());
  EXPECT_FALSE(layer_of(50).has_value());
}

TEST(Spikes, SingleLayerOneSpike) {
  auto c = geometric_census(1e8, 20000);
  const double bg = local_background(c, 10000);
  ASSERT_GT(bg, 0.0);
  c.counts[10000] = static_cast<std::uint64_t>(50 * bg);
  c.total = 0;
  for (const auto& [w, n] : c.counts) c.total += n;
  const auto r = spike_layers(c, 5.0);
  EXPECT_FALSE(r.inconclusive);
  ASSERT_EQ(r.layers.size(), 6u);
  EXPECT_EQ(r.layers[0].flagged, 1u);
  EXPECT_TRUE(r.layers[0].locations[0].flagged);
  EXPECT_NEAR(r.layers[0].locations[0].ratio, 50.0, 0.5);
  EXPECT_EQ(r.flagged_count(), 1u);
  for (const auto& l : r.layers) {
    EXPECT_EQ(l.locations.size(), 9u);
    for (const auto& s : l.locations)
      if (s.flagged) {
        EXPECT_GT(s.ratio, r.threshold);
      }
  }
}

TEST(Spikes, SmoothCensusHasNone) {
  const auto c = geometric_census(1e8, 20000);
  for (const double t : {2.0, 5.0, 20.0}) EXPECT_EQ(spike_layers(c, t).flagged_count(), 0u);
  EXPECT_LT(preference_score(c), 0.02);
}

TEST(Spikes, CountScalingInvariance) {
  auto c = geometric_census(1e6, 12000);
  c.add(3000, 400);
  c.add(500, 900);
  const auto a = spike_layers(c, 5.0);
  for (const std::uint64_t f : {2u, 7u, 1000u}) {
    const auto b = spike_layers(times(c, f), 5.0);
    EXPECT_NEAR(b.score, a.score, 1e-12);
    for (std::size_t i = 0; i < a.layers.size(); ++i)
      for (std::size_t j = 0; j < 9; ++j) {
        EXPECT_EQ(b.layers[i].locations[j].flagged, a.layers[i].locations[j].flagged);
        EXPECT_NEAR(b.layers[i].locations[j].ratio, a.layers[i].locations[j].ratio, 1e-12 * (1 + a.layers[i].locations[j].ratio));
      }
  }
}

TEST(Score, AllMassOnLayerOneIsNearOne) {
  SizeCensus c;
  for (std::int64_t k = 1; k <= 9; ++k) c.add(10000 * k, 1000 / static_cast<std::uint64_t>(k));
  EXPECT_GT(preference_score(c), 0.9);
}

TEST(Score, AddingNonLayerMassNeverRaisesIt) {
  std::mt19937_64 rng(5);
  auto c = geometric_census(1e6, 12000);
  for (const auto w : layer_by_id(3).values()) c.add(w, 300);
  std::vector<std::int64_t> keys;
  for (const auto& [w, n] : c.counts)
    if (!layer_of(w)) keys.push_back(w);
  double score = preference_score(c);
  for (int step = 0; step < 200; ++step) {
    c.add(keys[rng() % keys.size()], 1 + rng() % 500);
    const double next = preference_score(c);
    EXPECT_LE(next, score + 1e-12);
    score = next;
  }
}

TEST(Score, StaysInUnitInterval) {
  SizeCensus c;
  for (std::int64_t w = 1; w < 3000; ++w)
    if (w != 1000) c.add(w, 10); // layer hole below background
  EXPECT_GE(preference_score(c), 0.0);
  EXPECT_LE(preference_score(c), 1.0);
}

TEST(Spikes, SmallCensusIsInconclusive) {
  SizeCensus c;
  c.add(1000, 50);
  c.add(17, 10);
  const auto r = spike_layers(c);
  EXPECT_TRUE(r.inconclusive);
  EXPECT_THROW(spike_layers(c, 0.0), ConfigError);
}

TEST(Spikes, JsonRoundTripKeepsInfiniteRatio) {
  SizeCensus c;
  c.add(10000, 2000);
  const auto r = spike_layers(c);
  EXPECT_TRUE(std::isinf(r.layers[0].locations[0].ratio));
  const nlohmann::json j = r;
  const auto back = j.get<SpikeReport>();
  EXPECT_TRUE(std::isinf(back.layers[0].locations[0].ratio));
  EXPECT_EQ(nlohmann::json(back), j);
}
