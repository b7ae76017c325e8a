#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tradestats/aggregation.hpp"
#include "tradestats/fit.hpp"
#include "tradestats/gof.hpp"
#include "tradestats/ingestion.hpp"
#include "tradestats/preference.hpp"
#include "tradestats/synthgen.hpp"
#include "tradestats/tail.hpp"

namespace tradestats {

inline constexpr const char* kVersion = "0.1.0";

struct TickInput {
  std::string path;
  std::string ticker; // empty: file stem
};

// One JSON document describing a full run. Every random stream (synthetic
// inputs, fit searches, bootstrap resamples) is seeded from `seed` through
// named sub-seeds, so the spec-level seeds of synthetic streams are ignored.
struct PipelineConfig {
  std::uint64_t seed = 1;
  std::vector<TickInput> inputs;
  std::vector<StreamSpec> synthetic;
  TickSchema schema;
  std::optional<std::string> calendar_path;
  std::optional<std::string> meta_path; // share normalization when given
  std::vector<int> clock_scales;
  std::vector<std::size_t> event_scales;
  std::vector<ModelKind> models{ModelKind::qgamma, ModelKind::qexp};
  std::vector<TailMethod> tail_methods{std::begin(kAllTailMethods), std::end(kAllTailMethods)};
  int bins_per_decade = 20;
  double significance = 0.01;
  double spike_threshold = 5.0;
  SearchConfig search;
  EstimatorConfig tails;
};

PipelineConfig load_config(const std::filesystem::path& path);
void to_json(nlohmann::json& j, const PipelineConfig& c);
void from_json(const nlohmann::json& j, PipelineConfig& c);

std::string scale_label(const AggregationSpec& spec); // "dt=5", "dn=8"

struct ModelFit {
  FitReport fit;
  GofReport gof;
  std::vector<double> curve; // model density at the bin centers
};

struct ScaleResult {
  AggregationSpec scale;
  std::size_t sample_count = 0;
  std::vector<std::pair<double, double>> density; // (center, f_hat) of non-empty bins
  std::vector<ModelFit> fits;
  std::vector<TailEstimate> tails;
};

struct StockSpikes {
  std::string ticker;
  SpikeReport report;
};

struct Provenance {
  std::string version = kVersion;
  std::uint64_t root_seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::pair<std::string, std::uint64_t>> seeds; // stage/name -> seed
};

struct ReportBundle {
  nlohmann::json config;
  std::vector<ScaleResult> clock;
  std::vector<ScaleResult> event;
  std::vector<StockSpikes> spikes; // per stock, then "POOLED"
  Provenance provenance;
};

void to_json(nlohmann::json& j, const ReportBundle& b);
void from_json(const nlohmann::json& j, ReportBundle& b);

// Throws StageError naming the failing stage and series.
ReportBundle run_pipeline(const PipelineConfig& config);

// Serialized form used for files; identical bundles give identical text.
std::string dump_bundle(const ReportBundle& b);
ReportBundle load_bundle(const std::filesystem::path& path);

struct EmitResult {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> notices;
};

// Writes paper-style tables (delimiter-separated) and two-column plot files
// under `dir`. Throws IoError when a file cannot be written and DataError
// when a stored alpha' disagrees with its (q, beta).
EmitResult emit_tables(const ReportBundle& b, const std::filesystem::path& dir, char delimiter = ',');

} // namespace tradestats
