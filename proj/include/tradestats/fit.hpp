#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "tradestats/density.hpp"
#include "tradestats/distributions.hpp"

namespace tradestats {

// How the model is compared with a bin: its density at the geometric
// center, or its mean density over the bin (interval mass / width).
enum class BinModel { center, average };

// Weight of a bin's squared log residual: 1 for every bin, or the bin count
// (inverse of the Poisson variance of log f_hat).
enum class BinWeight { uniform, count };

// Global search settings. The search walks a regular grid over a
// per-model box in transformed parameter space (log scales, log(q-1)),
// keeping a tabu list of recently visited cells, then polishes the best
// cells with Nelder-Mead.
struct SearchConfig {
  std::uint64_t seed = 1;
  int grid_cells = 12;       // per dimension
  int starts = 4;            // tabu walks from random cells
  int steps_per_start = 120;
  int tabu_tenure = 30;
  int refine_seeds = 3;      // best distinct cells handed to the simplex
  int max_simplex_iterations = 5000;
  int max_restarts = 6;
  double tolerance = 1e-13;
  // Bins with fewer samples than this are left out of the objective.
  std::size_t min_bin_count = 30;
  BinModel bin_model = BinModel::average;
  BinWeight weight = BinWeight::count;
};

struct FitReport {
  ModelKind kind = ModelKind::qgamma;
  ModelParams params;
  // Root-mean-square of log10(f_hat) - log10(f_model) over the fitted bins.
  double chi = 0.0;
  BinModel bin_model = BinModel::average;
  BinWeight weight = BinWeight::count;
  std::optional<double> alpha_prime;
  bool converged = false;
  std::size_t bins_used = 0;
  std::size_t evaluations = 0;
  // Best objective (weighted sum of squared log10 residuals) after each
  // accepted step.
  std::vector<double> trace;
};

// Bins that enter the objective under `min_count`.
std::vector<DensityBin> fitted_bins(const EmpiricalDensity& density, std::size_t min_count);

// Model density compared with a bin under `mode`.
double model_bin_density(const ModelParams& params, const DensityBin& bin, BinModel mode);

// Sum over bins of w * (log10 f_hat - log10 f_model)^2; +inf when the
// model is invalid or vanishes on a bin.
double log_residual_sse(const ModelParams& params, std::span<const DensityBin> bins,
                        BinModel mode = BinModel::average, BinWeight weight = BinWeight::uniform);

// Requires at least 10 bins passing min_bin_count. Deterministic per seed.
// A search that exhausts its budget returns its best point with
// converged = false.
FitReport fit_model(const EmpiricalDensity& density, ModelKind kind, const SearchConfig& config = {});

void to_json(nlohmann::json& j, const FitReport& r);
void from_json(const nlohmann::json& j, FitReport& r);

} // namespace tradestats
