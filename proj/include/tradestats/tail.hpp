#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tradestats/density.hpp"

namespace tradestats {

// Tail exponent alpha refers to f(v) ~ v^(-alpha-1) throughout.
enum class TailMethod { lse, hill, mse, csne, fae, rke };

inline constexpr TailMethod kAllTailMethods[] = {TailMethod::hill, TailMethod::mse, TailMethod::csne,
                                                 TailMethod::lse,  TailMethod::fae, TailMethod::rke};

// Short ids used on the command line and in reports: lse, he, mse, csne,
// fae, rke.
std::string_view method_name(TailMethod m);
TailMethod parse_tail_method(std::string_view name);

struct EstimatorConfig {
  // Hill/FAE order-statistics count; default floor(0.05 n) within [10, 2000].
  std::optional<std::size_t> k;
  // FAE inner count; default floor(sqrt(k)).
  std::optional<std::size_t> k0;
  std::size_t xmin_candidates = 200;
  std::size_t min_tail = 10;
  std::size_t shift_points = 41;
  // LSE: share of the sample (from the top) whose bins are regressed.
  double lse_tail_fraction = 0.1;
  int lse_bins_per_decade = 10;
  std::size_t lse_min_bin_count = 5;
  std::size_t resamples = 200;
  std::uint64_t seed = 1;
  unsigned threads = 0; // 0: hardware concurrency
};

struct TailEstimate {
  TailMethod method = TailMethod::hill;
  double alpha = 0.0;
  double std_error = 0.0;
  // False when the error rests on fewer than 50 resamples (or none).
  bool error_reliable = false;
  std::size_t resamples = 0;
  std::optional<std::size_t> k;
  std::optional<std::size_t> k0;
  std::optional<double> x_min;
  std::optional<double> shift;
  std::size_t tail_size = 0;
};

std::size_t default_hill_k(std::size_t n);
std::size_t default_fae_k0(std::size_t k);

// Candidate cutoffs: distinct positive values with at least min_tail
// points at or above them, thinned to <= max_count log-spaced picks.
// `sorted` must be ascending.
std::vector<double> xmin_grid(std::span<const double> sorted, std::size_t max_count, std::size_t min_tail);

// OLS of log10 density on log10 v over the bins holding the top
// `tail_fraction` of the sample; alpha = -slope - 1.
TailEstimate lse_tail(const EmpiricalDensity& density, double tail_fraction, std::size_t min_bin_count = 1);

// Requires 1 <= k < n and a positive k+1-th largest value.
TailEstimate hill(std::span<const double> values, std::size_t k);

// Moment estimator on mean-normalized values:
// alpha = 2 ln n / ln+(sum (x_i - mean)^2).
TailEstimate mse(std::span<const double> values);

// Power-law MLE alpha = m / sum ln(x_i / x_min) at the cutoff from
// xmin_grid that minimizes the Kolmogorov-Smirnov distance of the tail.
// Requires n >= 50.
TailEstimate csne(std::span<const double> values, std::size_t max_candidates = 200, std::size_t min_tail = 10);

// Location-invariant Hill-type estimator; requires 1 <= k0 < k < n.
TailEstimate fae(std::span<const double> values, std::size_t k, std::size_t k0);

// csne applied to x - s for `shift_points` shifts spread linearly over
// [-median, +median]; keeps the (s, x_min) pair with the smallest KS
// distance. Requires n >= 50.
TailEstimate rke(std::span<const double> values, std::size_t shift_points = 41, std::size_t max_candidates = 200,
                 std::size_t min_tail = 10);

// Point estimate for `method` with the nuisances from `config`.
TailEstimate estimate(TailMethod method, std::span<const double> values, const EstimatorConfig& config = {});

struct BootstrapResult {
  double std_error = 0.0;
  std::size_t resamples = 0;
  std::size_t failures = 0;
  bool reliable = false;
};

// Standard deviation of `method` over seeded resamples with replacement.
// Deterministic for a given seed regardless of thread count. More than 20%
// failing resamples raises DataError.
BootstrapResult bootstrap_error(TailMethod method, std::span<const double> values, const EstimatorConfig& config);

// estimate() plus its bootstrap error.
TailEstimate estimate_with_error(TailMethod method, std::span<const double> values, const EstimatorConfig& config);

void to_json(nlohmann::json& j, const TailEstimate& e);
void from_json(const nlohmann::json& j, TailEstimate& e);

} // namespace tradestats
