#include "tradestats/tail.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <thread>

#include "tradestats/distributions.hpp"
#include "tradestats/error.hpp"
#include "tradestats/seed.hpp"

namespace tradestats {

namespace {

struct PowerLawFit {
  double alpha = 0.0;
  double x_min = 0.0;
  double ks = std::numeric_limits<double>::infinity();
  std::size_t tail = 0;
};

std::vector<double> sorted_copy(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  for (const double x : v)
    if (!std::isfinite(x)) throw DomainError("tail estimation: non-finite value");
  std::sort(v.begin(), v.end());
  return v;
}

// Largest k+1 values, descending.
std::vector<double> top_values(std::span<const double> values, std::size_t k) {
  std::vector<double> v(values.begin(), values.end());
  const auto m = std::min(v.size(), k + 1);
  std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end(), std::greater<>());
  v.resize(m);
  return v;
}

// Best KS power-law fit over the cutoff grid of an ascending sample.
// Values <= 0 are ignored.
// Candidates whose KS distance reaches `bound` are abandoned early.
std::optional<PowerLawFit> best_power_law(std::span<const double> sorted, std::size_t max_candidates,
                                          std::size_t min_tail,
                                          double bound = std::numeric_limits<double>::infinity()) {
  const auto first = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), 0.0) - sorted.begin());
  const auto pos = sorted.subspan(first);
  const auto grid = xmin_grid(pos, max_candidates, min_tail);
  if (grid.empty()) return std::nullopt;

  const std::size_t n = pos.size();
  std::vector<double> logs(n);
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    logs[i] = std::log(pos[i]);
    suffix[i] = suffix[i + 1] + logs[i];
  }

  std::optional<PowerLawFit> best;
  for (const double xm : grid) {
    const auto i0 = static_cast<std::size_t>(std::lower_bound(pos.begin(), pos.end(), xm) - pos.begin());
    const std::size_t m = n - i0;
    const double lxm = std::log(xm);
    const double denom = suffix[i0] - static_cast<double>(m) * lxm;
    if (!(denom > 0.0)) continue;
    const double alpha = static_cast<double>(m) / denom;
    const double inv_m = 1.0 / static_cast<double>(m);
    const double limit = best ? best->ks : bound;
    double d = 0.0;
    for (std::size_t j = 0; j < m && d < limit; ++j) {
      const double f = -std::expm1(-alpha * (logs[i0 + j] - lxm));
      d = std::max({d, std::abs(static_cast<double>(j + 1) * inv_m - f), std::abs(static_cast<double>(j) * inv_m - f)});
    }
    if (d < limit) best = PowerLawFit{alpha, xm, d, m};
  }
  return best;
}

double median_of_sorted(std::span<const double> s) {
  const std::size_t n = s.size();
  return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

} // namespace

std::string_view method_name(TailMethod m) {
  switch (m) {
  case TailMethod::lse: return "lse";
  case TailMethod::hill: return "he";
  case TailMethod::mse: return "mse";
  case TailMethod::csne: return "csne";
  case TailMethod::fae: return "fae";
  case TailMethod::rke: return "rke";
  }
  return "unknown";
}

TailMethod parse_tail_method(std::string_view name) {
  for (const auto m : kAllTailMethods)
    if (method_name(m) == name) return m;
  if (name == "hill") return TailMethod::hill;
  throw ConfigError("unknown tail method '" + std::string(name) + "'");
}

std::size_t default_hill_k(std::size_t n) {
  const std::size_t k = std::clamp<std::size_t>(n / 20, 10, 2000);
  return n > 1 ? std::min(k, n - 1) : 1;
}

std::size_t default_fae_k0(std::size_t k) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(k)))));
}

std::vector<double> xmin_grid(std::span<const double> sorted, std::size_t max_count, std::size_t min_tail) {
  std::vector<double> distinct;
  if (sorted.size() < std::max<std::size_t>(min_tail, 1) || max_count == 0) return distinct;
  const double limit = sorted[sorted.size() - std::max<std::size_t>(min_tail, 1)];
  for (const double x : sorted) {
    if (x > limit) break;
    if (x > 0.0 && (distinct.empty() || x != distinct.back())) distinct.push_back(x);
  }
  if (distinct.size() <= max_count) return distinct;

  std::vector<double> grid;
  const double l0 = std::log(distinct.front());
  const double l1 = std::log(distinct.back());
  for (std::size_t j = 0; j < max_count; ++j) {
    const double target = j + 1 == max_count ? distinct.back()
                                             : std::exp(l0 + (l1 - l0) * static_cast<double>(j) /
                                                                 static_cast<double>(max_count - 1));
    auto it = std::lower_bound(distinct.begin(), distinct.end(), target);
    if (it == distinct.end()) it = std::prev(distinct.end());
    if (grid.empty() || *it != grid.back()) grid.push_back(*it);
  }
  return grid;
}

TailEstimate lse_tail(const EmpiricalDensity& density, double tail_fraction, std::size_t min_bin_count) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw ConfigError("lse tail fraction must lie in (0, 1]");
  const double budget = tail_fraction * static_cast<double>(density.sample_count);
  std::vector<const DensityBin*> tail;
  std::size_t above = 0;
  for (auto it = density.bins.rbegin(); it != density.bins.rend(); ++it) {
    above += it->count;
    if (static_cast<double>(above) > budget * (1.0 + 1e-12)) break;
    if (it->count >= min_bin_count && it->density > 0.0) tail.push_back(&*it);
  }
  if (tail.size() < 5)
    throw DataError("lse needs at least 5 tail bins, have " + std::to_string(tail.size()));

  double sx = 0.0, sy = 0.0;
  for (const auto* b : tail) {
    sx += std::log10(b->center);
    sy += std::log10(b->density);
  }
  const double m = static_cast<double>(tail.size());
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (const auto* b : tail) {
    const double dx = std::log10(b->center) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log10(b->density) - my);
    count += b->count;
  }
  if (!(sxx > 0.0)) throw DataError("lse tail bins are degenerate");
  TailEstimate e;
  e.method = TailMethod::lse;
  e.alpha = -sxy / sxx - 1.0;
  e.x_min = tail.back()->lower;
  e.tail_size = count;
  if (!(e.alpha > 0.0)) throw DomainError("lse slope gives a non-positive exponent");
  return e;
}

TailEstimate hill(std::span<const double> values, std::size_t k) {
  const std::size_t n = values.size();
  if (k < 1 || k >= n) throw ConfigError("hill needs 1 <= k < n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  const auto top = top_values(values, k);
  const double ref = top[k];
  if (!(ref > 0.0)) throw DomainError("hill: k+1-th largest value is not positive");
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(top[i] / ref);
  if (!(sum > 0.0)) throw DomainError("hill: upper order statistics are all tied");
  TailEstimate e;
  e.method = TailMethod::hill;
  e.alpha = static_cast<double>(k) / sum;
  e.k = k;
  e.x_min = ref;
  e.tail_size = k;
  return e;
}

TailEstimate mse(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 10) throw DataError("mse needs at least 10 values");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (const double x : values) ss += (x - mean) * (x - mean);
  if (!(ss > 0.0)) throw DataError("mse: degenerate sample (zero variance)");
  const double gamma = std::max(std::log(ss), 0.0) / (2.0 * std::log(static_cast<double>(n)));
  if (!(gamma > 0.0)) throw DomainError("mse: estimate undefined (ln+ of the sum of squares is 0)");
  TailEstimate e;
  e.method = TailMethod::mse;
  e.alpha = 1.0 / gamma;
  e.tail_size = n;
  return e;
}

TailEstimate csne(std::span<const double> values, std::size_t max_candidates, std::size_t min_tail) {
  if (values.size() < 50) throw DataError("csne needs at least 50 values");
  const auto sorted = sorted_copy(values);
  const auto fit = best_power_law(sorted, max_candidates, min_tail);
  if (!fit) throw DataError("csne: fewer than " + std::to_string(min_tail) + " points above every candidate x_min");
  TailEstimate e;
  e.method = TailMethod::csne;
  e.alpha = fit->alpha;
  e.x_min = fit->x_min;
  e.tail_size = fit->tail;
  return e;
}

TailEstimate fae(std::span<const double> values, std::size_t k, std::size_t k0) {
  const std::size_t n = values.size();
  if (!(k0 >= 1 && k0 < k && k < n))
    throw ConfigError("fae needs 1 <= k0 < k < n (k0=" + std::to_string(k0) + ", k=" + std::to_string(k) +
                      ", n=" + std::to_string(n) + ")");
  const auto top = top_values(values, k);
  const double ref = top[k];
  const double denom = top[k0] - ref;
  if (!(denom > 0.0)) throw DomainError("fae: non-positive excess at the k0 order statistic");
  double sum = 0.0;
  for (std::size_t i = 0; i < k0; ++i) sum += std::log((top[i] - ref) / denom);
  if (!(sum > 0.0)) throw DomainError("fae: upper excesses are all tied");
  TailEstimate e;
  e.method = TailMethod::fae;
  e.alpha = static_cast<double>(k0) / sum;
  e.k = k;
  e.k0 = k0;
  e.tail_size = k0;
  return e;
}

TailEstimate rke(std::span<const double> values, std::size_t shift_points, std::size_t max_candidates,
                 std::size_t min_tail) {
  if (values.size() < 50) throw DataError("rke needs at least 50 values");
  if (shift_points < 1) throw ConfigError("rke needs at least one shift point");
  const auto sorted = sorted_copy(values);
  const double span_half = std::abs(median_of_sorted(sorted));

  std::optional<PowerLawFit> best;
  double best_shift = 0.0;
  std::vector<double> shifted(sorted.size());
  for (std::size_t j = 0; j < shift_points; ++j) {
    const double s = shift_points == 1 ? 0.0
                                       : -span_half + 2.0 * span_half * static_cast<double>(j) /
                                                          static_cast<double>(shift_points - 1);
    std::transform(sorted.begin(), sorted.end(), shifted.begin(), [s](double x) { return x - s; });
    const auto fit = best_power_law(shifted, max_candidates, min_tail,
                                    best ? best->ks : std::numeric_limits<double>::infinity());
    if (fit && (!best || fit->ks < best->ks)) {
      best = fit;
      best_shift = s;
    }
  }
  if (!best) throw DataError("rke: empty tail for every shift and cutoff");
  TailEstimate e;
  e.method = TailMethod::rke;
  e.alpha = best->alpha;
  e.x_min = best->x_min;
  e.shift = best_shift;
  e.tail_size = best->tail;
  return e;
}

TailEstimate estimate(TailMethod method, std::span<const double> values, const EstimatorConfig& config) {
  const std::size_t n = values.size();
  switch (method) {
  case TailMethod::lse:
    return lse_tail(log_binned_density(values, config.lse_bins_per_decade), config.lse_tail_fraction,
                    config.lse_min_bin_count);
  case TailMethod::hill: return hill(values, config.k.value_or(default_hill_k(n)));
  case TailMethod::mse: return mse(values);
  case TailMethod::csne: return csne(values, config.xmin_candidates, config.min_tail);
  case TailMethod::fae: {
    const std::size_t k = config.k.value_or(default_hill_k(n));
    return fae(values, k, config.k0.value_or(default_fae_k0(k)));
  }
  case TailMethod::rke: return rke(values, config.shift_points, config.xmin_candidates, config.min_tail);
  }
  throw ConfigError("unknown tail method");
}

BootstrapResult bootstrap_error(TailMethod method, std::span<const double> values, const EstimatorConfig& config) {
  if (config.resamples < 1) throw ConfigError("bootstrap needs at least one resample");
  if (values.empty()) throw DataError("bootstrap on an empty sample");
  const std::size_t count = config.resamples;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> alphas(count, nan);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    std::vector<double> resample(values.size());
    for (std::size_t i = next++; i < count; i = next++) {
      Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(i)));
      std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
      for (auto& x : resample) x = values[pick(rng)];
      try {
        alphas[i] = estimate(method, resample, config).alpha;
      } catch (const Error&) {
        alphas[i] = nan;
      }
    }
  };
  unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  BootstrapResult r;
  r.resamples = count;
  double sum = 0.0;
  std::size_t ok = 0;
  for (const double a : alphas) {
    if (std::isnan(a)) {
      ++r.failures;
      continue;
    }
    sum += a;
    ++ok;
  }
  if (static_cast<double>(r.failures) > 0.2 * static_cast<double>(count))
    throw DataError("unstable estimate: " + std::string(method_name(method)) + " failed on " +
                    std::to_string(r.failures) + " of " + std::to_string(count) + " resamples");
  if (ok >= 2) {
    const double mean = sum / static_cast<double>(ok);
    double ss = 0.0;
    for (const double a : alphas)
      if (!std::isnan(a)) ss += (a - mean) * (a - mean);
    r.std_error = std::sqrt(ss / static_cast<double>(ok - 1));
  }
  r.reliable = count >= 50 && ok >= 2;
  return r;
}

TailEstimate estimate_with_error(TailMethod method, std::span<const double> values, const EstimatorConfig& config) {
  auto e = estimate(method, values, config);
  const auto b = bootstrap_error(method, values, config);
  e.std_error = b.std_error;
  e.error_reliable = b.reliable;
  e.resamples = b.resamples;
  return e;
}

void to_json(nlohmann::json& j, const TailEstimate& e) {
  j = {{"method", std::string(method_name(e.method))},
       {"alpha", e.alpha},
       {"std_error", e.std_error},
       {"error_reliable", e.error_reliable},
       {"resamples", e.resamples},
       {"tail_size", e.tail_size}};
  if (e.k) j["k"] = *e.k;
  if (e.k0) {
    j["k0"] = *e.k0;
    j["k0_rule"] = "floor(sqrt(k)) unless set";
  }
  if (e.x_min) j["x_min"] = *e.x_min;
  if (e.shift) j["shift"] = *e.shift;
}

void from_json(const nlohmann::json& j, TailEstimate& e) {
  try {
    e.method = parse_tail_method(j.at("method").get<std::string>());
    e.alpha = j.at("alpha").get<double>();
    e.std_error = j.value("std_error", 0.0);
    e.error_reliable = j.value("error_reliable", false);
    e.resamples = j.value("resamples", std::size_t{0});
    e.tail_size = j.value("tail_size", std::size_t{0});
    e.k = j.contains("k") ? std::optional(j["k"].get<std::size_t>()) : std::nullopt;
    e.k0 = j.contains("k0") ? std::optional(j["k0"].get<std::size_t>()) : std::nullopt;
    e.x_min = j.contains("x_min") ? std::optional(j["x_min"].get<double>()) : std::nullopt;
    e.shift = j.contains("shift") ? std::optional(j["shift"].get<double>()) : std::nullopt;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("tail estimate json: ") + ex.what());
  }
}

} // namespace tradestats
