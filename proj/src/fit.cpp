#include "tradestats/fit.hpp"

#include <algorithm>
#include <iterator>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "nelder_mead.hpp"
#include "tradestats/error.hpp"

namespace tradestats {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Point = std::vector<double>;

// Search box in a transformed space where each coordinate is unbounded.
struct ModelSpace {
  std::size_t dim = 0;
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
  ModelParams (*to_params)(const Point&) = nullptr;
};

// q - 1 is floored so that 1/(q-1) stays representable near the Gamma limit.
double q_from(double z) { return 1.0 + std::max(std::exp(z), 1e-6); }

ModelParams qgamma_from(const Point& z) { return QGammaParams{std::exp(z[0]), std::abs(z[1]), q_from(z[2])}; }
ModelParams qexp_from(const Point& z) { return QExpParams{std::exp(z[0]), q_from(z[1])}; }
ModelParams student_from(const Point& z) { return StudentParams{std::exp(z[0]), std::exp(z[1]), z[2]}; }
ModelParams lognormal_from(const Point& z) { return LogNormalParams{z[0], std::exp(z[1])}; }

ModelSpace space_for(ModelKind kind, std::span<const DensityBin> bins) {
  const double c_lo = bins.front().center;
  const double c_hi = bins.back().center;
  double mass = 0.0;
  double c_med = c_lo;
  for (const auto& b : bins) {
    mass += b.density * b.width();
    if (mass < 0.5) c_med = b.center;
  }
  const double l_lo = std::log(c_lo);
  const double l_hi = std::log(c_hi);
  const double lq_lo = std::log(0.01);
  const double lq_hi = std::log(0.9);
  switch (kind) {
  case ModelKind::qgamma: return {3, {l_lo, 0.0, lq_lo}, {l_hi, 6.0, lq_hi}, qgamma_from};
  case ModelKind::qexp: return {2, {l_lo, lq_lo, 0.0}, {l_hi, lq_hi, 0.0}, qexp_from};
  case ModelKind::student:
    return {3, {std::log(0.2), -2.0 * l_hi, 0.0}, {std::log(200.0), -2.0 * l_lo, 4.0 * c_med}, student_from};
  case ModelKind::lognormal: return {2, {l_lo, std::log(0.05), 0.0}, {l_hi, std::log(5.0), 0.0}, lognormal_from};
  }
  throw ConfigError("unsupported model kind");
}

class GridWalker {
public:
  GridWalker(const ModelSpace& space, int cells) : space_(space), cells_(cells) {}

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (std::size_t k = 0; k < space_.dim; ++k) n *= static_cast<std::size_t>(cells_);
    return n;
  }

  Point center(std::size_t cell) const {
    Point z(space_.dim);
    for (std::size_t k = 0; k < space_.dim; ++k) {
      const auto i = static_cast<double>(cell % static_cast<std::size_t>(cells_));
      cell /= static_cast<std::size_t>(cells_);
      z[k] = space_.lo[k] + (i + 0.5) * width(k);
    }
    return z;
  }

  double width(std::size_t k) const { return (space_.hi[k] - space_.lo[k]) / cells_; }

  std::vector<std::size_t> neighbours(std::size_t cell) const {
    std::array<int, 3> coord{};
    std::size_t rest = cell;
    for (std::size_t k = 0; k < space_.dim; ++k) {
      coord[k] = static_cast<int>(rest % static_cast<std::size_t>(cells_));
      rest /= static_cast<std::size_t>(cells_);
    }
    std::vector<std::size_t> out;
    std::size_t combos = 1;
    for (std::size_t k = 0; k < space_.dim; ++k) combos *= 3;
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t code = c;
      std::size_t idx = 0;
      std::size_t mul = 1;
      bool inside = true;
      bool moved = false;
      for (std::size_t k = 0; k < space_.dim; ++k) {
        const int delta = static_cast<int>(code % 3) - 1;
        code /= 3;
        const int v = coord[k] + delta;
        if (v < 0 || v >= cells_) inside = false;
        if (delta != 0) moved = true;
        idx += static_cast<std::size_t>(v) * mul;
        mul *= static_cast<std::size_t>(cells_);
      }
      if (inside && moved) out.push_back(idx);
    }
    return out;
  }

private:
  const ModelSpace& space_;
  int cells_;
};

} // namespace

std::vector<DensityBin> fitted_bins(const EmpiricalDensity& density, std::size_t min_count) {
  std::vector<DensityBin> out;
  std::copy_if(density.bins.begin(), density.bins.end(), std::back_inserter(out),
               [min_count](const DensityBin& b) { return b.count >= min_count && b.density > 0.0; });
  return out;
}

double model_bin_density(const ModelParams& params, const DensityBin& bin, BinModel mode) {
  if (mode == BinModel::center) return pdf(params, bin.center);
  return interval_mass(params, bin.lower, bin.upper) / bin.width();
}

double log_residual_sse(const ModelParams& params, std::span<const DensityBin> bins, BinModel mode,
                        BinWeight weight) {
  if (!is_valid(params)) return kInf;
  double sse = 0.0;
  for (const auto& b : bins) {
    double lf;
    try {
      lf = mode == BinModel::center ? log_pdf(params, b.center) / std::numbers::ln10
                                    : std::log10(model_bin_density(params, b, mode));
    } catch (const DomainError&) {
      return kInf;
    }
    if (!std::isfinite(lf)) return kInf;
    const double r = std::log10(b.density) - lf;
    sse += (weight == BinWeight::count ? static_cast<double>(b.count) : 1.0) * r * r;
  }
  return sse;
}

FitReport fit_model(const EmpiricalDensity& density, ModelKind kind, const SearchConfig& config) {
  const auto bins = fitted_bins(density, config.min_bin_count);
  if (bins.size() < 10)
    throw DataError("fit_model needs at least 10 bins, have " + std::to_string(bins.size()));
  if (config.grid_cells < 2 || config.starts < 1 || config.refine_seeds < 1)
    throw ConfigError("search config: grid_cells >= 2, starts >= 1, refine_seeds >= 1");

  const ModelSpace space = space_for(kind, bins);
  const GridWalker grid(space, config.grid_cells);

  FitReport report;
  report.kind = kind;
  report.bin_model = config.bin_model;
  report.weight = config.weight;
  double best = kInf;
  auto objective = [&](const Point& z) {
    ++report.evaluations;
    return log_residual_sse(space.to_params(z), bins, config.bin_model, config.weight);
  };
  auto note = [&](double v) {
    if (v < best) best = v;
    report.trace.push_back(best);
  };

  std::unordered_map<std::size_t, double> visited;
  auto cell_value = [&](std::size_t cell) {
    const auto it = visited.find(cell);
    if (it != visited.end()) return it->second;
    const double v = objective(grid.center(cell));
    visited.emplace(cell, v);
    return v;
  };

  Rng rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, grid.cell_count() - 1);
  std::deque<std::size_t> tabu;
  auto is_tabu = [&tabu](std::size_t c) { return std::find(tabu.begin(), tabu.end(), c) != tabu.end(); };

  for (int s = 0; s < config.starts; ++s) {
    std::size_t current = pick(rng);
    note(cell_value(current));
    for (int step = 0; step < config.steps_per_start; ++step) {
      std::size_t next = current;
      double next_value = kInf;
      bool found = false;
      for (const auto c : grid.neighbours(current)) {
        const double v = cell_value(c);
        if (is_tabu(c) && !(v < best)) continue; // aspiration overrides tabu
        if (!found || v < next_value || (v == next_value && c < next)) {
          next = c;
          next_value = v;
          found = true;
        }
      }
      if (!found) break;
      tabu.push_back(current);
      if (tabu.size() > static_cast<std::size_t>(config.tabu_tenure)) tabu.pop_front();
      current = next;
      note(next_value);
    }
  }

  std::vector<std::pair<double, std::size_t>> ranked;
  for (const auto& [cell, v] : visited)
    if (std::isfinite(v)) ranked.emplace_back(v, cell);
  std::sort(ranked.begin(), ranked.end());
  if (ranked.empty()) throw DataError("fit_model: no valid parameter point found in the search box");

  Point step(space.dim);
  for (std::size_t k = 0; k < space.dim; ++k) step[k] = 0.5 * grid.width(k);

  detail::SimplexResult best_run;
  best_run.value = kInf;
  const auto seeds = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(config.refine_seeds));
  for (std::size_t i = 0; i < seeds; ++i) {
    auto run = detail::nelder_mead(objective, grid.center(ranked[i].second), step,
                                   config.max_simplex_iterations, config.tolerance, note);
    if (run.value < best_run.value) best_run = std::move(run);
  }
  // Restart from the incumbent with a fresh simplex until it stops moving.
  for (int r = 0; r < config.max_restarts; ++r) {
    Point small(space.dim);
    for (std::size_t k = 0; k < space.dim; ++k) small[k] = 0.05 * grid.width(k);
    auto run = detail::nelder_mead(objective, best_run.x, small, config.max_simplex_iterations,
                                   config.tolerance, note);
    const bool improved = run.value < best_run.value * (1.0 - 1e-10) - 1e-300;
    if (run.value <= best_run.value) best_run = std::move(run);
    if (!improved) break;
  }

  report.params = space.to_params(best_run.x);
  report.converged = best_run.converged;
  report.bins_used = bins.size();
  report.chi = std::sqrt(log_residual_sse(report.params, bins, config.bin_model, BinWeight::uniform) /
                         static_cast<double>(bins.size()));
  report.alpha_prime = tail_exponent(report.params);
  return report;
}

void to_json(nlohmann::json& j, const FitReport& r) {
  j = {{"model", std::string(model_name(r.kind))},
       {"params", r.params},
       {"chi", r.chi},
       {"chi_definition", "rms_log10_residual"},
       {"bin_model", r.bin_model == BinModel::center ? "center" : "average"},
       {"bin_weight", r.weight == BinWeight::count ? "count" : "uniform"},
       {"converged", r.converged},
       {"bins_used", r.bins_used},
       {"evaluations", r.evaluations},
       {"search_steps", r.trace.size()}};
  if (r.alpha_prime) j["alpha_prime"] = *r.alpha_prime;
  if (!r.trace.empty()) j["best_objective"] = r.trace.back();
}

void from_json(const nlohmann::json& j, FitReport& r) {
  r.kind = parse_model_kind(j.at("model").get<std::string>());
  r.params = j.at("params").get<ModelParams>();
  r.chi = j.at("chi").get<double>();
  r.weight = j.value("bin_weight", std::string("count")) == "uniform" ? BinWeight::uniform : BinWeight::count;
  r.bin_model = j.value("bin_model", std::string("average")) == "center" ? BinModel::center : BinModel::average;
  r.converged = j.at("converged").get<bool>();
  r.bins_used = j.at("bins_used").get<std::size_t>();
  r.evaluations = j.at("evaluations").get<std::size_t>();
  r.alpha_prime.reset();
  if (j.contains("alpha_prime")) r.alpha_prime = j.at("alpha_prime").get<double>();
  // Only the final objective is serialized; the trace keeps its length.
  r.trace.clear();
  if (j.contains("best_objective"))
    r.trace.assign(j.value("search_steps", std::size_t{1}), j.at("best_objective").get<double>());
}

} // namespace tradestats
