#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace tradestats::detail {

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Nelder-Mead with standard coefficients (1, 2, 0.5, 0.5). Non-finite
// objective values are treated as +inf. on_improve(best) is called whenever
// the best vertex improves.
template <class F, class OnImprove>
SimplexResult nelder_mead(F&& f, std::vector<double> start, const std::vector<double>& step,
                          int max_iterations, double tolerance, OnImprove&& on_improve) {
  const std::size_t d = start.size();
  auto eval = [&f](const std::vector<double>& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : HUGE_VAL;
  };
  std::vector<std::vector<double>> pts(d + 1, start);
  for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += step[i];
  std::vector<double> vals(d + 1);
  for (std::size_t i = 0; i <= d; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(d + 1);
  SimplexResult res;
  double best_seen = HUGE_VAL;
  std::vector<double> centroid(d), xr(d), xe(d), xc(d);
  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t ib = order.front();
    const std::size_t iw = order.back();
    const std::size_t is = order[d - 1];
    if (vals[ib] < best_seen) {
      best_seen = vals[ib];
      on_improve(best_seen);
    }

    double spread = 0.0;
    for (std::size_t i = 0; i <= d; ++i)
      for (std::size_t k = 0; k < d; ++k) spread = std::max(spread, std::abs(pts[i][k] - pts[ib][k]));
    const double fspread = vals[iw] - vals[ib];
    if (std::isfinite(fspread) && fspread <= tolerance * (std::abs(vals[ib]) + tolerance) &&
        spread <= std::sqrt(tolerance)) {
      res.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= d; ++i)
      if (i != iw)
        for (std::size_t k = 0; k < d; ++k) centroid[k] += pts[i][k] / static_cast<double>(d);

    for (std::size_t k = 0; k < d; ++k) xr[k] = centroid[k] + (centroid[k] - pts[iw][k]);
    const double fr = eval(xr);
    if (fr < vals[ib]) {
      for (std::size_t k = 0; k < d; ++k) xe[k] = centroid[k] + 2.0 * (centroid[k] - pts[iw][k]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[iw] = xe;
        vals[iw] = fe;
      } else {
        pts[iw] = xr;
        vals[iw] = fr;
      }
      continue;
    }
    if (fr < vals[is]) {
      pts[iw] = xr;
      vals[iw] = fr;
      continue;
    }
    const bool outside = fr < vals[iw];
    for (std::size_t k = 0; k < d; ++k)
      xc[k] = outside ? centroid[k] + 0.5 * (xr[k] - centroid[k]) : centroid[k] + 0.5 * (pts[iw][k] - centroid[k]);
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[iw])) {
      pts[iw] = xc;
      vals[iw] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == ib) continue;
      for (std::size_t k = 0; k < d; ++k) pts[i][k] = pts[ib][k] + 0.5 * (pts[i][k] - pts[ib][k]);
      vals[i] = eval(pts[i]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  res.x = pts[best];
  res.value = vals[best];
  if (res.value < best_seen) on_improve(res.value);
  return res;
}

} // namespace tradestats::detail
