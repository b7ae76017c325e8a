#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "tradestats/density.hpp"
#include "tradestats/error.hpp"
#include "tradestats/fit.hpp"
#include "tradestats/gof.hpp"
#include "tradestats/synthgen.hpp"

using namespace tradestats;

namespace {

double mass(const EmpiricalDensity& d) {
  double s = 0.0;
  for (const auto& b : d.bins) s += b.density * b.width();
  return s;
}

// Bins whose density is exactly the model's mean density over each bin.
EmpiricalDensity exact_density(const ModelParams& m, double lo, double hi, int bpd) {
  EmpiricalDensity d;
  d.bins_per_decade = bpd;
  d.sample_count = 1'000'000;
  const double ratio = std::pow(10.0, 1.0 / bpd);
  for (double a = lo; a < hi; a *= ratio) {
    DensityBin b;
    b.lower = a;
    b.upper = a * ratio;
    b.center = std::sqrt(b.lower * b.upper);
    b.density = interval_mass(m, b.lower, b.upper) / b.width();
    b.count = 1000;
    d.bins.push_back(b);
  }
  return d;
}

std::vector<double> uniforms(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  std::sort(x.begin(), x.end());
  return x;
}

const CdfFunction kIdentity = [](double v) { return std::clamp(v, 0.0, 1.0); };

} // namespace

TEST(Density, MassIsOneForAnyInput) {
  std::mt19937_64 rng(1);
  std::lognormal_distribution<double> ln(0.0, 2.5);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> x(1 + rng() % 20000);
    for (auto& v : x) v = ln(rng);
    for (const int bpd : {1, 7, 20}) {
      const auto d = log_binned_density(x, bpd);
      EXPECT_NEAR(mass(d), 1.0, 1e-9);
      for (std::size_t i = 0; i < d.bins.size(); ++i) {
        EXPECT_LT(d.bins[i].lower, d.bins[i].upper);
        if (i) {
          EXPECT_LE(d.bins[i - 1].upper, d.bins[i].lower * (1 + 1e-12));
        }
        EXPECT_GT(d.bins[i].count, 0u);
      }
    }
  }
}

TEST(Density, SingleValueIsOneBin) {
  const std::vector<double> x{3.5};
  const auto d = log_binned_density(x, 20);
  ASSERT_EQ(d.bins.size(), 1u);
  EXPECT_NEAR(d.bins[0].density, 1.0 / d.bins[0].width(), 1e-12);
}

TEST(Density, RejectsBadInput) {
  EXPECT_THROW(log_binned_density(std::vector<double>{1.0, 0.0}, 10), DomainError);
  EXPECT_THROW(log_binned_density(std::vector<double>{}, 10), DataError);
  EXPECT_THROW(log_binned_density(std::vector<double>{1.0}, 0), ConfigError);
}

TEST(Density, ParetoSlopeOverTopTwoDecades) {
  const auto x = gen_pareto(2.5, 1.0, 0.0, 100'000, 17);
  const auto d = log_binned_density(x, 20);
  const double top = *std::max_element(x.begin(), x.end());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& b : d.bins) {
    if (b.center < top / 100.0) continue;
    const double lx = std::log10(b.center), ly = std::log10(b.density);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, ++m;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  EXPECT_NEAR(slope, -3.5, 0.1);
}

TEST(Fit, ExactBinsRecoverParameters) {
  const QGammaParams truth{0.07, 1.52, 1.22};
  const auto d = exact_density(truth, 1e-3, 1e3, 10);
  const auto r = fit_model(d, ModelKind::qgamma);
  const auto& p = std::get<QGammaParams>(r.params);
  EXPECT_LT(r.chi, 1e-6);
  EXPECT_NEAR(p.theta / truth.theta, 1.0, 1e-3);
  EXPECT_NEAR(p.beta / truth.beta, 1.0, 1e-3);
  EXPECT_NEAR(p.q / truth.q, 1.0, 1e-3);
}

TEST(Fit, ExactBinsRecoverQExponential) {
  const QExpParams truth{0.3, 1.35};
  const auto r = fit_model(exact_density(truth, 1e-3, 1e3, 10), ModelKind::qexp);
  const auto& p = std::get<QExpParams>(r.params);
  EXPECT_LT(r.chi, 1e-6);
  EXPECT_NEAR(p.theta / truth.theta, 1.0, 1e-3);
  EXPECT_NEAR(p.q / truth.q, 1.0, 1e-3);
}

TEST(Fit, TraceNeverIncreasesAndRerunsMatch) {
  const auto x = sample(QGammaParams{0.41, 0.15, 1.29}, 50'000, 3);
  const auto d = log_binned_density(x, 20);
  for (const auto kind : {ModelKind::qgamma, ModelKind::qexp, ModelKind::student, ModelKind::lognormal}) {
    SearchConfig cfg;
    cfg.seed = 11;
    const auto a = fit_model(d, kind, cfg);
    const auto b = fit_model(d, kind, cfg);
    ASSERT_FALSE(a.trace.empty());
    for (std::size_t i = 1; i < a.trace.size(); ++i) EXPECT_LE(a.trace[i], a.trace[i - 1]);
    EXPECT_EQ(nlohmann::json(a).dump(), nlohmann::json(b).dump());
    EXPECT_GE(a.chi, 0.0);
    EXPECT_GE(a.bins_used, 10u);
  }
}

TEST(Fit, AlphaPrimeIsExactlyDerived) {
  const auto x = sample(QGammaParams{0.07, 1.52, 1.22}, 50'000, 9);
  const auto r = fit_model(log_binned_density(x, 20), ModelKind::qgamma);
  const auto& p = std::get<QGammaParams>(r.params);
  ASSERT_TRUE(r.alpha_prime.has_value());
  EXPECT_EQ(*r.alpha_prime, alpha_prime_qgamma(p.q, p.beta));
  const auto back = nlohmann::json(r).get<FitReport>();
  EXPECT_EQ(*back.alpha_prime, *r.alpha_prime);
}

TEST(Fit, ChiIsRootMeanSquareOfLogResiduals) {
  const auto x = sample(QGammaParams{0.41, 0.15, 1.29}, 50'000, 4);
  const auto d = log_binned_density(x, 20);
  const auto r = fit_model(d, ModelKind::qgamma);
  const auto bins = fitted_bins(d, SearchConfig{}.min_bin_count);
  double ss = 0.0;
  for (const auto& b : bins) {
    const double e = std::log10(b.density) - std::log10(model_bin_density(r.params, b, r.bin_model));
    ss += e * e;
  }
  EXPECT_NEAR(r.chi, std::sqrt(ss / bins.size()), 1e-12);
  EXPECT_EQ(r.bins_used, bins.size());
}

TEST(Fit, TooFewBinsIsDataError) {
  const std::vector<double> x{1.0, 1.5, 2.0};
  EXPECT_THROW(fit_model(log_binned_density(x, 20), ModelKind::qgamma), DataError);
}

TEST(CramerVonMises, SmallSampleValues) {
  EXPECT_NEAR(cvm_statistic(std::vector<double>{0.5}, kIdentity), 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(cvm_statistic(std::vector<double>{0.25, 0.75}, kIdentity), 1.0 / 24.0, 1e-15);
  EXPECT_THROW(cvm_statistic(std::vector<double>{}, kIdentity), DataError);
  EXPECT_THROW(cvm_statistic(std::vector<double>{0.7, 0.2}, kIdentity), DomainError);
}

TEST(CramerVonMises, MinimumAtPlottingPositions) {
  for (const std::size_t n : {1u, 5u, 40u}) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (2.0 * i + 1.0) / (2.0 * n);
    const double best = cvm_statistic(x, kIdentity);
    EXPECT_NEAR(best, 1.0 / (12.0 * n), 1e-15);
    std::mt19937_64 rng(n);
    std::normal_distribution<double> jitter(0.0, 0.01);
    for (int rep = 0; rep < 50; ++rep) {
      auto y = x;
      for (auto& v : y) v = std::clamp(v + jitter(rng), 0.0, 1.0);
      std::sort(y.begin(), y.end());
      EXPECT_GE(cvm_statistic(y, kIdentity), best);
    }
  }
}

TEST(CramerVonMises, NullMeanAndRejectionRate) {
  std::mt19937_64 rng(2024);
  const int reps = 10'000;
  double sum = 0.0;
  int rejected = 0;
  for (int r = 0; r < reps; ++r) {
    const auto x = uniforms(rng, 100);
    const double w = cvm_statistic(x, kIdentity);
    sum += w;
    if (!cvm_test(x, kIdentity, 0.01).accept) ++rejected;
  }
  EXPECT_NEAR(sum / reps, 1.0 / 6.0, 0.01);
  EXPECT_NEAR(static_cast<double>(rejected) / reps, 0.01, 0.003);
}

TEST(CramerVonMises, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(8);
  const auto x = uniforms(rng, 500);
  std::vector<double> y(x.size());
  std::transform(x.begin(), x.end(), y.begin(), [](double v) { return std::exp(3.0 * v) - 2.0; });
  const CdfFunction g = [](double t) { return std::clamp(std::log(t + 2.0) / 3.0, 0.0, 1.0); };
  EXPECT_NEAR(cvm_statistic(x, kIdentity), cvm_statistic(y, g), 1e-12);
}

TEST(CramerVonMises, TestDecision) {
  EXPECT_DOUBLE_EQ(cvm_critical_value(0.10), 0.347);
  EXPECT_DOUBLE_EQ(cvm_critical_value(0.05), 0.461);
  EXPECT_DOUBLE_EQ(cvm_critical_value(0.01), 0.743);
  EXPECT_THROW(cvm_critical_value(0.02), ConfigError);

  // About 0.01: a near-perfect sample.
  std::vector<double> good(30);
  for (std::size_t i = 0; i < good.size(); ++i) good[i] = (i + 0.5) / good.size();
  const auto a = cvm_test(good, kIdentity, 0.01);
  EXPECT_LT(a.statistic, 0.011);
  EXPECT_TRUE(a.accept);
  // Every value at 0.9: statistic well above 1.
  const std::vector<double> bad(30, 0.9);
  const auto b = cvm_test(bad, kIdentity, 0.01);
  EXPECT_GT(b.statistic, 1.0);
  EXPECT_FALSE(b.accept);
  EXPECT_EQ(b.n, 30u);
  EXPECT_DOUBLE_EQ(b.critical_value, 0.743);
  EXPECT_THROW(cvm_test(good, kIdentity, 0.2), ConfigError);
}

TEST(CramerVonMises, ModelOverloadUsesModelCdf) {
  const ModelParams m = QGammaParams{0.41, 0.15, 1.29};
  const auto x = sample(m, 5000, 12);
  const auto r = cvm_test(x, m, 0.01);
  EXPECT_TRUE(r.accept);
  EXPECT_GE(r.statistic, 1.0 / (12.0 * 5000));
  const auto off = cvm_test(x, QGammaParams{0.82, 0.15, 1.29}, 0.01);
  EXPECT_FALSE(off.accept);
}
