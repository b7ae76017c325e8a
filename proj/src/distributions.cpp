#include "tradestats/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "tradestats/error.hpp"

namespace tradestats {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ln B(a, b) without the cancellation of lgamma(b) - lgamma(a+b) at large b.
double log_beta(double a, double b) {
  if (a > b) std::swap(a, b);
  if (b > 1e3) {
    const double ratio = boost::math::tgamma_delta_ratio(b, a); // Gamma(b)/Gamma(a+b)
    if (ratio > 0.0 && std::isfinite(ratio)) return std::lgamma(a) + std::log(ratio);
  }
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

void check_qgamma(const QGammaParams& p) {
  if (!(p.theta > 0.0) || !std::isfinite(p.theta)) throw DomainError("q-Gamma: theta must be > 0");
  if (!(p.beta >= 0.0) || !std::isfinite(p.beta)) throw DomainError("q-Gamma: beta must be >= 0");
  if (!(p.q > 1.0) || !std::isfinite(p.q)) throw DomainError("q-Gamma: q must be > 1");
  if (!(alpha_prime_qgamma(p.q, p.beta) > 0.0))
    throw DomainError("q-Gamma: tail exponent 1/(q-1) - beta - 1 <= 0, density is not normalizable");
}

void check_qexp(const QExpParams& p) {
  if (!(p.theta > 0.0) || !std::isfinite(p.theta)) throw DomainError("q-exponential: theta must be > 0");
  if (!(p.q > 1.0) || !std::isfinite(p.q)) throw DomainError("q-exponential: q must be > 1");
}

void check_student(const StudentParams& p) {
  if (!(p.n > 0.0) || !std::isfinite(p.n)) throw DomainError("Student: n must be > 0");
  if (!(p.h > 0.0) || !std::isfinite(p.h)) throw DomainError("Student: H must be > 0");
  if (!std::isfinite(p.x)) throw DomainError("Student: location must be finite");
}

void check_lognormal(const LogNormalParams& p) {
  if (!std::isfinite(p.mu)) throw DomainError("log-normal: mu must be finite");
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) throw DomainError("log-normal: sigma must be > 0");
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

std::string_view model_name(ModelKind kind) {
  switch (kind) {
  case ModelKind::qgamma: return "qgamma";
  case ModelKind::qexp: return "qexp";
  case ModelKind::student: return "student";
  case ModelKind::lognormal: return "lognormal";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "qgamma") return ModelKind::qgamma;
  if (name == "qexp") return ModelKind::qexp;
  if (name == "student") return ModelKind::student;
  if (name == "lognormal") return ModelKind::lognormal;
  throw ConfigError("unknown model '" + std::string(name) + "'");
}

ModelKind kind_of(const ModelParams& params) { return static_cast<ModelKind>(params.index()); }

double alpha_prime_qgamma(double q, double beta) {
  if (!(q > 1.0)) throw DomainError("alpha': q must be > 1");
  return 1.0 / (q - 1.0) - beta - 1.0;
}

double alpha_prime_qexp(double q) {
  if (!(q > 1.0)) throw DomainError("alpha': q must be > 1");
  return q / (q - 1.0) - 1.0;
}

double qgamma_log_norm_z(const QGammaParams& p) {
  check_qgamma(p);
  const double a = p.beta + 1.0;
  const double b = alpha_prime_qgamma(p.q, p.beta);
  return std::log(p.theta) - a * std::log(p.q - 1.0) + log_beta(a, b);
}

double qgamma_norm_z(const QGammaParams& p) { return std::exp(qgamma_log_norm_z(p)); }

double qgamma_log_pdf(double v, const QGammaParams& p) {
  if (!(v >= 0.0)) throw DomainError("q-Gamma density defined for v >= 0");
  const double log_z = qgamma_log_norm_z(p);
  const double x = v / p.theta;
  const double power = p.beta == 0.0 ? 0.0 : (x == 0.0 ? -kInf : p.beta * std::log(x));
  return power - std::log1p((p.q - 1.0) * x) / (p.q - 1.0) - log_z;
}

double qgamma_pdf(double v, const QGammaParams& p) { return std::exp(qgamma_log_pdf(v, p)); }

double qgamma_cdf(double v, const QGammaParams& p) {
  check_qgamma(p);
  if (v <= 0.0) return 0.0;
  if (std::isinf(v)) return 1.0;
  // u = (q-1) v / theta is beta-prime(beta+1, alpha'); u/(1+u) is beta.
  const double u = (p.q - 1.0) * v / p.theta;
  const double t = u / (1.0 + u);
  const double a = p.beta + 1.0;
  const double b = alpha_prime_qgamma(p.q, p.beta);
  if (t > 0.5) return 1.0 - boost::math::ibeta(b, a, 1.0 / (1.0 + u));
  return boost::math::ibeta(a, b, t);
}

double qgamma_sf(double v, const QGammaParams& p) {
  check_qgamma(p);
  if (v <= 0.0) return 1.0;
  if (std::isinf(v)) return 0.0;
  const double u = (p.q - 1.0) * v / p.theta;
  const double t = u / (1.0 + u);
  const double a = p.beta + 1.0;
  const double b = alpha_prime_qgamma(p.q, p.beta);
  // 1 - t = 1/(1+u) keeps precision when u is large.
  if (t > 0.5) return boost::math::ibeta(b, a, 1.0 / (1.0 + u));
  return boost::math::ibetac(a, b, t);
}

double qexp_log_pdf(double v, const QExpParams& p) {
  check_qexp(p);
  if (!(v >= 0.0)) throw DomainError("q-exponential density defined for v >= 0");
  return -std::log(p.theta) - p.q / (p.q - 1.0) * std::log1p((p.q - 1.0) * v / p.theta);
}

double qexp_pdf(double v, const QExpParams& p) { return std::exp(qexp_log_pdf(v, p)); }

double qexp_cdf(double v, const QExpParams& p) {
  check_qexp(p);
  if (v <= 0.0) return 0.0;
  return -std::expm1(-std::log1p((p.q - 1.0) * v / p.theta) / (p.q - 1.0));
}

double qexp_sf(double v, const QExpParams& p) {
  check_qexp(p);
  if (v <= 0.0) return 1.0;
  return std::exp(-std::log1p((p.q - 1.0) * v / p.theta) / (p.q - 1.0));
}

double student_log_pdf(double v, const StudentParams& p) {
  check_student(p);
  const double d = v - p.x;
  return -0.5 * std::log(p.n) - log_beta(0.5, 0.5 * p.n) -
         0.5 * (p.n + 1.0) * std::log1p(p.h * d * d / p.n) + 0.5 * std::log(p.h);
}

double student_pdf(double v, const StudentParams& p) { return std::exp(student_log_pdf(v, p)); }

double student_cdf(double v, const StudentParams& p) {
  check_student(p);
  const boost::math::students_t_distribution<double> t(p.n);
  return boost::math::cdf(t, std::sqrt(p.h) * (v - p.x));
}

double student_sf(double v, const StudentParams& p) {
  check_student(p);
  const boost::math::students_t_distribution<double> t(p.n);
  return boost::math::cdf(boost::math::complement(t, std::sqrt(p.h) * (v - p.x)));
}

double lognormal_log_pdf(double v, const LogNormalParams& p) {
  check_lognormal(p);
  if (!(v > 0.0)) throw DomainError("log-normal density defined for v > 0");
  const double z = (std::log(v) - p.mu) / p.sigma;
  return -0.5 * z * z - std::log(v * p.sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double lognormal_pdf(double v, const LogNormalParams& p) { return std::exp(lognormal_log_pdf(v, p)); }

double lognormal_cdf(double v, const LogNormalParams& p) {
  check_lognormal(p);
  if (v <= 0.0) return 0.0;
  return 0.5 * std::erfc(-(std::log(v) - p.mu) / (p.sigma * std::numbers::sqrt2));
}

double lognormal_sf(double v, const LogNormalParams& p) {
  check_lognormal(p);
  if (v <= 0.0) return 1.0;
  return 0.5 * std::erfc((std::log(v) - p.mu) / (p.sigma * std::numbers::sqrt2));
}

void validate(const ModelParams& params) {
  std::visit(overloaded{[](const QGammaParams& p) { check_qgamma(p); },
                        [](const QExpParams& p) { check_qexp(p); },
                        [](const StudentParams& p) { check_student(p); },
                        [](const LogNormalParams& p) { check_lognormal(p); }},
             params);
}

bool is_valid(const ModelParams& params) noexcept {
  try {
    validate(params);
    return true;
  } catch (const Error&) {
    return false;
  }
}

double log_pdf(const ModelParams& params, double v) {
  return std::visit(overloaded{[v](const QGammaParams& p) { return qgamma_log_pdf(v, p); },
                               [v](const QExpParams& p) { return qexp_log_pdf(v, p); },
                               [v](const StudentParams& p) { return student_log_pdf(v, p); },
                               [v](const LogNormalParams& p) { return lognormal_log_pdf(v, p); }},
                    params);
}

double pdf(const ModelParams& params, double v) { return std::exp(log_pdf(params, v)); }

double cdf(const ModelParams& params, double v) {
  return std::visit(overloaded{[v](const QGammaParams& p) { return qgamma_cdf(v, p); },
                               [v](const QExpParams& p) { return qexp_cdf(v, p); },
                               [v](const StudentParams& p) { return student_cdf(v, p); },
                               [v](const LogNormalParams& p) { return lognormal_cdf(v, p); }},
                    params);
}

double survival(const ModelParams& params, double v) {
  return std::visit(overloaded{[v](const QGammaParams& p) { return qgamma_sf(v, p); },
                               [v](const QExpParams& p) { return qexp_sf(v, p); },
                               [v](const StudentParams& p) { return student_sf(v, p); },
                               [v](const LogNormalParams& p) { return lognormal_sf(v, p); }},
                    params);
}

double interval_mass(const ModelParams& params, double lower, double upper) {
  const double f_lo = cdf(params, lower);
  if (f_lo < 0.5) return cdf(params, upper) - f_lo;
  return survival(params, lower) - survival(params, upper);
}

std::optional<double> tail_exponent(const ModelParams& params) {
  if (const auto* g = std::get_if<QGammaParams>(&params)) return alpha_prime_qgamma(g->q, g->beta);
  if (const auto* e = std::get_if<QExpParams>(&params)) return alpha_prime_qexp(e->q);
  return std::nullopt;
}

double draw(const ModelParams& params, Rng& rng) {
  return std::visit(
      overloaded{
          [&rng](const QGammaParams& p) {
            // theta/(q-1) * G1/G2 with G1 ~ Gamma(beta+1), G2 ~ Gamma(alpha').
            std::gamma_distribution<double> num(p.beta + 1.0, 1.0);
            std::gamma_distribution<double> den(alpha_prime_qgamma(p.q, p.beta), 1.0);
            const double g1 = num(rng);
            const double g2 = den(rng);
            return p.theta / (p.q - 1.0) * (g1 / g2);
          },
          [&rng](const QExpParams& p) {
            const double u = 1.0 - std::generate_canonical<double, 53>(rng); // (0, 1]
            return p.theta / (p.q - 1.0) * std::expm1(-(p.q - 1.0) * std::log(u));
          },
          [&rng](const StudentParams& p) {
            std::student_t_distribution<double> t(p.n);
            return p.x + t(rng) / std::sqrt(p.h);
          },
          [&rng](const LogNormalParams& p) {
            std::lognormal_distribution<double> ln(p.mu, p.sigma);
            return ln(rng);
          }},
      params);
}

std::vector<double> sample(const ModelParams& params, std::size_t count, std::uint64_t seed) {
  validate(params);
  if (count == 0) throw DomainError("sample: count must be >= 1");
  Rng rng(seed);
  std::vector<double> out(count);
  for (auto& v : out) v = draw(params, rng);
  return out;
}

void to_json(nlohmann::json& j, const ModelParams& p) {
  std::visit(overloaded{[&j](const QGammaParams& m) {
                          j = {{"kind", "qgamma"}, {"theta", m.theta}, {"beta", m.beta}, {"q", m.q}};
                        },
                        [&j](const QExpParams& m) { j = {{"kind", "qexp"}, {"theta", m.theta}, {"q", m.q}}; },
                        [&j](const StudentParams& m) {
                          j = {{"kind", "student"}, {"n", m.n}, {"h", m.h}, {"x", m.x}};
                        },
                        [&j](const LogNormalParams& m) {
                          j = {{"kind", "lognormal"}, {"mu", m.mu}, {"sigma", m.sigma}};
                        }},
             p);
}

void from_json(const nlohmann::json& j, ModelParams& p) {
  try {
    switch (parse_model_kind(j.at("kind").get<std::string>())) {
    case ModelKind::qgamma:
      p = QGammaParams{j.at("theta").get<double>(), j.at("beta").get<double>(), j.at("q").get<double>()};
      break;
    case ModelKind::qexp: p = QExpParams{j.at("theta").get<double>(), j.at("q").get<double>()}; break;
    case ModelKind::student:
      p = StudentParams{j.at("n").get<double>(), j.at("h").get<double>(), j.at("x").get<double>()};
      break;
    case ModelKind::lognormal:
      p = LogNormalParams{j.at("mu").get<double>(), j.at("sigma").get<double>()};
      break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model parameters: ") + e.what());
  }
}

} // namespace tradestats
