#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace tradestats {

// f(v) = (1/Z) (v/theta)^beta [1 + (q-1) v/theta]^(-1/(q-1)), v >= 0.
struct QGammaParams {
  double theta = 1.0; // scale, > 0
  double beta = 0.0;  // shape, >= 0
  double q = 1.2;     // entropic index, > 1
};

// f(v) = (1/theta) [1 + (q-1) v/theta]^(-q/(q-1)), v >= 0.
struct QExpParams {
  double theta = 1.0;
  double q = 1.2;
};

// Student density with n degrees of freedom, inverse squared scale H and
// location x.
struct StudentParams {
  double n = 1.0;
  double h = 1.0;
  double x = 0.0;
};

struct LogNormalParams {
  double mu = 0.0;
  double sigma = 1.0;
};

enum class ModelKind { qgamma, qexp, student, lognormal };

using ModelParams = std::variant<QGammaParams, QExpParams, StudentParams, LogNormalParams>;

std::string_view model_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);
ModelKind kind_of(const ModelParams& params);

// Tail exponents of the power-law tails, f ~ v^(-alpha'-1).
double alpha_prime_qgamma(double q, double beta);
double alpha_prime_qexp(double q);

// Closed form theta (q-1)^-(beta+1) B(beta+1, alpha'). Throws DomainError
// when alpha' <= 0 (divergent integral).
double qgamma_norm_z(const QGammaParams& p);
double qgamma_log_norm_z(const QGammaParams& p);

double qgamma_log_pdf(double v, const QGammaParams& p);
double qgamma_pdf(double v, const QGammaParams& p);
double qgamma_cdf(double v, const QGammaParams& p);
double qgamma_sf(double v, const QGammaParams& p);

double qexp_log_pdf(double v, const QExpParams& p);
double qexp_pdf(double v, const QExpParams& p);
double qexp_cdf(double v, const QExpParams& p);
double qexp_sf(double v, const QExpParams& p);

double student_log_pdf(double v, const StudentParams& p);
double student_pdf(double v, const StudentParams& p);
double student_cdf(double v, const StudentParams& p);
double student_sf(double v, const StudentParams& p);

double lognormal_log_pdf(double v, const LogNormalParams& p);
double lognormal_pdf(double v, const LogNormalParams& p);
double lognormal_cdf(double v, const LogNormalParams& p);
double lognormal_sf(double v, const LogNormalParams& p);

// Throws DomainError if the parameters do not define a normalizable density.
void validate(const ModelParams& params);
bool is_valid(const ModelParams& params) noexcept;

double log_pdf(const ModelParams& params, double v);
double pdf(const ModelParams& params, double v);
double cdf(const ModelParams& params, double v);
// 1 - cdf, computed without cancellation in the upper tail.
double survival(const ModelParams& params, double v);
// Probability of [lower, upper], from whichever tail is more accurate.
double interval_mass(const ModelParams& params, double lower, double upper);
// alpha' for the power-law families, nullopt otherwise.
std::optional<double> tail_exponent(const ModelParams& params);

// 64-bit engine used everywhere randomness is needed.
using Rng = std::mt19937_64;

// i.i.d. draws; identical output for identical (params, count, seed).
std::vector<double> sample(const ModelParams& params, std::size_t count, std::uint64_t seed);
double draw(const ModelParams& params, Rng& rng);

void to_json(nlohmann::json& j, const ModelParams& p);
void from_json(const nlohmann::json& j, ModelParams& p);

} // namespace tradestats
