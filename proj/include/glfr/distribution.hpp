#pragma once

// The generalized linear failure rate law GLFR(a, b, alpha):
//   F(x) = (1 - exp(-(a x + b x^2 / 2)))^alpha,  x >= 0.
// b = 0 gives the generalized exponential, a = 0 the generalized Rayleigh.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "glfr/error.hpp"
#include "glfr/numerics.hpp"
#include "glfr/random.hpp"

namespace glfr {

struct GlfrParams {
  double a = 1.0;      ///< scale, per unit x
  double b = 0.0;      ///< scale, per unit x^2
  double alpha = 1.0;  ///< shape

  /// Exponent a x + b x^2 / 2 of the base exponential.
  double exponent(double x) const { return x * (a + 0.5 * b * x); }
};

inline bool is_valid(const GlfrParams& p) {
  return std::isfinite(p.a) && std::isfinite(p.b) && std::isfinite(p.alpha) && p.alpha > 0.0 && p.a >= 0.0 &&
         p.b >= 0.0 && (p.a > 0.0 || p.b > 0.0);
}

inline void validate(const GlfrParams& p) {
  if (!is_valid(p)) {
    throw Error(ErrorCode::invalid_params, "GLFR parameters need alpha > 0, a >= 0, b >= 0 and a + b > 0");
  }
}

inline double log_pdf(const GlfrParams& p, double x) {
  validate(p);
  if (x < 0.0) return -num::kInf;
  const double t = p.exponent(x);
  const double rate = p.a + p.b * x;
  if (rate <= 0.0) return -num::kInf;
  const double shape_term = p.alpha == 1.0 ? 0.0 : (p.alpha - 1.0) * num::log1mexp(t);
  return std::log(p.alpha) + std::log(rate) - t + shape_term;
}

inline double pdf(const GlfrParams& p, double x) { return x < 0.0 ? (validate(p), 0.0) : std::exp(log_pdf(p, x)); }

inline double cdf(const GlfrParams& p, double x) {
  validate(p);
  if (x <= 0.0) return 0.0;
  const double v = std::exp(p.alpha * num::log1mexp(p.exponent(x)));
  return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

/// log(1 - F(x)), accurate in the upper tail.
inline double log_survival(const GlfrParams& p, double x) {
  validate(p);
  if (x <= 0.0) return 0.0;
  const double log_f = p.alpha * num::log1mexp(p.exponent(x));
  return log_f < -std::numbers::ln2 ? std::log1p(-std::exp(log_f)) : std::log(-std::expm1(log_f));
}

inline double quantile(const GlfrParams& p, double u) {
  validate(p);
  if (!(u > 0.0 && u < 1.0)) throw Error(ErrorCode::invalid_probability, "quantile needs u in (0,1)");
  // c = -ln(1 - u^(1/alpha)), then solve a x + b x^2 / 2 = c.
  const double c = -num::log1mexp(-std::log(u) / p.alpha);
  if (p.b == 0.0) return c / p.a;
  return 2.0 * c / (p.a + std::sqrt(p.a * p.a + 2.0 * p.b * c));
}

inline double hazard(const GlfrParams& p, double x) {
  validate(p);
  if (x < 0.0) return 0.0;
  const double log_s = log_survival(p, x);
  if (!std::isfinite(log_s)) throw Error(ErrorCode::saturated_cdf, "1 - F(x) underflows; hazard undefined");
  return std::exp(log_pdf(p, x) - log_s);
}

/// n i.i.d. draws by inverse transform.
template <class URBG>
std::vector<double> sample(const GlfrParams& p, std::size_t n, URBG& rng) {
  validate(p);
  if (n == 0) throw Error(ErrorCode::domain, "sample size must be at least 1");
  std::vector<double> out(n);
  for (auto& v : out) v = quantile(p, uniform_open(rng));
  return out;
}

/// Sum of ln(1 - exp(-(a x + b x^2/2))) over a sample: the sufficient
/// statistic for the shape parameter at fixed scale.
inline double log_transform_sum(std::span<const double> xs, double a, double b) {
  num::CompensatedSum s;
  for (double x : xs) s.add(num::log1mexp(x * (a + 0.5 * b * x)));
  return s.value();
}

}  // namespace glfr
