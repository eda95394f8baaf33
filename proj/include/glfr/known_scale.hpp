#pragma once

// Inference on R = P(Y < X) when X ~ GLFR(a, b, alpha), Y ~ GLFR(a, b, beta)
// share a known scale (a, b). Everything here is closed form: with the scale
// fixed, -ln(1 - exp(-(a X + b X^2/2))) is exponential with mean 1/alpha.

#include <cmath>
#include <span>
#include <utility>

#include "glfr/distribution.hpp"
#include "glfr/error.hpp"
#include "glfr/numerics.hpp"
#include "glfr/posterior.hpp"

namespace glfr::known {

struct Scale {
  double a = 1.0;
  double b = 2.0;
};

inline constexpr Scale kDefaultScale{1.0, 2.0};

struct KnownScaleFit {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double r_hat = 0.0;
  double t1 = 0.0;  ///< sum of ln(1 - e^{-(a x + b x^2/2)}) over x
  double t2 = 0.0;  ///< same over y
  std::size_t n = 0;
  std::size_t m = 0;
};

inline void validate_scale(const Scale& s) { validate(GlfrParams{s.a, s.b, 1.0}); }

/// T = sum ln(1 - e^{-(a x + b x^2/2)}); requires every observation > 0.
inline double shape_statistic(std::span<const double> xs, const Scale& s) {
  validate_scale(s);
  for (double x : xs) {
    if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorCode::degenerate_sample, "observations must be positive");
  }
  const double t = log_transform_sum(xs, s.a, s.b);
  if (!std::isfinite(t)) throw Error(ErrorCode::degenerate_sample, "log-transform sum is not finite");
  if (!(t < 0.0)) throw Error(ErrorCode::degenerate_sample, "log-transform sum vanished");
  return t;
}

inline KnownScaleFit mle_known(std::span<const double> x, std::span<const double> y, const Scale& s = kDefaultScale) {
  if (x.empty() || y.empty()) throw Error(ErrorCode::degenerate_sample, "both samples need at least one value");
  KnownScaleFit fit;
  fit.n = x.size();
  fit.m = y.size();
  fit.t1 = shape_statistic(x, s);
  fit.t2 = shape_statistic(y, s);
  fit.alpha_hat = -static_cast<double>(fit.n) / fit.t1;
  fit.beta_hat = -static_cast<double>(fit.m) / fit.t2;
  fit.r_hat = fit.alpha_hat / (fit.alpha_hat + fit.beta_hat);
  return fit;
}

/// Exact interval from (R/(1-R)) ((1-R^)/R^) ~ F(2n, 2m):
///   [1/(1 + F_{1-g/2; 2m,2n} (1/R^ - 1)), 1/(1 + F_{g/2; 2m,2n} (1/R^ - 1))].
inline num::Interval exact_ci(double r_hat, std::size_t n, std::size_t m, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::invalid_probability, "gamma must lie in (0,1)");
  if (!(r_hat > 0.0 && r_hat < 1.0)) throw Error(ErrorCode::domain, "R estimate must lie in (0,1)");
  const double d1 = 2.0 * static_cast<double>(m), d2 = 2.0 * static_cast<double>(n);
  const double odds = 1.0 / r_hat - 1.0;
  const double f_hi = num::f_quantile(1.0 - 0.5 * gamma, d1, d2);
  const double f_lo = num::f_quantile(0.5 * gamma, d1, d2);
  return num::make_interval(1.0 / (1.0 + f_hi * odds), 1.0 / (1.0 + f_lo * odds), 1.0 - gamma);
}

inline num::Interval exact_ci(const KnownScaleFit& fit, double gamma) { return exact_ci(fit.r_hat, fit.n, fit.m, gamma); }

/// Sampling density of R^ for true shapes (alpha, beta).
inline double rhat_density(double x, std::size_t n, std::size_t m, double alpha, double beta) {
  if (!(x > 0.0 && x < 1.0)) throw Error(ErrorCode::domain, "density of R^ is defined on (0,1)");
  if (!(alpha > 0.0 && beta > 0.0) || n == 0 || m == 0) throw Error(ErrorCode::invalid_params, "bad shapes or sizes");
  const double nd = static_cast<double>(n), md = static_cast<double>(m);
  const double c = nd * alpha / (md * beta);
  const double odds = (1.0 - x) / x;
  const double log_f = -2.0 * std::log(x) - num::log_beta(nd, md) + nd * std::log(c) + (nd - 1.0) * std::log(odds) -
                       (nd + md) * std::log1p(c * odds);
  return std::exp(log_f);
}

/// Conjugate update: alpha | data ~ Gamma(g1 + n, l1 - T1), beta likewise.
inline ShapePosteriors posterior_params(std::span<const double> x, std::span<const double> y, const Scale& s,
                                        const GammaPrior& prior_alpha, const GammaPrior& prior_beta) {
  validate(prior_alpha);
  validate(prior_beta);
  const double t1 = x.empty() ? 0.0 : shape_statistic(x, s);
  const double t2 = y.empty() ? 0.0 : shape_statistic(y, s);
  return {{prior_alpha.shape + static_cast<double>(x.size()), prior_alpha.rate - t1},
          {prior_beta.shape + static_cast<double>(y.size()), prior_beta.rate - t2}};
}

inline double posterior_r_density(double r, const ShapePosteriors& post) { return posterior::r_density(r, post); }

inline double lindley_estimate(std::size_t n, std::size_t m, double t1, double t2, const GammaPrior& prior_alpha,
                               const GammaPrior& prior_beta) {
  return posterior::lindley(static_cast<double>(n), static_cast<double>(m), t1, t2, prior_alpha, prior_beta);
}

inline num::Interval credible_interval(const ShapePosteriors& post, double level) {
  return posterior::credible_interval(post, level);
}

}  // namespace glfr::known
