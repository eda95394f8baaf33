#pragma once

// Posterior of R = alpha / (alpha + beta) when alpha and beta carry independent
// Gamma posteriors. Shared by the known-scale, common-scale (pseudo-posterior)
// and general Bayes pipelines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "glfr/error.hpp"
#include "glfr/numerics.hpp"
#include "glfr/random.hpp"

namespace glfr {

struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;
};

inline void validate(const GammaPrior& g) {
  if (!(g.shape > 0.0 && g.rate > 0.0) || !std::isfinite(g.shape) || !std::isfinite(g.rate)) {
    throw Error(ErrorCode::invalid_params, "Gamma hyperparameters must be positive and finite");
  }
}

/// Vague prior used for shape parameters (gamma = lambda = 1e-4).
inline constexpr GammaPrior kNoninformative{1e-4, 1e-4};

/// Gamma laws of the two shape parameters, after conditioning on data.
struct ShapePosteriors {
  GammaPrior alpha;
  GammaPrior beta;
};

namespace posterior {

inline void validate(const ShapePosteriors& post) {
  glfr::validate(post.alpha);
  glfr::validate(post.beta);
}

inline double log_r_density(double r, const ShapePosteriors& post) {
  validate(post);
  if (!(r > 0.0 && r < 1.0)) throw Error(ErrorCode::domain, "posterior density of R needs 0 < r < 1");
  const double s1 = post.alpha.shape, s2 = post.beta.shape;
  const double r1 = post.alpha.rate, r2 = post.beta.rate;
  return s1 * std::log(r1) + s2 * std::log(r2) - num::log_beta(s1, s2) + (s1 - 1.0) * std::log(r) +
         (s2 - 1.0) * std::log1p(-r) - (s1 + s2) * std::log(r1 * r + r2 * (1.0 - r));
}

inline double r_density(double r, const ShapePosteriors& post) { return std::exp(log_r_density(r, post)); }

/// P(R <= r): R <= r iff W <= r1 r / (r1 r + r2 (1 - r)) with W ~ Beta(s1, s2).
inline double r_cdf(double r, const ShapePosteriors& post) {
  validate(post);
  if (r <= 0.0) return 0.0;
  if (r >= 1.0) return 1.0;
  const double r1 = post.alpha.rate, r2 = post.beta.rate;
  return num::beta_cdf(r1 * r / (r1 * r + r2 * (1.0 - r)), post.alpha.shape, post.beta.shape);
}

inline double r_quantile(double p, const ShapePosteriors& post) {
  validate(post);
  const double w = num::beta_quantile(p, post.alpha.shape, post.beta.shape);
  const double r1 = post.alpha.rate, r2 = post.beta.rate;
  return w * r2 / (r1 * (1.0 - w) + r2 * w);
}

/// Equal-tailed credible interval.
inline num::Interval credible_interval(const ShapePosteriors& post, double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::invalid_probability, "level must lie in (0,1)");
  const double tail = 0.5 * (1.0 - level);
  return num::make_interval(r_quantile(tail, post), r_quantile(1.0 - tail, post), level);
}

inline double r_mean(const ShapePosteriors& post) {
  validate(post);
  return num::quad([&](double r) { return r <= 0.0 || r >= 1.0 ? 0.0 : r * r_density(r, post); }, 0.0, 1.0,
                   {1e-12, 1e-12, 4000});
}

/// The mode-determining polynomial
///   H(r) = [A1 (1-r) - A2 r][p1 r + p2 (1-r)] - A3 (p1 - p2) r (1-r)
/// with A1 = s1 - 1, A2 = s2 - 1, A3 = s1 + s2 and p1, p2 the posterior rates.
inline double mode_equation(double r, const ShapePosteriors& post) {
  const double a1 = post.alpha.shape - 1.0, a2 = post.beta.shape - 1.0;
  const double a3 = post.alpha.shape + post.beta.shape;
  const double p1 = post.alpha.rate, p2 = post.beta.rate;
  return (a1 * (1.0 - r) - a2 * r) * (p1 * r + p2 * (1.0 - r)) - a3 * (p1 - p2) * r * (1.0 - r);
}

/// Posterior mode of R: the unique root of H on (0, 1). It is also the
/// approximate Bayes estimate under a 0-1 loss with a small window.
inline double r_mode(const ShapePosteriors& post) {
  validate(post);
  if (!(post.alpha.shape > 1.0 && post.beta.shape > 1.0)) {
    throw Error(ErrorCode::domain, "posterior mode of R needs both posterior shapes above 1");
  }
  constexpr double eps = 1e-12;
  return num::find_root([&](double r) { return mode_equation(r, post); }, eps, 1.0 - eps, {1e-300, 1e-15, 400});
}

struct RDraws {
  std::vector<double> draws;
  double acceptance_rate = 0.0;
};

/// Acceptance-rejection from the posterior of R with a flat proposal on (0,1)
/// and envelope height equal to the density at the mode.
template <class URBG>
RDraws sample_r(const ShapePosteriors& post, std::size_t count, URBG& rng) {
  if (count == 0) throw Error(ErrorCode::domain, "need at least one posterior draw");
  const double log_peak = log_r_density(r_mode(post), post);
  RDraws out;
  out.draws.reserve(count);
  std::size_t proposals = 0;
  while (out.draws.size() < count) {
    const double r = uniform_open(rng);
    const double u = uniform_open(rng);
    ++proposals;
    if (std::log(u) <= log_r_density(r, post) - log_peak) out.draws.push_back(r);
  }
  out.acceptance_rate = static_cast<double>(count) / static_cast<double>(proposals);
  return out;
}

/// Lindley-type approximation of the posterior mean of alpha/(alpha+beta):
///   R_B = R~ [1 + a~ R~^2 (a~ (n+g1-1) - b~ (m+g2-2)) / (b~^2 (n+l1-1)(m+l2-1))]
/// with a~ = (n+g1-1)/(l1-T1), b~ = (m+g2-1)/(l2-T2), R~ = a~/(a~+b~).
/// The denominator uses the prior rates l1, l2, not the posterior rates.
inline double lindley(double n, double m, double t1, double t2, const GammaPrior& prior_alpha,
                      const GammaPrior& prior_beta) {
  glfr::validate(prior_alpha);
  glfr::validate(prior_beta);
  const double g1 = prior_alpha.shape, l1 = prior_alpha.rate;
  const double g2 = prior_beta.shape, l2 = prior_beta.rate;
  if (!(n + l1 > 1.0) || !(m + l2 > 1.0)) {
    throw Error(ErrorCode::domain, "Lindley approximation needs n + lambda1 > 1 and m + lambda2 > 1");
  }
  if (!(l1 - t1 > 0.0) || !(l2 - t2 > 0.0)) throw Error(ErrorCode::domain, "posterior rates must be positive");
  const double at = (n + g1 - 1.0) / (l1 - t1);
  const double bt = (m + g2 - 1.0) / (l2 - t2);
  const double rt = at / (at + bt);
  const double bracket = at * (n + g1 - 1.0) - bt * (m + g2 - 2.0);
  return rt * (1.0 + at * rt * rt * bracket / (bt * bt * (n + l1 - 1.0) * (m + l2 - 1.0)));
}

}  // namespace posterior
}  // namespace glfr
