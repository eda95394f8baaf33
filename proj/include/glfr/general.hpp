#pragma once

// The six-parameter case X ~ GLFR(a1, b1, alpha), Y ~ GLFR(a2, b2, beta).
// The likelihood separates, so each side is an ordinary single-sample fit and
// R = P(Y < X) has to be computed by quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "glfr/common_scale.hpp"
#include "glfr/distribution.hpp"
#include "glfr/error.hpp"
#include "glfr/likelihood.hpp"
#include "glfr/numerics.hpp"
#include "glfr/posterior.hpp"

namespace glfr::general {

struct SideFit {
  GlfrParams params;
  bool converged = false;
  int iterations = 0;
  double score_norm = 0.0;
  lik::Boundary boundary = lik::Boundary::none;
  double log_likelihood = 0.0;
};

struct GeneralFit {
  GlfrParams px;
  GlfrParams py;
  double r_hat = 0.0;
  SideFit x_side;
  SideFit y_side;
  bool converged = false;
  int iterations = 0;
  double score_norm = 0.0;
};

/// Single-sample GLFR maximum likelihood.
inline SideFit fit_side(std::span<const double> xs, const lik::FitConfig& cfg = {}) {
  if (xs.size() < 3) throw Error(ErrorCode::degenerate_sample, "a side needs at least 3 values");
  const std::array<std::span<const double>, 1> samples{xs};
  const lik::ScaleFit sf = lik::fit_scale(samples, std::nullopt, cfg);
  SideFit out;
  out.params = {sf.a, sf.b, sf.shapes[0]};
  out.converged = sf.converged;
  out.iterations = sf.iterations;
  out.score_norm = sf.score_norm;
  out.boundary = sf.boundary;
  out.log_likelihood = sf.log_likelihood;
  return out;
}

/// P(Y < X) = integral over (0, inf) of f_X(x) F_Y(x) dx.
inline double r_integral(const GlfrParams& px, const GlfrParams& py) {
  validate(px);
  validate(py);
  return num::quad([&](double x) { return x <= 0.0 ? 0.0 : pdf(px, x) * cdf(py, x); }, 0.0, num::kInf,
                   {1e-11, 1e-12, 4000});
}

inline GeneralFit fit_general(std::span<const double> x, std::span<const double> y, const lik::FitConfig& cfg = {}) {
  GeneralFit out;
  // Errors carry the side so callers can tell which fit failed.
  try {
    out.x_side = fit_side(x, cfg);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("x side: ") + e.what());
  }
  try {
    out.y_side = fit_side(y, cfg);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("y side: ") + e.what());
  }
  out.px = out.x_side.params;
  out.py = out.y_side.params;
  out.r_hat = r_integral(out.px, out.py);
  out.converged = out.x_side.converged && out.y_side.converged;
  out.iterations = out.x_side.iterations + out.y_side.iterations;
  out.score_norm = std::hypot(out.x_side.score_norm, out.y_side.score_norm);
  return out;
}

/// Priors on (a1, b1, a2, b2, alpha, beta).
struct GeneralPriors {
  GammaPrior a1{1.0, 1e-4};
  GammaPrior b1{1.0, 1e-4};
  GammaPrior a2{1.0, 1e-4};
  GammaPrior b2{1.0, 1e-4};
  GammaPrior alpha = kNoninformative;
  GammaPrior beta = kNoninformative;
};

struct GeneralBayes {
  lik::MapScale x_scale;
  lik::MapScale y_scale;
  ShapePosteriors posterior;
  double v1 = 0.0;
  double v2 = 0.0;
  double r_bayes = 0.0;           ///< Lindley formula on the ratio alpha/(alpha+beta)
  double r_bayes_integral = 0.0;  ///< posterior mean of r_integral over shape draws at the MAP scales
  num::Interval credible;         ///< percentiles of the acceptance-rejection draws of the ratio
  double acceptance_rate = 0.0;
};

struct GeneralBayesConfig {
  std::size_t draws = 10000;           ///< acceptance-rejection draws for the credible interval
  std::size_t integral_draws = 10000;  ///< (alpha, beta) draws for r_bayes_integral; 0 skips it
  double level = 0.95;
};

/// Per-side MAP scale, Gamma pseudo-posteriors for the shapes at those
/// scales, and the Lindley estimate. r_bayes_integral averages r_integral
/// over independent Gamma draws of (alpha, beta).
template <class URBG>
GeneralBayes bayes_general(std::span<const double> x, std::span<const double> y, const GeneralPriors& pr,
                           const GeneralBayesConfig& cfg, URBG& rng) {
  for (const GammaPrior& g : {pr.a1, pr.b1, pr.a2, pr.b2, pr.alpha, pr.beta}) validate(g);
  GeneralBayes out;
  const std::array<std::span<const double>, 1> xs{x}, ys{y};
  const std::array<GammaPrior, 1> ax{pr.alpha}, ay{pr.beta};
  out.x_scale = lik::map_scale(xs, ax, {pr.a1, pr.b1});
  out.y_scale = lik::map_scale(ys, ay, {pr.a2, pr.b2});
  out.v1 = log_transform_sum(x, out.x_scale.a, out.x_scale.b);
  out.v2 = log_transform_sum(y, out.y_scale.a, out.y_scale.b);
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  out.posterior = {{pr.alpha.shape + n, pr.alpha.rate - out.v1}, {pr.beta.shape + m, pr.beta.rate - out.v2}};
  out.r_bayes = posterior::lindley(n, m, out.v1, out.v2, pr.alpha, pr.beta);
  posterior::RDraws d = posterior::sample_r(out.posterior, cfg.draws, rng);
  std::sort(d.draws.begin(), d.draws.end());
  out.credible = common::percentile_interval(d.draws, cfg.level);
  out.acceptance_rate = d.acceptance_rate;
  if (cfg.integral_draws > 0) {
    std::gamma_distribution<double> ga(out.posterior.alpha.shape, 1.0 / out.posterior.alpha.rate);
    std::gamma_distribution<double> gb(out.posterior.beta.shape, 1.0 / out.posterior.beta.rate);
    num::CompensatedSum s;
    for (std::size_t i = 0; i < cfg.integral_draws; ++i) {
      const double al = ga(rng), be = gb(rng);
      s.add(r_integral({out.x_scale.a, out.x_scale.b, al}, {out.y_scale.a, out.y_scale.b, be}));
    }
    out.r_bayes_integral = s.value() / static_cast<double>(cfg.integral_draws);
  }
  return out;
}

}  // namespace glfr::general
