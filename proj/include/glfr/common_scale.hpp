#pragma once

// Inference on R = alpha / (alpha + beta) when X ~ GLFR(a, b, alpha) and
// Y ~ GLFR(a, b, beta) share an unknown scale (a, b): profile MLE, observed
// information with the asymptotic normal interval, percentile bootstrap and
// the MAP / pseudo-posterior Bayes pipeline.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "glfr/distribution.hpp"
#include "glfr/error.hpp"
#include "glfr/known_scale.hpp"
#include "glfr/likelihood.hpp"
#include "glfr/numerics.hpp"
#include "glfr/parallel.hpp"
#include "glfr/posterior.hpp"
#include "glfr/random.hpp"

namespace glfr::common {

using lik::Boundary;

/// Parameter vector in the order (a, b, alpha, beta).
using Theta = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;

struct CommonScaleFit {
  double a_hat = 0.0;
  double b_hat = 0.0;
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double r_hat = 0.0;
  bool converged = false;
  int iterations = 0;
  double score_norm = 0.0;
  Boundary boundary = Boundary::none;
  double log_likelihood = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;

  Theta theta() const { return {a_hat, b_hat, alpha_hat, beta_hat}; }
};

inline void check_sizes(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) throw Error(ErrorCode::degenerate_sample, "each sample needs at least 2 values");
}

/// Full four-parameter log-likelihood.
inline double log_likelihood(const Theta& th, std::span<const double> x, std::span<const double> y) {
  if (!lik::valid_scale(th[0], th[1]) || !(th[2] > 0.0 && th[3] > 0.0)) return -num::kInf;
  return lik::log_likelihood(lik::sums(x, th[0], th[1]), th[2]) + lik::log_likelihood(lik::sums(y, th[0], th[1]), th[3]);
}

/// Analytic score (d/da, d/db, d/dalpha, d/dbeta).
inline Theta score(const Theta& th, std::span<const double> x, std::span<const double> y) {
  const lik::SampleSums sx = lik::sums(x, th[0], th[1]);
  const lik::SampleSums sy = lik::sums(y, th[0], th[1]);
  const num::Vec2 gx = lik::scale_score(sx, th[2]);
  const num::Vec2 gy = lik::scale_score(sy, th[3]);
  return {gx[0] + gy[0], gx[1] + gy[1], sx.n / th[2] + sx.log_f, sy.n / th[3] + sy.log_f};
}

inline CommonScaleFit fit_common(std::span<const double> x, std::span<const double> y,
                                 std::optional<num::Vec2> init = std::nullopt, const lik::FitConfig& cfg = {}) {
  check_sizes(x, y);
  const std::array<std::span<const double>, 2> samples{x, y};
  const lik::ScaleFit sf = lik::fit_scale(samples, init, cfg);
  CommonScaleFit fit;
  fit.a_hat = sf.a;
  fit.b_hat = sf.b;
  fit.alpha_hat = sf.shapes[0];
  fit.beta_hat = sf.shapes[1];
  fit.r_hat = fit.alpha_hat / (fit.alpha_hat + fit.beta_hat);
  fit.converged = sf.converged;
  fit.iterations = sf.iterations;
  fit.score_norm = sf.score_norm;
  fit.boundary = sf.boundary;
  fit.log_likelihood = sf.log_likelihood;
  fit.n = x.size();
  fit.m = y.size();
  return fit;
}

// ---------------------------------------------------------------------------
// Observed information and the asymptotic variance of R^

struct InfoMatrix {
  Mat4 info{};     ///< I = -Hessian of the log-likelihood, order (a, b, alpha, beta)
  Mat4 u{};        ///< scaled information
  Mat4 adjoint{};  ///< adjugate of u (so u^{-1} = adjoint / k)
  double k = 0.0;  ///< determinant of u
  double a33 = 0.0;
  double a34 = 0.0;
  double a44 = 0.0;
  double p = 0.0;  ///< n / m
  double sigma2 = 0.0;
};

namespace detail {

inline double det3(const Mat4& m, const std::array<int, 3>& r, const std::array<int, 3>& c) {
  return m[r[0]][c[0]] * (m[r[1]][c[1]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[1]]) -
         m[r[0]][c[1]] * (m[r[1]][c[0]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[0]]) +
         m[r[0]][c[2]] * (m[r[1]][c[0]] * m[r[2]][c[1]] - m[r[1]][c[1]] * m[r[2]][c[0]]);
}

inline std::array<int, 3> others(int i) {
  std::array<int, 3> out{};
  for (int j = 0, k = 0; j < 4; ++j)
    if (j != i) out[k++] = j;
  return out;
}

inline Mat4 adjugate(const Mat4& m) {
  Mat4 adj{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double minor = det3(m, others(j), others(i));
      adj[i][j] = ((i + j) % 2 == 0 ? 1.0 : -1.0) * minor;
    }
  }
  return adj;
}

}  // namespace detail

/// Observed information at theta and its cofactor summaries. u is the
/// information rescaled by diag(sqrt n, sqrt n, sqrt n, sqrt m)^{-1} on both
/// sides, which produces the 1/n, sqrt(p)/n and 1/m factors.
inline InfoMatrix observed_info(const Theta& th, std::span<const double> x, std::span<const double> y) {
  const double a = th[0], b = th[1], alpha = th[2], beta = th[3];
  if (!lik::valid_scale(a, b) || !(alpha > 0.0 && beta > 0.0)) {
    throw Error(ErrorCode::invalid_params, "observed_info needs a valid parameter vector");
  }
  lik::check_sample(x);
  lik::check_sample(y);
  const lik::SampleSums sx = lik::sums(x, a, b);
  const lik::SampleSums sy = lik::sums(y, a, b);
  InfoMatrix r;
  Mat4& I = r.info;
  I[0][0] = sx.inv_rate2 + sy.inv_rate2 + (alpha - 1.0) * sx.x2w + (beta - 1.0) * sy.x2w;
  I[0][1] = sx.x_rate2 + sy.x_rate2 + 0.5 * ((alpha - 1.0) * sx.x3w + (beta - 1.0) * sy.x3w);
  I[1][1] = sx.x2_rate2 + sy.x2_rate2 + 0.25 * ((alpha - 1.0) * sx.x4w + (beta - 1.0) * sy.x4w);
  I[0][2] = -sx.xq;
  I[0][3] = -sy.xq;
  I[1][2] = -0.5 * sx.x2q;
  I[1][3] = -0.5 * sy.x2q;
  I[2][2] = sx.n / (alpha * alpha);
  I[3][3] = sy.n / (beta * beta);
  I[2][3] = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < i; ++j) I[i][j] = I[j][i];

  const double n = sx.n, m = sy.n;
  r.p = n / m;
  const std::array<double, 4> d{std::sqrt(n), std::sqrt(n), std::sqrt(n), std::sqrt(m)};
  Mat4& u = r.u;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) u[i][j] = I[i][j] / (d[i] * d[j]);

  // Cofactor expressions in closed form (u34 = 0 has been used to drop terms).
  auto U = [&](int i, int j) { return u[i - 1][j - 1]; };
  r.k = U(1, 1) * U(2, 2) * U(3, 3) * U(4, 4) + U(1, 2) * U(2, 3) * U(3, 1) * U(4, 4) +
        U(1, 2) * U(2, 4) * U(3, 3) * U(4, 1) + U(1, 3) * U(2, 1) * U(3, 2) * U(4, 4) +
        U(1, 3) * U(2, 4) * U(3, 1) * U(4, 2) + U(1, 4) * U(2, 1) * U(3, 3) * U(4, 2) +
        U(1, 4) * U(2, 3) * U(3, 2) * U(4, 1) - U(1, 1) * U(2, 3) * U(3, 2) * U(4, 4) -
        U(1, 1) * U(2, 4) * U(3, 3) * U(4, 2) - U(1, 2) * U(2, 1) * U(3, 3) * U(4, 4) -
        U(1, 3) * U(2, 2) * U(3, 1) * U(4, 4) - U(1, 3) * U(2, 4) * U(3, 2) * U(4, 1) -
        U(1, 4) * U(2, 2) * U(3, 3) * U(4, 1) - U(1, 4) * U(2, 3) * U(3, 1) * U(4, 2);
  r.a33 = U(1, 1) * U(2, 2) * U(4, 4) + U(1, 2) * U(2, 4) * U(4, 1) + U(1, 4) * U(2, 1) * U(4, 2) -
          U(1, 1) * U(2, 4) * U(4, 2) - U(1, 2) * U(2, 1) * U(4, 4) - U(1, 4) * U(2, 2) * U(4, 1);
  r.a34 = U(1, 1) * U(2, 4) * U(3, 2) + U(1, 4) * U(2, 2) * U(3, 1) - U(1, 2) * U(2, 4) * U(3, 1) -
          U(1, 4) * U(2, 1) * U(3, 2);
  r.a44 = U(1, 1) * U(2, 2) * U(3, 3) + U(1, 2) * U(2, 3) * U(3, 1) + U(1, 3) * U(2, 1) * U(3, 2) -
          U(1, 1) * U(2, 3) * U(3, 2) - U(1, 2) * U(2, 1) * U(3, 3) - U(1, 3) * U(2, 2) * U(3, 1);
  r.adjoint = detail::adjugate(u);

  const double s = alpha + beta;
  r.sigma2 = (beta * beta * r.a33 - 2.0 * std::sqrt(r.p) * alpha * beta * r.a34 + alpha * alpha * r.p * r.a44) /
             (r.k * s * s * s * s);
  return r;
}

inline double asymptotic_variance(const InfoMatrix& info) {
  if (!std::isfinite(info.k) || std::abs(info.k) < 1e-300) throw Error(ErrorCode::singular_matrix, "U is singular");
  if (!(info.sigma2 > 0.0)) throw Error(ErrorCode::not_positive_definite, "asymptotic variance is not positive");
  return info.sigma2;
}

struct ClippedInterval {
  num::Interval interval;
  bool clipped = false;
};

/// r^ -/+ z_{1-g/2} sqrt(sigma2 / n), clipped to [0, 1].
inline ClippedInterval asymptotic_ci(double r_hat, double sigma2, std::size_t n, double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::invalid_probability, "level must lie in (0,1)");
  if (!(sigma2 > 0.0) || n == 0) throw Error(ErrorCode::domain, "asymptotic_ci needs sigma2 > 0 and n >= 1");
  const double z = num::normal_quantile(0.5 + 0.5 * level);
  const double half = z * std::sqrt(sigma2 / static_cast<double>(n));
  double lo = r_hat - half, hi = r_hat + half;
  const bool clipped = lo < 0.0 || hi > 1.0;
  lo = std::max(lo, 0.0);
  hi = std::min(hi, 1.0);
  return {num::make_interval(lo, hi, level), clipped};
}

// ---------------------------------------------------------------------------
// Percentile bootstrap

/// Empirical gamma/2 and 1 - gamma/2 percentiles of a sorted replicate set.
inline num::Interval percentile_interval(std::span<const double> sorted, double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::invalid_probability, "level must lie in (0,1)");
  const double tail = 0.5 * (1.0 - level);
  return num::make_interval(num::empirical_quantile(sorted, tail), num::empirical_quantile(sorted, 1.0 - tail), level);
}

struct BootstrapResult {
  double r_hat = 0.0;        ///< estimate on the original data
  double r_star_mean = 0.0;  ///< mean of the bootstrap replicates
  num::Interval interval;
  std::vector<double> replicates;  ///< sorted
  std::size_t failures = 0;        ///< resample fits that had to be redrawn
};

struct BootstrapConfig {
  std::size_t resamples = 1000;
  double level = 0.95;
  unsigned threads = 1;
  double max_failure_fraction = 0.05;
};

/// Parametric percentile bootstrap. With a known scale only the shapes are
/// refit. Replicate i draws from substream(seed, i, attempt) where seed is
/// taken from `rng`, so results do not depend on the thread count.
template <class URBG>
BootstrapResult bootstrap_ci(std::span<const double> x, std::span<const double> y,
                             std::optional<known::Scale> scale_known, const BootstrapConfig& cfg, URBG& rng) {
  if (cfg.resamples < 100) throw Error(ErrorCode::domain, "bootstrap needs at least 100 resamples");
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw Error(ErrorCode::invalid_probability, "level must lie in (0,1)");
  GlfrParams px, py;
  BootstrapResult out;
  if (scale_known) {
    const known::KnownScaleFit f = known::mle_known(x, y, *scale_known);
    px = {scale_known->a, scale_known->b, f.alpha_hat};
    py = {scale_known->a, scale_known->b, f.beta_hat};
    out.r_hat = f.r_hat;
  } else {
    const CommonScaleFit f = fit_common(x, y);
    px = {f.a_hat, f.b_hat, f.alpha_hat};
    py = {f.a_hat, f.b_hat, f.beta_hat};
    out.r_hat = f.r_hat;
  }
  const std::uint64_t seed = rng();
  const std::size_t max_attempts =
      static_cast<std::size_t>(std::floor(cfg.max_failure_fraction * static_cast<double>(cfg.resamples))) + 1;
  std::vector<double> reps(cfg.resamples);
  std::vector<std::size_t> fails(cfg.resamples, 0);
  parallel_for(cfg.resamples, cfg.threads, [&](std::size_t i) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      if (attempt >= max_attempts) throw Error(ErrorCode::too_many_failures, "bootstrap replicate kept failing");
      Rng sub = substream(seed, i, attempt);
      try {
        const std::vector<double> xs = sample(px, x.size(), sub);
        const std::vector<double> ys = sample(py, y.size(), sub);
        reps[i] = scale_known ? known::mle_known(xs, ys, *scale_known).r_hat : fit_common(xs, ys).r_hat;
        return;
      } catch (const Error&) {
        ++fails[i];
      }
    }
  });
  for (std::size_t f : fails) out.failures += f;
  if (static_cast<double>(out.failures) > cfg.max_failure_fraction * static_cast<double>(cfg.resamples)) {
    throw Error(ErrorCode::too_many_failures, "more than the allowed fraction of bootstrap fits failed");
  }
  num::CompensatedSum s;
  for (double r : reps) s.add(r);
  out.r_star_mean = s.value() / static_cast<double>(reps.size());
  std::sort(reps.begin(), reps.end());
  out.interval = percentile_interval(reps, cfg.level);
  out.replicates = std::move(reps);
  return out;
}

// ---------------------------------------------------------------------------
// Bayes: MAP scale, pseudo-posteriors, posterior of R

/// Priors on (a, b, alpha, beta). The noninformative preset keeps the shape
/// priors at 1e-4 but gives the scale priors shape 1, since a Gamma shape
/// below 1 makes the marginal posterior of (a, b) unbounded at the axes.
struct CommonPriors {
  GammaPrior a{1.0, 1e-4};
  GammaPrior b{1.0, 1e-4};
  GammaPrior alpha = kNoninformative;
  GammaPrior beta = kNoninformative;
};

inline constexpr CommonPriors kNoninformativePriors{};

inline void validate(const CommonPriors& p) {
  glfr::validate(p.a);
  glfr::validate(p.b);
  glfr::validate(p.alpha);
  glfr::validate(p.beta);
}

inline lik::MapScale map_scale(std::span<const double> x, std::span<const double> y, const CommonPriors& priors,
                               std::optional<num::Vec2> init = std::nullopt) {
  validate(priors);
  const std::array<std::span<const double>, 2> samples{x, y};
  const std::array<GammaPrior, 2> shapes{priors.alpha, priors.beta};
  return lik::map_scale(samples, shapes, {priors.a, priors.b}, init);
}

/// alpha ~ Gamma(g3 + n, l3 - U1), beta ~ Gamma(g4 + m, l4 - U2) at the given scale.
inline ShapePosteriors pseudo_posterior(std::span<const double> x, std::span<const double> y, double a_hat,
                                        double b_hat, const CommonPriors& priors) {
  return known::posterior_params(x, y, {a_hat, b_hat}, priors.alpha, priors.beta);
}

inline double posterior_mode_r(const ShapePosteriors& post) { return posterior::r_mode(post); }

template <class URBG>
posterior::RDraws sample_posterior_r(const ShapePosteriors& post, std::size_t count, URBG& rng) {
  return posterior::sample_r(post, count, rng);
}

inline double lindley_common(std::size_t n, std::size_t m, double u1, double u2, const GammaPrior& prior_alpha,
                             const GammaPrior& prior_beta) {
  return posterior::lindley(static_cast<double>(n), static_cast<double>(m), u1, u2, prior_alpha, prior_beta);
}

struct BayesResult {
  lik::MapScale scale;
  ShapePosteriors posterior;
  double u1 = 0.0;
  double u2 = 0.0;
  double r_lindley = 0.0;  ///< Lindley point estimate
  double r_mode = 0.0;     ///< posterior mode (0-1 loss)
  double r_mean = 0.0;     ///< posterior mean by quadrature
  num::Interval credible;  ///< percentiles of the acceptance-rejection draws
  num::Interval exact;     ///< equal-tailed interval from the closed-form CDF
  double acceptance_rate = 0.0;
  std::size_t draws = 0;
};

template <class URBG>
BayesResult bayes_common(std::span<const double> x, std::span<const double> y, const CommonPriors& priors,
                         std::size_t draws, double level, URBG& rng) {
  check_sizes(x, y);
  BayesResult out;
  out.scale = map_scale(x, y, priors);
  out.posterior = pseudo_posterior(x, y, out.scale.a, out.scale.b, priors);
  out.u1 = log_transform_sum(x, out.scale.a, out.scale.b);
  out.u2 = log_transform_sum(y, out.scale.a, out.scale.b);
  out.r_lindley = lindley_common(x.size(), y.size(), out.u1, out.u2, priors.alpha, priors.beta);
  out.r_mode = posterior_mode_r(out.posterior);
  out.r_mean = posterior::r_mean(out.posterior);
  posterior::RDraws d = sample_posterior_r(out.posterior, draws, rng);
  std::sort(d.draws.begin(), d.draws.end());
  out.credible = percentile_interval(d.draws, level);
  out.exact = posterior::credible_interval(out.posterior, level);
  out.acceptance_rate = d.acceptance_rate;
  out.draws = draws;
  return out;
}

}  // namespace glfr::common
