#pragma once

// Likelihood machinery for one or more GLFR samples that share the scale
// (a, b) but each carry their own shape. With the scale fixed the shape MLE is
// closed form, alpha^(a, b) = -n / T(a, b), so the fit reduces to a
// two-dimensional profile problem in (a, b). The common-scale estimator uses
// two samples, the general estimator one sample per side.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "glfr/distribution.hpp"
#include "glfr/error.hpp"
#include "glfr/numerics.hpp"
#include "glfr/posterior.hpp"

namespace glfr::lik {

using Samples = std::span<const std::span<const double>>;

/// Per-sample sums needed by the log-likelihood, its score and its Hessian.
/// With t = a x + b x^2/2 and q = 1/(e^t - 1) = e^{-t}/(1 - e^{-t}):
struct SampleSums {
  double n = 0;
  double log_rate = 0;   // sum ln(a + b x)
  double t = 0;          // sum t
  double log_f = 0;      // T = sum ln(1 - e^{-t})
  double x = 0;          // sum x
  double x2_half = 0;    // sum x^2 / 2
  double inv_rate = 0;   // sum 1/(a + b x)
  double x_rate = 0;     // sum x/(a + b x)
  double inv_rate2 = 0;  // sum 1/(a + b x)^2
  double x_rate2 = 0;    // sum x/(a + b x)^2
  double x2_rate2 = 0;   // sum x^2/(a + b x)^2
  double xq = 0;         // sum x q
  double x2q = 0;        // sum x^2 q
  double x2w = 0;        // sum x^2 q (1 + q)
  double x3w = 0;        // sum x^3 q (1 + q)
  double x4w = 0;        // sum x^4 q (1 + q)
};

inline void check_sample(std::span<const double> xs) {
  if (xs.empty()) throw Error(ErrorCode::degenerate_sample, "empty sample");
  for (double v : xs) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::degenerate_sample, "observations must be positive");
  }
}

inline SampleSums sums(std::span<const double> xs, double a, double b) {
  SampleSums s;
  num::CompensatedSum log_f;
  s.n = static_cast<double>(xs.size());
  for (double x : xs) {
    const double t = x * (a + 0.5 * b * x);
    const double rate = a + b * x;
    const double q = 1.0 / std::expm1(t);
    const double w = q * (1.0 + q);
    const double x2 = x * x;
    s.log_rate += std::log(rate);
    s.t += t;
    log_f.add(num::log1mexp(t));
    s.x += x;
    s.x2_half += 0.5 * x2;
    s.inv_rate += 1.0 / rate;
    s.x_rate += x / rate;
    s.inv_rate2 += 1.0 / (rate * rate);
    s.x_rate2 += x / (rate * rate);
    s.x2_rate2 += x2 / (rate * rate);
    s.xq += x * q;
    s.x2q += x2 * q;
    s.x2w += x2 * w;
    s.x3w += x2 * x * w;
    s.x4w += x2 * x2 * w;
  }
  s.log_f = log_f.value();
  return s;
}

inline bool valid_scale(double a, double b) {
  return std::isfinite(a) && std::isfinite(b) && a >= 0.0 && b >= 0.0 && (a > 0.0 || b > 0.0);
}

/// Log-likelihood contribution of one sample with shape `shape`.
inline double log_likelihood(const SampleSums& s, double shape) {
  return s.n * std::log(shape) + s.log_rate + (shape - 1.0) * s.log_f - s.t;
}

/// d/da and d/db of one sample's log-likelihood.
inline num::Vec2 scale_score(const SampleSums& s, double shape) {
  return {s.inv_rate + (shape - 1.0) * s.xq - s.x, s.x_rate + 0.5 * (shape - 1.0) * s.x2q - s.x2_half};
}

inline double profiled_shape(const SampleSums& s) { return -s.n / s.log_f; }

inline double profile_log_likelihood(Samples samples, double a, double b) {
  double total = 0.0;
  for (auto xs : samples) {
    const SampleSums s = sums(xs, a, b);
    total += log_likelihood(s, profiled_shape(s));
  }
  return total;
}

inline num::Vec2 profile_score(Samples samples, double a, double b) {
  num::Vec2 g{0.0, 0.0};
  for (auto xs : samples) {
    const SampleSums s = sums(xs, a, b);
    const num::Vec2 gs = scale_score(s, profiled_shape(s));
    g[0] += gs[0];
    g[1] += gs[1];
  }
  return g;
}

enum class Boundary { none, a_zero, b_zero };

inline const char* to_string(Boundary b) {
  switch (b) {
    case Boundary::none: return "none";
    case Boundary::a_zero: return "a_zero";
    case Boundary::b_zero: return "b_zero";
  }
  return "none";
}

struct ScaleFit {
  double a = 0.0;
  double b = 0.0;
  std::vector<double> shapes;
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  double score_norm = 0.0;  ///< Euclidean norm of the log-parameter score
  Boundary boundary = Boundary::none;
};

struct FitConfig {
  num::RootConfig root{1e-9, 1e-14, 200};
  double score_tol = 1e-6;
};

/// Pooled-data default start: a0 = 1/mean, b0 = a0/mean.
inline num::Vec2 default_start(Samples samples) {
  double total = 0.0, count = 0.0;
  for (auto xs : samples) {
    for (double v : xs) total += v;
    count += static_cast<double>(xs.size());
  }
  const double mean = total / count;
  return {1.0 / mean, 1.0 / (mean * mean)};
}

namespace detail {

inline ScaleFit finish(Samples samples, double a, double b, int iterations, Boundary boundary) {
  ScaleFit fit;
  fit.a = a;
  fit.b = b;
  fit.iterations = iterations;
  fit.boundary = boundary;
  double norm2 = 0.0;
  num::Vec2 g{0.0, 0.0};
  for (auto xs : samples) {
    const SampleSums s = sums(xs, a, b);
    const double shape = profiled_shape(s);
    fit.shapes.push_back(shape);
    fit.log_likelihood += log_likelihood(s, shape);
    const num::Vec2 gs = scale_score(s, shape);
    g[0] += gs[0];
    g[1] += gs[1];
    const double gshape = shape * (s.n / shape + s.log_f);
    norm2 += gshape * gshape;
  }
  // On a boundary the pinned coordinate's score is not required to vanish.
  if (boundary != Boundary::a_zero) norm2 += (a * g[0]) * (a * g[0]);
  if (boundary != Boundary::b_zero) norm2 += (b * g[1]) * (b * g[1]);
  fit.score_norm = std::sqrt(norm2);
  return fit;
}

/// Newton on the log-parameter profile score from one start; returns nullopt
/// when the solver fails or lands somewhere other than a local maximum.
inline std::optional<ScaleFit> interior_attempt(Samples samples, num::Vec2 start, const FitConfig& cfg) {
  auto g = [&](const num::Vec2& uv) -> num::Vec2 {
    const double a = std::exp(uv[0]), b = std::exp(uv[1]);
    if (!valid_scale(a, b) || a == 0.0 || b == 0.0) return {num::kNaN, num::kNaN};
    const num::Vec2 s = profile_score(samples, a, b);
    return {a * s[0], b * s[1]};
  };
  try {
    const num::Solution2 sol = num::solve_system2(g, {std::log(start[0]), std::log(start[1])}, cfg.root);
    const num::Mat2 h = num::fd_jacobian(g, sol.x);
    const double det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    if (!(h[0][0] < 0.0 && h[1][1] < 0.0 && det > 0.0)) return std::nullopt;
    ScaleFit fit = finish(samples, std::exp(sol.x[0]), std::exp(sol.x[1]), sol.iterations, Boundary::none);
    if (!(fit.score_norm <= cfg.score_tol)) return std::nullopt;
    fit.converged = true;
    return fit;
  } catch (const Error&) {
    return std::nullopt;
  }
}

/// Maximises the profile along one boundary (b = 0 or a = 0).
inline std::optional<ScaleFit> boundary_attempt(Samples samples, Boundary which, double guess, const FitConfig& cfg) {
  auto score = [&](double v) {
    const double a = which == Boundary::b_zero ? v : 0.0;
    const double b = which == Boundary::b_zero ? 0.0 : v;
    const num::Vec2 s = profile_score(samples, a, b);
    return which == Boundary::b_zero ? s[0] : s[1];
  };
  try {
    const auto [lo, hi] = num::bracket_positive(score, guess, 2.0, 200);
    const double v = num::find_root(score, lo, hi, {1e-300, 1e-14, 400});
    ScaleFit fit = finish(samples, which == Boundary::b_zero ? v : 0.0, which == Boundary::b_zero ? 0.0 : v, 0, which);
    fit.converged = fit.score_norm <= cfg.score_tol;
    return fit;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Profile maximum likelihood for a shared scale (a, b). Tries the given (or
/// default) start, then a 3x3 grid of {0.25, 1, 4} multiples of it; if no
/// interior local maximum is found the two boundaries b = 0 and a = 0 are fit
/// and the better one is reported with its boundary flag.
inline ScaleFit fit_scale(Samples samples, std::optional<num::Vec2> init = std::nullopt, const FitConfig& cfg = {}) {
  for (auto xs : samples) check_sample(xs);
  const num::Vec2 base = init.value_or(default_start(samples));
  if (!(base[0] > 0.0 && base[1] > 0.0)) throw Error(ErrorCode::invalid_params, "initial scale must be positive");
  if (auto fit = detail::interior_attempt(samples, base, cfg)) return *fit;
  constexpr std::array<double, 3> mult{0.25, 1.0, 4.0};
  std::optional<ScaleFit> best;
  for (double ma : mult) {
    for (double mb : mult) {
      if (ma == 1.0 && mb == 1.0) continue;
      auto fit = detail::interior_attempt(samples, {base[0] * ma, base[1] * mb}, cfg);
      if (fit && (!best || fit->log_likelihood > best->log_likelihood)) best = fit;
    }
  }
  if (best) return *best;
  for (Boundary which : {Boundary::b_zero, Boundary::a_zero}) {
    auto fit = detail::boundary_attempt(samples, which, which == Boundary::b_zero ? base[0] : base[1], cfg);
    if (fit && (!best || fit->log_likelihood > best->log_likelihood)) best = fit;
  }
  if (!best) throw Error(ErrorCode::non_convergence, "profile likelihood fit did not converge from any start");
  if (best->a < 1e-12 * base[0] && best->b < 1e-12 * base[1]) {
    throw Error(ErrorCode::boundary_collapse, "scale estimates collapsed to zero");
  }
  return *best;
}

// ---------------------------------------------------------------------------
// Marginal posterior of the scale after integrating the shapes out.

struct ScalePriors {
  GammaPrior a{1.0, 1e-4};
  GammaPrior b{1.0, 1e-4};
};

/// log pi(a, b | data) up to a constant, with each sample's shape integrated
/// against its Gamma(g, l) prior:
///   sum_s [ sum ln(a + b x) - sum t - T_s - (n_s + g_s) ln(l_s - T_s) ]
///     + (g_a - 1) ln a - l_a a + (g_b - 1) ln b - l_b b.
/// The -T_s term comes from the (shape - 1) T_s part of the likelihood.
inline double log_marginal_posterior(Samples samples, std::span<const GammaPrior> shape_priors,
                                     const ScalePriors& scale, double a, double b) {
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const SampleSums s = sums(samples[i], a, b);
    const GammaPrior& pr = shape_priors[i];
    total += s.log_rate - s.t - s.log_f - (s.n + pr.shape) * std::log(pr.rate - s.log_f);
  }
  if (scale.a.shape != 1.0) total += (scale.a.shape - 1.0) * std::log(a);
  if (scale.b.shape != 1.0) total += (scale.b.shape - 1.0) * std::log(b);
  return total - scale.a.rate * a - scale.b.rate * b;
}

/// Gradient of log_marginal_posterior with respect to (a, b).
inline num::Vec2 log_marginal_gradient(Samples samples, std::span<const GammaPrior> shape_priors,
                                       const ScalePriors& scale, double a, double b) {
  num::Vec2 g{0.0, 0.0};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const SampleSums s = sums(samples[i], a, b);
    const GammaPrior& pr = shape_priors[i];
    // (n + g)/(l - T) plays the role of the shape estimate; dT/da = sum x q.
    const double shape = (s.n + pr.shape) / (pr.rate - s.log_f);
    g[0] += s.inv_rate - s.x + (shape - 1.0) * s.xq;
    g[1] += s.x_rate - s.x2_half + 0.5 * (shape - 1.0) * s.x2q;
  }
  if (scale.a.shape != 1.0) g[0] += (scale.a.shape - 1.0) / a;
  if (scale.b.shape != 1.0) g[1] += (scale.b.shape - 1.0) / b;
  g[0] -= scale.a.rate;
  g[1] -= scale.b.rate;
  return g;
}

struct MapScale {
  double a = 0.0;
  double b = 0.0;
  double log_posterior = 0.0;
  double gradient_norm = 0.0;  ///< norm of the log-parameter gradient at (a, b)
  int iterations = 0;
  Boundary boundary = Boundary::none;
};

/// Maximum a posteriori scale. Newton on the log-parameter gradient with the
/// same multi-start policy as fit_scale. When no interior maximum exists the
/// best boundary point is returned with its flag set (with a Gamma shape
/// below 1 on the pinned coordinate the posterior density is unbounded there).
inline MapScale map_scale(Samples samples, std::span<const GammaPrior> shape_priors, const ScalePriors& scale,
                          std::optional<num::Vec2> init = std::nullopt, const FitConfig& cfg = {}) {
  for (auto xs : samples) check_sample(xs);
  if (shape_priors.size() != samples.size()) throw Error(ErrorCode::invalid_params, "one shape prior per sample");
  for (const auto& p : shape_priors) validate(p);
  validate(scale.a);
  validate(scale.b);
  auto grad = [&](const num::Vec2& uv) -> num::Vec2 {
    const double a = std::exp(uv[0]), b = std::exp(uv[1]);
    if (!(a > 0.0 && b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) return {num::kNaN, num::kNaN};
    const num::Vec2 g = log_marginal_gradient(samples, shape_priors, scale, a, b);
    return {a * g[0], b * g[1]};
  };
  auto attempt = [&](num::Vec2 start) -> std::optional<MapScale> {
    try {
      const num::Solution2 sol = num::solve_system2(grad, {std::log(start[0]), std::log(start[1])}, cfg.root);
      const num::Mat2 h = num::fd_jacobian(grad, sol.x);
      const double det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
      if (!(h[0][0] < 0.0 && h[1][1] < 0.0 && det > 0.0)) return std::nullopt;
      MapScale r;
      r.a = std::exp(sol.x[0]);
      r.b = std::exp(sol.x[1]);
      r.log_posterior = log_marginal_posterior(samples, shape_priors, scale, r.a, r.b);
      r.gradient_norm = std::hypot(sol.residual[0], sol.residual[1]);
      r.iterations = sol.iterations;
      return r;
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  num::Vec2 base = init.value_or(default_start(samples));
  if (!init) {
    try {
      const ScaleFit mle = fit_scale(samples, std::nullopt, cfg);
      if (mle.boundary == Boundary::none) base = {mle.a, mle.b};
    } catch (const Error&) {
    }
  }
  if (auto r = attempt(base)) return *r;
  std::optional<MapScale> best;
  constexpr std::array<double, 3> mult{0.25, 1.0, 4.0};
  for (double ma : mult) {
    for (double mb : mult) {
      if (ma == 1.0 && mb == 1.0) continue;
      auto r = attempt({base[0] * ma, base[1] * mb});
      if (r && (!best || r->log_posterior > best->log_posterior)) best = r;
    }
  }
  if (best) return *best;
  // Boundary: drop the pinned coordinate's prior term and maximise along the other.
  for (Boundary which : {Boundary::b_zero, Boundary::a_zero}) {
    ScalePriors pinned = scale;
    if (which == Boundary::b_zero) pinned.b = {1.0, scale.b.rate};
    else pinned.a = {1.0, scale.a.rate};
    auto g1 = [&](double v) {
      const double a = which == Boundary::b_zero ? v : 0.0;
      const double b = which == Boundary::b_zero ? 0.0 : v;
      const num::Vec2 g = log_marginal_gradient(samples, shape_priors, pinned, a, b);
      return which == Boundary::b_zero ? g[0] : g[1];
    };
    try {
      const auto [lo, hi] = num::bracket_positive(g1, which == Boundary::b_zero ? base[0] : base[1], 2.0, 200);
      const double root = num::find_root(g1, lo, hi, {1e-300, 1e-14, 400});
      MapScale r;
      r.a = which == Boundary::b_zero ? root : 0.0;
      r.b = which == Boundary::b_zero ? 0.0 : root;
      r.log_posterior = log_marginal_posterior(samples, shape_priors, pinned, r.a, r.b);
      r.gradient_norm = std::abs(root * g1(root));
      r.boundary = which;
      if (!best || r.log_posterior > best->log_posterior) best = r;
    } catch (const Error&) {
    }
  }
  if (!best) throw Error(ErrorCode::non_convergence, "MAP scale search failed from every start");
  return *best;
}

/// Gamma(g + n, l - T) for each sample's shape at a fixed scale.
inline std::vector<GammaPrior> pseudo_posteriors(Samples samples, std::span<const GammaPrior> shape_priors, double a,
                                                 double b) {
  std::vector<GammaPrior> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double t = log_transform_sum(samples[i], a, b);
    out.push_back({shape_priors[i].shape + static_cast<double>(samples[i].size()), shape_priors[i].rate - t});
  }
  return out;
}

}  // namespace glfr::lik
