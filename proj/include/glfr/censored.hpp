#pragma once

// Progressive type-II censoring: n units go on test, and at the i-th observed
// failure P_i of the surviving units are withdrawn, until m failures have been
// seen. Here both samples share a scale (a, b) and only the shapes are fit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glfr/common_scale.hpp"
#include "glfr/distribution.hpp"
#include "glfr/error.hpp"
#include "glfr/known_scale.hpp"
#include "glfr/numerics.hpp"
#include "glfr/random.hpp"

namespace glfr::censor {

struct CensoringScheme {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<std::size_t> removals;
};

inline void validate(const CensoringScheme& s) {
  if (s.m < 1 || s.m > s.n) throw Error(ErrorCode::invalid_scheme, "scheme needs 1 <= m <= n");
  if (s.removals.size() != s.m) throw Error(ErrorCode::invalid_scheme, "scheme needs exactly m removal counts");
  const std::size_t total = std::accumulate(s.removals.begin(), s.removals.end(), std::size_t{0});
  if (total != s.n - s.m) throw Error(ErrorCode::invalid_scheme, "removals must sum to n - m");
}

enum class SchemeKind { type2, type3, type4 };

inline const char* to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::type2: return "type2";
    case SchemeKind::type3: return "type3";
    case SchemeKind::type4: return "type4";
  }
  return "type2";
}

inline SchemeKind parse_scheme_kind(const std::string& s) {
  if (s == "type2" || s == "II") return SchemeKind::type2;
  if (s == "type3" || s == "III") return SchemeKind::type3;
  if (s == "type4" || s == "IV") return SchemeKind::type4;
  throw Error(ErrorCode::invalid_scheme, "unknown scheme kind '" + s + "'");
}

/// type2: all n - m withdrawals at the last failure (ordinary type-II);
/// type3: all at the first failure; type4: spread evenly, with the remainder
/// going one apiece to the first slots.
inline CensoringScheme scheme_of_kind(SchemeKind kind, std::size_t n, std::size_t m) {
  if (m < 1 || m > n) throw Error(ErrorCode::invalid_scheme, "scheme needs 1 <= m <= n");
  CensoringScheme s{n, m, std::vector<std::size_t>(m, 0)};
  const std::size_t k = n - m;
  switch (kind) {
    case SchemeKind::type2: s.removals.back() = k; break;
    case SchemeKind::type3: s.removals.front() = k; break;
    case SchemeKind::type4:
      for (std::size_t i = 0; i < m; ++i) s.removals[i] = k / m + (i < k % m ? 1 : 0);
      break;
  }
  return s;
}

struct CensoredSample {
  std::vector<double> times;  ///< strictly increasing
  CensoringScheme scheme;
};

inline void validate(const CensoredSample& c) {
  validate(c.scheme);
  if (c.times.size() != c.scheme.m) throw Error(ErrorCode::invalid_scheme, "need one time per observed failure");
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    if (!(c.times[i] > 0.0) || !std::isfinite(c.times[i])) throw Error(ErrorCode::domain, "times must be positive");
    if (i > 0 && !(c.times[i] > c.times[i - 1])) throw Error(ErrorCode::unsorted_input, "times must increase");
  }
}

/// Uniform-spacings generation: with W_i ~ U(0,1) and
/// V_i = W_i^{1/(i + P_m + ... + P_{m-i+1})}, U_i = 1 - V_m V_{m-1} ... V_{m-i+1}
/// are progressively censored uniform order statistics.
template <class URBG>
CensoredSample generate_censored(const GlfrParams& p, const CensoringScheme& scheme, URBG& rng) {
  glfr::validate(p);
  validate(scheme);
  const std::size_t m = scheme.m;
  std::vector<double> log_v(m);  // log_v[i-1] = log V_i
  std::size_t tail = 0;
  for (std::size_t i = 1; i <= m; ++i) {
    tail += scheme.removals[m - i];
    log_v[i - 1] = std::log(uniform_open(rng)) / static_cast<double>(i + tail);
  }
  CensoredSample out{std::vector<double>(m), scheme};
  double log_prod = 0.0;
  for (std::size_t i = 1; i <= m; ++i) {
    log_prod += log_v[m - i];
    out.times[i - 1] = quantile(p, -std::expm1(log_prod));
  }
  return out;
}

/// Runs the censoring experiment on an observed complete sample: the
/// smallest surviving value fails, then P_i survivors chosen uniformly at
/// random are withdrawn.
template <class URBG>
CensoredSample censor_observed(std::span<const double> data, const CensoringScheme& scheme, URBG& rng) {
  validate(scheme);
  if (data.size() != scheme.n) throw Error(ErrorCode::invalid_scheme, "scheme n must equal the data size");
  std::vector<double> alive(data.begin(), data.end());
  std::sort(alive.begin(), alive.end());
  CensoredSample out{{}, scheme};
  for (std::size_t i = 0; i < scheme.m; ++i) {
    out.times.push_back(alive.front());
    alive.erase(alive.begin());
    for (std::size_t r = 0; r < scheme.removals[i]; ++r) {
      const auto j = static_cast<std::size_t>(uniform_open(rng) * static_cast<double>(alive.size()));
      alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(std::min(j, alive.size() - 1)));
    }
  }
  for (std::size_t i = 1; i < out.times.size(); ++i) {
    if (!(out.times[i] > out.times[i - 1])) throw Error(ErrorCode::unsorted_input, "data contain tied values");
  }
  return out;
}

/// One sample's contribution to the censored log-likelihood (constant dropped):
///   m ln(shape) + sum ln(a + b x) + (shape - 1) sum L - sum t + sum P_i ln(1 - e^{shape L_i})
/// with t = a x + b x^2/2 and L = ln(1 - e^{-t}).
inline double side_loglik(double a, double b, double shape, const CensoredSample& s) {
  const auto m = static_cast<double>(s.times.size());
  num::CompensatedSum acc;
  acc.add(m * std::log(shape));
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const double x = s.times[i];
    const double t = x * (a + 0.5 * b * x);
    const double l = num::log1mexp(t);
    acc.add(std::log(a + b * x) + (shape - 1.0) * l - t);
    if (s.scheme.removals[i] > 0) acc.add(static_cast<double>(s.scheme.removals[i]) * num::log1mexp(-shape * l));
  }
  return acc.value();
}

inline double censored_loglik(double a, double b, double alpha, double beta, const CensoredSample& xs,
                              const CensoredSample& ys) {
  validate(GlfrParams{a, b, alpha});
  validate(GlfrParams{a, b, beta});
  validate(xs);
  validate(ys);
  return side_loglik(a, b, alpha, xs) + side_loglik(a, b, beta, ys);
}

/// d ell / d shape = m / shape + T + sum P_i |L_i| / (e^{shape |L_i|} - 1),
/// strictly decreasing in the shape.
inline double shape_score(double a, double b, double shape, const CensoredSample& s) {
  num::CompensatedSum acc;
  acc.add(static_cast<double>(s.times.size()) / shape);
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const double x = s.times[i];
    const double l = -num::log1mexp(x * (a + 0.5 * b * x));
    acc.add(-l);
    if (s.scheme.removals[i] > 0) acc.add(static_cast<double>(s.scheme.removals[i]) * l / std::expm1(shape * l));
  }
  return acc.value();
}

struct CensoredFit {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double r_hat = 0.0;
};

inline double shape_mle(double a, double b, const CensoredSample& s) {
  const double t = log_transform_sum(s.times, a, b);
  if (!(t < 0.0)) throw Error(ErrorCode::degenerate_sample, "log-transform sum vanished");
  const double start = -static_cast<double>(s.times.size()) / t;
  auto f = [&](double shape) { return shape_score(a, b, shape, s); };
  const auto [lo, hi] = num::bracket_positive(f, start, 2.0, 200);
  return num::find_root(f, lo, hi, {1e-300, 1e-14, 400});
}

/// Shape MLEs at a known common scale; each is the unique root of its own
/// score, bracketed outward from the uncensored estimate -m/T.
inline CensoredFit censored_mle(const CensoredSample& xs, const CensoredSample& ys, const known::Scale& scale) {
  known::validate_scale(scale);
  validate(xs);
  validate(ys);
  CensoredFit fit;
  fit.alpha_hat = shape_mle(scale.a, scale.b, xs);
  fit.beta_hat = shape_mle(scale.a, scale.b, ys);
  fit.r_hat = fit.alpha_hat / (fit.alpha_hat + fit.beta_hat);
  return fit;
}

/// Delta-method interval for R^ using the 2x2 observed information in
/// (alpha, beta), obtained by central differences of the analytic score.
inline num::Interval censored_ci(const CensoredSample& xs, const CensoredSample& ys, const known::Scale& scale,
                                 const CensoredFit& fit, double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::invalid_probability, "level must lie in (0,1)");
  auto g = [&](const num::Vec2& th) -> num::Vec2 {
    return {shape_score(scale.a, scale.b, th[0], xs), shape_score(scale.a, scale.b, th[1], ys)};
  };
  const num::Mat2 h = num::fd_jacobian(g, {fit.alpha_hat, fit.beta_hat});
  const double i11 = -h[0][0], i22 = -h[1][1], i12 = -0.5 * (h[0][1] + h[1][0]);
  const double det = i11 * i22 - i12 * i12;
  if (!(i11 > 0.0 && det > 0.0)) throw Error(ErrorCode::not_positive_definite, "censored information is not PD");
  const double v11 = i22 / det, v22 = i11 / det, v12 = -i12 / det;
  const double al = fit.alpha_hat, be = fit.beta_hat, s2 = (al + be) * (al + be);
  const double g1 = be / s2, g2 = -al / s2;
  const double var = g1 * g1 * v11 + 2.0 * g1 * g2 * v12 + g2 * g2 * v22;
  const double half = num::normal_quantile(0.5 + 0.5 * level) * std::sqrt(var);
  return num::make_interval(std::max(0.0, fit.r_hat - half), std::min(1.0, fit.r_hat + half), level);
}

struct CensoredFullFit {
  double a_hat = 0.0;
  double b_hat = 0.0;
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double r_hat = 0.0;
  double log_likelihood = 0.0;
  bool converged = false;
};

/// Unknown common scale: direct maximisation of the censored log-likelihood
/// over (ln a, ln b, ln alpha, ln beta), started from the complete-data fit
/// of the observed values.
inline CensoredFullFit censored_mle_unknown_scale(const CensoredSample& xs, const CensoredSample& ys) {
  validate(xs);
  validate(ys);
  const common::CommonScaleFit start = common::fit_common(xs.times, ys.times);
  auto neg = [&](const std::vector<double>& z) {
    const double a = std::exp(z[0]), b = std::exp(z[1]), al = std::exp(z[2]), be = std::exp(z[3]);
    if (!(a > 0.0 && b > 0.0 && al > 0.0 && be > 0.0) || !std::isfinite(a + b + al + be)) return num::kInf;
    return -(side_loglik(a, b, al, xs) + side_loglik(a, b, be, ys));
  };
  const double tiny = 1e-12;
  std::vector<double> z{std::log(std::max(start.a_hat, tiny)), std::log(std::max(start.b_hat, tiny)),
                        std::log(start.alpha_hat), std::log(start.beta_hat)};
  num::SimplexResult best = num::minimize_simplex(neg, z, {0.2, 0.2, 0.2, 0.2}, 1e-13, 40000);
  // Restarting from the optimum shakes the simplex out of premature collapse.
  for (int k = 0; k < 3; ++k) {
    num::SimplexResult again = num::minimize_simplex(neg, best.x, {0.05, 0.05, 0.05, 0.05}, 1e-13, 40000);
    if (!(again.value < best.value - 1e-10)) break;
    best = again;
  }
  CensoredFullFit fit;
  fit.a_hat = std::exp(best.x[0]);
  fit.b_hat = std::exp(best.x[1]);
  fit.alpha_hat = std::exp(best.x[2]);
  fit.beta_hat = std::exp(best.x[3]);
  fit.r_hat = fit.alpha_hat / (fit.alpha_hat + fit.beta_hat);
  fit.log_likelihood = -best.value;
  fit.converged = best.converged;
  return fit;
}

}  // namespace glfr::censor
