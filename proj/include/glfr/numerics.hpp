#pragma once

// Numerical support shared by the estimators: special functions, quantiles,
// root finding, a small Newton solver, adaptive quadrature and the
// Kolmogorov-Smirnov test.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "glfr/error.hpp"

namespace glfr::num {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Two-sided interval estimate with its nominal level.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;

  bool contains(double v) const { return lo <= v && v <= hi; }
  double width() const { return hi - lo; }
};

inline Interval make_interval(double lo, double hi, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::invalid_probability, "interval level must lie in (0,1)");
  }
  if (!(lo <= hi)) throw Error(ErrorCode::domain, "interval lower bound exceeds upper bound");
  return {lo, hi, level};
}

struct RootConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-14;
  int max_iter = 200;
};

inline void validate(const RootConfig& cfg) {
  if (!(cfg.abs_tol > 0.0) || !(cfg.rel_tol > 0.0) || cfg.max_iter < 1) {
    throw Error(ErrorCode::invalid_config, "root tolerances must be positive and max_iter >= 1");
  }
}

// ---------------------------------------------------------------------------
// Special functions

inline double log_gamma(double x) {
  if (!(x > 0.0)) throw Error(ErrorCode::domain, "log_gamma requires x > 0");
  return std::lgamma(x);
}

inline double log_beta(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

/// ln(1 - exp(-t)) for t > 0 without cancellation at either end.
inline double log1mexp(double t) {
  if (t <= 0.0) return -kInf;
  return t > std::numbers::ln2 ? std::log1p(-std::exp(-t)) : std::log(-std::expm1(-t));
}

/// Regularized incomplete beta I_x(a, b).
inline double beta_cdf(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

/// p-quantile of Beta(a, b). Newton iterations on I_x(a,b) - p from the mean,
/// falling back to bisection whenever a step leaves the current bracket.
inline double beta_quantile(double p, double a, double b, const RootConfig& cfg = {}) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::invalid_probability, "beta_quantile needs p in (0,1)");
  if (!(a > 0.0 && b > 0.0)) throw Error(ErrorCode::domain, "beta_quantile needs positive shapes");
  double lo = 0.0;
  double hi = 1.0;
  double x = a / (a + b);
  for (int it = 0; it < std::max(cfg.max_iter, 400); ++it) {
    const double f = boost::math::ibeta(a, b, x) - p;
    if (f == 0.0) return x;
    if (f < 0.0) lo = x; else hi = x;
    const double d = boost::math::ibeta_derivative(a, b, x);
    double next = (d > 0.0 && std::isfinite(d)) ? x - f / d : kNaN;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(next, 1e-300) ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(lo, 1e-300)) {
      return next;
    }
    x = next;
  }
  throw Error(ErrorCode::max_iter, "beta_quantile did not converge");
}

inline double f_cdf(double x, double d1, double d2) {
  if (x <= 0.0) return 0.0;
  return beta_cdf(d1 * x / (d1 * x + d2), 0.5 * d1, 0.5 * d2);
}

/// p-quantile of the F(d1, d2) distribution through the inverse incomplete beta.
inline double f_quantile(double p, double d1, double d2, const RootConfig& cfg = {}) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::invalid_probability, "f_quantile needs p in (0,1)");
  if (!(d1 > 0.0 && d2 > 0.0)) throw Error(ErrorCode::domain, "f_quantile needs positive degrees of freedom");
  // X = (d2/d1) W/(1-W) with W ~ Beta(d1/2, d2/2); in the upper half invert the
  // complementary variable 1-W ~ Beta(d2/2, d1/2) so 1-W keeps full precision.
  if (p <= 0.5) {
    const double w = beta_quantile(p, 0.5 * d1, 0.5 * d2, cfg);
    return (d2 / d1) * w / (1.0 - w);
  }
  const double v = beta_quantile(1.0 - p, 0.5 * d2, 0.5 * d1, cfg);
  return (d2 / d1) * (1.0 - v) / v;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::invalid_probability, "normal_quantile needs p in (0,1)");
  if (p == 0.5) return 0.0;
  if (p > 0.5) return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * (1.0 - p));
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

// ---------------------------------------------------------------------------
// Root finding

/// Brent's method: inverse quadratic / secant steps with bisection fallback,
/// always keeping a sign-changing bracket.
template <class F>
double find_root(F&& f, double lo, double hi, const RootConfig& cfg = {}) {
  validate(cfg);
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (std::isnan(fa) || std::isnan(fb)) throw Error(ErrorCode::domain, "find_root: NaN at bracket end");
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw Error(ErrorCode::no_sign_change, "find_root: f(lo) and f(hi) share a sign");
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < cfg.max_iter; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a; fc = fa; d = b - a; e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * cfg.rel_tol * std::abs(b);
    const double half = 0.5 * (c - b);
    if (std::abs(fb) <= cfg.abs_tol || std::abs(half) <= tol) return b;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * half * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * half * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q; else p = -p;
      if (2.0 * p < std::min(3.0 * half * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = half;
        e = d;
      }
    } else {
      d = half;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (half > 0.0 ? tol : -tol);
    fb = f(b);
    if (std::isnan(fb)) throw Error(ErrorCode::domain, "find_root: NaN inside bracket");
  }
  throw Error(ErrorCode::max_iter, "find_root exceeded max_iter");
}

/// Expands [lo, hi] geometrically around a positive guess until f changes sign.
template <class F>
std::pair<double, double> bracket_positive(F&& f, double guess, double factor = 2.0, int max_steps = 200) {
  double lo = guess / factor, hi = guess * factor;
  double flo = f(lo), fhi = f(hi);
  for (int i = 0; i < max_steps; ++i) {
    if ((flo > 0.0) != (fhi > 0.0)) return {lo, hi};
    if (std::abs(flo) < std::abs(fhi)) {
      lo /= factor;
      flo = f(lo);
    } else {
      hi *= factor;
      fhi = f(hi);
    }
  }
  throw Error(ErrorCode::no_sign_change, "could not bracket a root");
}

// ---------------------------------------------------------------------------
// Two-dimensional Newton

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

struct Solution2 {
  Vec2 x{};
  Vec2 residual{};
  int iterations = 0;
};

inline double max_abs(const Vec2& v) { return std::max(std::abs(v[0]), std::abs(v[1])); }

template <class G>
Mat2 fd_jacobian(G& g, const Vec2& x) {
  Mat2 j{};
  for (int k = 0; k < 2; ++k) {
    const double h = std::max(1e-6, 1e-6 * std::abs(x[k]));
    Vec2 xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const Vec2 gp = g(xp), gm = g(xm);
    j[0][k] = (gp[0] - gm[0]) / (2.0 * h);
    j[1][k] = (gp[1] - gm[1]) / (2.0 * h);
  }
  return j;
}

/// Damped Newton for g(x) = 0 in two unknowns. The Jacobian comes from
/// central differences; a step is accepted only if it reduces the residual
/// norm, halving it up to 40 times. Points where g is not finite count as
/// rejected steps, which lets callers encode their domain through NaN.
template <class G>
Solution2 solve_system2(G&& g, Vec2 start, const RootConfig& cfg = {}) {
  validate(cfg);
  Vec2 x = start;
  Vec2 r = g(x);
  if (!std::isfinite(r[0]) || !std::isfinite(r[1])) throw Error(ErrorCode::domain, "solve_system2: start outside domain");
  auto norm = [](const Vec2& v) { return std::hypot(v[0], v[1]); };
  for (int it = 0; it < cfg.max_iter; ++it) {
    if (max_abs(r) <= cfg.abs_tol) return {x, r, it};
    const Mat2 j = fd_jacobian(g, x);
    const double det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    const double scale = std::abs(j[0][0] * j[1][1]) + std::abs(j[0][1] * j[1][0]);
    if (!std::isfinite(det) || std::abs(det) <= 1e-14 * scale || scale == 0.0) {
      throw Error(ErrorCode::singular_jacobian, "solve_system2: singular Jacobian");
    }
    const Vec2 step{-(j[1][1] * r[0] - j[0][1] * r[1]) / det, -(-j[1][0] * r[0] + j[0][0] * r[1]) / det};
    const double r0 = norm(r);
    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h < 40; ++h, lambda *= 0.5) {
      const Vec2 xn{x[0] + lambda * step[0], x[1] + lambda * step[1]};
      const Vec2 rn = g(xn);
      if (std::isfinite(rn[0]) && std::isfinite(rn[1]) && norm(rn) < r0) {
        x = xn;
        r = rn;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw Error(ErrorCode::non_convergence, "solve_system2: line search failed");
  }
  if (max_abs(r) <= cfg.abs_tol) return {x, r, cfg.max_iter};
  throw Error(ErrorCode::max_iter, "solve_system2 exceeded max_iter");
}

// ---------------------------------------------------------------------------
// Nelder-Mead simplex minimisation (used where no closed-form profile exists)

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

template <class F>
SimplexResult minimize_simplex(F&& f, std::vector<double> start, std::vector<double> step, double ftol = 1e-12,
                               int max_iter = 20000) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> pts(n + 1, start);
  std::vector<double> val(n + 1);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
  for (std::size_t i = 0; i <= n; ++i) val[i] = f(pts[i]);
  auto eval = [&](const std::vector<double>& p) {
    const double v = f(p);
    return std::isfinite(v) ? v : kInf;
  };
  int it = 0;
  for (; it < max_iter; ++it) {
    std::vector<std::size_t> idx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    const std::size_t best = idx.front(), worst = idx.back(), second = idx[n - 1];
    if (std::abs(val[worst] - val[best]) <= ftol * (std::abs(val[best]) + ftol)) {
      double spread = 0.0;
      for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t k = 0; k < n; ++k) spread = std::max(spread, std::abs(pts[i][k] - pts[best][k]));
      if (spread <= 1e-10) return {pts[best], val[best], it, true};
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);
    }
    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (pts[worst][k] - centroid[k]);
      return p;
    };
    auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < val[best]) {
      auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) { pts[worst] = xe; val[worst] = fe; }
      else { pts[worst] = xr; val[worst] = fr; }
    } else if (fr < val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
    } else {
      auto xc = fr < val[worst] ? along(-0.5) : along(0.5);
      const double fc = eval(xc);
      if (fc < std::min(fr, val[worst])) {
        pts[worst] = xc;
        val[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
          val[i] = eval(pts[i]);
        }
      }
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(val.begin(), val.end()) - val.begin());
  return {pts[best], val[best], it, false};
}

// ---------------------------------------------------------------------------
// Quadrature

struct QuadConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  int max_intervals = 4000;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo, hi, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod15(F& f, double lo, double hi) {
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  const double fc = f(c);
  double kron = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kKronrodNodes[j];
    const double s = f(c - dx) + f(c + dx);
    kron += kKronrodWeights[j] * s;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * s;
  }
  return {lo, hi, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace detail

namespace detail {

template <class G>
double quad_finite(G& g, double lo, double hi, const QuadConfig& cfg) {
  std::priority_queue<Panel> panels;
  panels.push(gauss_kronrod15(g, lo, hi));
  double total = panels.top().value, err = panels.top().error;
  int count = 1;
  while (err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
    if (count >= cfg.max_intervals) throw Error(ErrorCode::non_convergence, "quad: subdivision limit reached");
    const Panel p = panels.top();
    panels.pop();
    const double mid = 0.5 * (p.lo + p.hi);
    if (!(mid > p.lo && mid < p.hi)) throw Error(ErrorCode::non_convergence, "quad: panel below resolution");
    const Panel left = gauss_kronrod15(g, p.lo, mid);
    const Panel right = gauss_kronrod15(g, mid, p.hi);
    total += left.value + right.value - p.value;
    err += left.error + right.error - p.error;
    panels.push(left);
    panels.push(right);
    ++count;
    if (!std::isfinite(total)) throw Error(ErrorCode::non_convergence, "quad: non-finite integrand");
  }
  // Re-sum to shed accumulated rounding from the running updates.
  double sum = 0.0;
  while (!panels.empty()) {
    sum += panels.top().value;
    panels.pop();
  }
  return sum;
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (7/15) quadrature on [lo, hi]; hi may be +infinity,
/// in which case the range is mapped onto [0,1) by x = lo + t/(1-t).
template <class F>
double quad(F&& f, double lo, double hi, const QuadConfig& cfg = {}) {
  if (hi == lo) return 0.0;
  const double sign = hi < lo ? -1.0 : 1.0;
  if (hi < lo) std::swap(lo, hi);
  if (std::isinf(hi)) {
    auto g = [&](double t) {
      if (t >= 1.0) return 0.0;
      const double u = 1.0 - t;
      const double v = f(lo + t / u);
      return v == 0.0 ? 0.0 : v / (u * u);
    };
    return sign * detail::quad_finite(g, 0.0, 1.0, cfg);
  }
  auto g = [&](double x) { return f(x); };
  return sign * detail::quad_finite(g, lo, hi, cfg);
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}.
inline double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) <= 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

template <class Cdf>
KsResult ks_test(std::span<const double> sorted, Cdf&& cdf) {
  const std::size_t n = sorted.size();
  if (n == 0) throw Error(ErrorCode::domain, "ks_test needs at least one observation");
  if (!std::is_sorted(sorted.begin(), sorted.end())) throw Error(ErrorCode::unsorted_input, "ks_test sample must be sorted");
  const double nd = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / nd - f, f - static_cast<double>(i) / nd});
  }
  const double rn = std::sqrt(nd);
  return {d, kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d)};
}

// ---------------------------------------------------------------------------
// Small helpers

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) comp_ += (sum_ - t) + v;
    else comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Inverse empirical CDF: the smallest order statistic x_(k) with k/n >= q.
inline double empirical_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::domain, "empirical_quantile of empty sample");
  const double n = static_cast<double>(sorted.size());
  auto k = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  return sorted[k - 1];
}

}  // namespace glfr::num
