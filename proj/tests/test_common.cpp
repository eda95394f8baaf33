#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "glfr/common_scale.hpp"
#include "oracles.hpp"

namespace common = glfr::common;
namespace post = glfr::posterior;
using common::Theta;

namespace {

struct Pair {
  std::vector<double> x, y;
};

Pair draw(const Theta& th, std::size_t n, std::size_t m, glfr::Rng& rng) {
  return {glfr::sample({th[0], th[1], th[2]}, n, rng), glfr::sample({th[0], th[1], th[3]}, m, rng)};
}

Pair pinned(std::uint64_t seed = 11, std::size_t n = 50, std::size_t m = 50) {
  glfr::Rng rng(seed);
  return draw({0.5, 0.5, 1.0, 1.0}, n, m, rng);
}

// n * grad(R)' I^{-1} grad(R) with the information inverted by Gauss-Jordan.
double delta_variance(const common::InfoMatrix& info, const Theta& th, std::size_t n) {
  oracle::Mat4 m{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m[i][j] = info.info[i][j];
  const auto inv = oracle::invert(m);
  const double s = th[2] + th[3];
  const std::array<double, 4> g{0.0, 0.0, th[3] / (s * s), -th[2] / (s * s)};
  double v = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) v += g[i] * inv[i][j] * g[j];
  return static_cast<double>(n) * v;
}

}  // namespace

TEST(FitCommon, ScoreVanishesAtFit) {
  const auto d = pinned();
  const auto fit = common::fit_common(d.x, d.y);
  ASSERT_TRUE(fit.converged);
  EXPECT_LE(fit.score_norm, 1e-6);
  const Theta th = fit.theta();
  const Theta s = common::score(th, d.x, d.y);
  for (int i = 0; i < 4; ++i) EXPECT_LE(std::abs(s[i] * th[i]), 1e-6) << i;
  EXPECT_DOUBLE_EQ(fit.r_hat, fit.alpha_hat / (fit.alpha_hat + fit.beta_hat));
}

TEST(FitCommon, MatchesDirectMaximisation) {
  const auto d = pinned();
  const auto fit = common::fit_common(d.x, d.y);
  auto f = [&](const std::vector<double>& v) {
    return oracle::loglik4(std::exp(v[0]), std::exp(v[1]), std::exp(v[2]), std::exp(v[3]), d.x, d.y);
  };
  const auto best = oracle::pattern_maximize(f, {0.0, 0.0, 0.0, 0.0}, 0.25, 1e-10);
  const Theta th = fit.theta();
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::exp(best[i]), th[i], 1e-4) << i;
  EXPECT_GE(fit.log_likelihood, f(best) - 1e-9);
}

TEST(FitCommon, AnalyticScoreMatchesFiniteDifferences) {
  const auto d = pinned(12, 30, 40);
  for (const Theta th : {Theta{0.5, 0.5, 1.0, 1.0}, Theta{0.3, 1.2, 0.7, 2.0}, Theta{1.1, 0.05, 1.6, 0.4}}) {
    const Theta s = common::score(th, d.x, d.y);
    for (int i = 0; i < 4; ++i) {
      const double h = 1e-6 * th[i];
      Theta p = th, m = th;
      p[i] += h;
      m[i] -= h;
      const double fd = (common::log_likelihood(p, d.x, d.y) - common::log_likelihood(m, d.x, d.y)) / (2.0 * h);
      EXPECT_NEAR(s[i], fd, 1e-5 * std::max(1.0, std::abs(fd))) << i;
    }
  }
}

TEST(FitCommon, LogLikelihoodMatchesTranscription) {
  const auto d = pinned(13, 20, 25);
  const Theta th{0.4, 0.9, 1.3, 0.8};
  EXPECT_NEAR(common::log_likelihood(th, d.x, d.y), oracle::loglik4(0.4, 0.9, 1.3, 0.8, d.x, d.y), 1e-10);
}

TEST(FitCommon, InformationPositiveDefiniteAtFit) {
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    const auto d = pinned(seed);
    const auto fit = common::fit_common(d.x, d.y);
    if (fit.boundary != glfr::lik::Boundary::none) continue;
    const auto info = common::observed_info(fit.theta(), d.x, d.y);
    // Leading principal minors via the Cholesky pivots.
    auto a = info.info;
    for (int k = 0; k < 4; ++k) {
      ASSERT_GT(a[k][k], 0.0) << seed << " " << k;
      for (int i = k + 1; i < 4; ++i) {
        const double f = a[i][k] / a[k][k];
        for (int j = k; j < 4; ++j) a[i][j] -= f * a[k][j];
      }
    }
  }
}

TEST(FitCommon, RejectsTinySamples) {
  const std::vector<double> x{1.0}, y{1.0, 2.0};
  EXPECT_THROW(common::fit_common(x, y), glfr::Error);
}

TEST(ObservedInfo, ShapeCrossTermIsZero) {
  const auto d = pinned(14, 25, 30);
  const auto info = common::observed_info({0.5, 0.5, 2.0, 1.0}, d.x, d.y);
  EXPECT_EQ(info.info[2][3], 0.0);
  EXPECT_EQ(info.info[3][2], 0.0);
  EXPECT_DOUBLE_EQ(info.info[2][2], 6.25);
  EXPECT_DOUBLE_EQ(info.p, 25.0 / 30.0);
}

TEST(ObservedInfo, Symmetric) {
  const auto d = pinned(15);
  const auto info = common::observed_info({0.6, 0.4, 1.2, 0.9}, d.x, d.y);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(info.info[i][j], info.info[j][i]);
}

TEST(ObservedInfo, MatchesNegativeFiniteDifferenceHessian) {
  const auto d = pinned(16);
  const Theta th{0.5, 0.5, 1.0, 1.0};
  const auto info = common::observed_info(th, d.x, d.y);
  auto f = [&](const std::vector<double>& v) { return oracle::loglik4(v[0], v[1], v[2], v[3], d.x, d.y); };
  const auto h = oracle::hessian(f, {th[0], th[1], th[2], th[3]}, {1e-4, 1e-4, 1e-4, 1e-4});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double scale = std::sqrt(std::abs(info.info[i][i] * info.info[j][j]));
      EXPECT_NEAR(info.info[i][j], -h[i][j], 1e-4 * scale) << i << j;
    }
}

TEST(AsymptoticVariance, CofactorFormulaEqualsDeltaMethod) {
  for (std::uint64_t k = 0; k < 50; ++k) {
    glfr::Rng rng = glfr::substream(9001, k);
    const std::size_t n = 20 + 5 * (k % 7), m = 25 + 3 * (k % 5);
    const auto d = draw({0.5, 0.5, 1.0 + 0.1 * (k % 4), 0.8 + 0.2 * (k % 3)}, n, m, rng);
    const auto fit = common::fit_common(d.x, d.y);
    const auto info = common::observed_info(fit.theta(), d.x, d.y);
    const double ref = delta_variance(info, fit.theta(), n);
    EXPECT_NEAR(common::asymptotic_variance(info), ref, 1e-10 * ref) << k;
  }
}

TEST(AsymptoticVariance, SwapSymmetryForEqualSizes) {
  const auto d = pinned(17);
  const auto f = common::fit_common(d.x, d.y), g = common::fit_common(d.y, d.x);
  const double s1 = common::observed_info(f.theta(), d.x, d.y).sigma2;
  const double s2 = common::observed_info(g.theta(), d.y, d.x).sigma2;
  EXPECT_NEAR(s1, s2, 1e-8 * s1);
}

TEST(AsymptoticVariance, MatchesMonteCarloSpread) {
  const Theta truth{0.5, 0.5, 1.0, 1.0};
  const std::size_t n = 100;
  glfr::num::CompensatedSum sq, s2;
  int used = 0;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    glfr::Rng rng = glfr::substream(5150, i);
    const auto d = draw(truth, n, n, rng);
    try {
      const auto fit = common::fit_common(d.x, d.y);
      const double z = fit.r_hat - 0.5;
      sq.add(static_cast<double>(n) * z * z);
      s2.add(common::observed_info(fit.theta(), d.x, d.y).sigma2);
      ++used;
    } catch (const glfr::Error&) {
    }
  }
  ASSERT_GE(used, 1960);
  EXPECT_NEAR(sq.value() / used, s2.value() / used, 0.15 * s2.value() / used);
}

TEST(AsymptoticCi, WidthShrinksWithSampleSize) {
  double prev = 1.0;
  for (std::size_t n : {10u, 100u, 1000u, 10000u}) {
    const auto ci = common::asymptotic_ci(0.5, 0.2, n, 0.95);
    EXPECT_LT(ci.interval.width(), prev);
    prev = ci.interval.width();
  }
  const auto ci = common::asymptotic_ci(0.5, 0.2, 100, 0.95);
  EXPECT_NEAR(ci.interval.hi - 0.5, 1.959964 * std::sqrt(0.002), 1e-6);
}

TEST(AsymptoticCi, ClippingIsReported) {
  const auto ci = common::asymptotic_ci(0.98, 0.5, 20, 0.95);
  EXPECT_TRUE(ci.clipped);
  EXPECT_EQ(ci.interval.hi, 1.0);
  EXPECT_FALSE(common::asymptotic_ci(0.5, 0.1, 50, 0.95).clipped);
}

TEST(Bootstrap, PercentileIntervalsNest) {
  const auto d = pinned(18, 20, 20);
  glfr::Rng rng(4);
  const auto res = common::bootstrap_ci(d.x, d.y, std::nullopt, {200, 0.95, 1, 0.05}, rng);
  EXPECT_TRUE(std::is_sorted(res.replicates.begin(), res.replicates.end()));
  glfr::num::Interval prev = common::percentile_interval(res.replicates, 0.5);
  for (double level : {0.8, 0.9, 0.95, 0.99, 0.9999}) {
    const auto ci = common::percentile_interval(res.replicates, level);
    EXPECT_LE(ci.lo, prev.lo);
    EXPECT_GE(ci.hi, prev.hi);
    prev = ci;
  }
}

TEST(Bootstrap, IndependentOfThreadCount) {
  const auto d = pinned(19, 15, 15);
  glfr::Rng r1(5), r2(5);
  const auto a = common::bootstrap_ci(d.x, d.y, glfr::known::Scale{0.5, 0.5}, {150, 0.95, 1, 0.05}, r1);
  const auto b = common::bootstrap_ci(d.x, d.y, glfr::known::Scale{0.5, 0.5}, {150, 0.95, 3, 0.05}, r2);
  EXPECT_EQ(a.replicates, b.replicates);
  EXPECT_EQ(a.r_star_mean, b.r_star_mean);
}

TEST(Bootstrap, KnownScaleUsesShapeEstimate) {
  const auto d = pinned(20, 15, 15);
  glfr::Rng rng(6);
  const auto res = common::bootstrap_ci(d.x, d.y, glfr::known::Scale{0.5, 0.5}, {100, 0.9, 1, 0.05}, rng);
  EXPECT_DOUBLE_EQ(res.r_hat, glfr::known::mle_known(d.x, d.y, {0.5, 0.5}).r_hat);
  EXPECT_EQ(res.replicates.size(), 100u);
}

TEST(Bootstrap, NeedsHundredResamples) {
  const auto d = pinned(21, 10, 10);
  glfr::Rng rng(7);
  EXPECT_THROW(common::bootstrap_ci(d.x, d.y, std::nullopt, {99, 0.95, 1, 0.05}, rng), glfr::Error);
}

TEST(MapScale, NearMleUnderFlatPriors) {
  const auto d = pinned(22);
  const auto fit = common::fit_common(d.x, d.y);
  common::CommonPriors priors;
  priors.a = {1.0, 1e-6};
  priors.b = {1.0, 1e-6};
  const auto map = common::map_scale(d.x, d.y, priors);
  EXPECT_NEAR(map.a, fit.a_hat, 0.05 * fit.a_hat);
  EXPECT_NEAR(map.b, fit.b_hat, 0.05 * fit.b_hat);
  EXPECT_LE(map.gradient_norm, 1e-6);
}

TEST(MapScale, GridFindsNothingHigher) {
  const auto d = pinned(23);
  const auto priors = common::kNoninformativePriors;
  const auto map = common::map_scale(d.x, d.y, priors);
  ASSERT_EQ(map.boundary, glfr::lik::Boundary::none);
  const std::array<std::span<const double>, 2> samples{d.x, d.y};
  const std::array<glfr::GammaPrior, 2> shapes{priors.alpha, priors.beta};
  const glfr::lik::ScalePriors sp{priors.a, priors.b};
  const double best = glfr::lik::log_marginal_posterior(samples, shapes, sp, map.a, map.b);
  EXPECT_NEAR(best, map.log_posterior, 1e-9 * std::abs(best));
  for (int i = 0; i < 200; ++i)
    for (int j = 0; j < 200; ++j) {
      const double a = map.a * (0.5 + i / 199.0), b = map.b * (0.5 + j / 199.0);
      ASSERT_LE(glfr::lik::log_marginal_posterior(samples, shapes, sp, a, b), best + 1e-9) << a << " " << b;
    }
}

TEST(MapScale, GradientMatchesFiniteDifferences) {
  const auto d = pinned(24);
  const std::array<std::span<const double>, 2> samples{d.x, d.y};
  const std::array<glfr::GammaPrior, 2> shapes{glfr::GammaPrior{0.5, 2.0}, glfr::GammaPrior{3.0, 0.1}};
  const glfr::lik::ScalePriors sp{{2.0, 1.0}, {1.5, 0.5}};
  const double a = 0.7, b = 0.3, h = 1e-6;
  const auto g = glfr::lik::log_marginal_gradient(samples, shapes, sp, a, b);
  auto lp = [&](double u, double v) { return glfr::lik::log_marginal_posterior(samples, shapes, sp, u, v); };
  EXPECT_NEAR(g[0], (lp(a + h, b) - lp(a - h, b)) / (2 * h), 1e-5 * std::max(1.0, std::abs(g[0])));
  EXPECT_NEAR(g[1], (lp(a, b + h) - lp(a, b - h)) / (2 * h), 1e-5 * std::max(1.0, std::abs(g[1])));
}

TEST(PseudoPosterior, MatchesDefinition) {
  const auto d = pinned(25, 20, 30);
  const common::CommonPriors priors{{1, 1}, {1, 1}, {2.0, 3.0}, {0.5, 0.25}};
  const auto p = common::pseudo_posterior(d.x, d.y, 0.4, 0.6, priors);
  double u1 = 0.0, u2 = 0.0;
  for (double v : d.x) u1 += std::log(1.0 - std::exp(-(0.4 * v + 0.3 * v * v)));
  for (double v : d.y) u2 += std::log(1.0 - std::exp(-(0.4 * v + 0.3 * v * v)));
  EXPECT_DOUBLE_EQ(p.alpha.shape, 22.0);
  EXPECT_NEAR(p.alpha.rate, 3.0 - u1, 1e-10);
  EXPECT_DOUBLE_EQ(p.beta.shape, 30.5);
  EXPECT_NEAR(p.beta.rate, 0.25 - u2, 1e-10);
}

TEST(PseudoPosterior, DensityIntegratesToOne) {
  const auto d = pinned(26);
  const auto map = common::map_scale(d.x, d.y, common::kNoninformativePriors);
  const auto p = common::pseudo_posterior(d.x, d.y, map.a, map.b, common::kNoninformativePriors);
  const double mass = oracle::integrate(
      [&](double r) { return r <= 0.0 || r >= 1.0 ? 0.0 : post::r_density(r, p); }, 0.0, 1.0, 1e-12);
  EXPECT_NEAR(mass, 1.0, 1e-8);
}

TEST(PosteriorMode, EqualRatesGiveShapeRatio) {
  const glfr::ShapePosteriors p{{12.0, 4.0}, {7.0, 4.0}};
  EXPECT_NEAR(common::posterior_mode_r(p), 11.0 / 17.0, 1e-12);
}

TEST(PosteriorMode, ModeEquationChangesSign) {
  for (const glfr::ShapePosteriors& p : {glfr::ShapePosteriors{{12.0, 4.0}, {7.0, 40.0}},
                                         glfr::ShapePosteriors{{1.5, 100.0}, {60.0, 0.1}},
                                         glfr::ShapePosteriors{{31.0, 19.0}, {31.0, 24.0}}}) {
    EXPECT_GT(post::mode_equation(1e-12, p), 0.0);
    EXPECT_LT(post::mode_equation(1.0 - 1e-12, p), 0.0);
  }
}

TEST(PosteriorMode, MatchesGridArgmax) {
  const auto d = pinned(27);
  const auto map = common::map_scale(d.x, d.y, common::kNoninformativePriors);
  const auto p = common::pseudo_posterior(d.x, d.y, map.a, map.b, common::kNoninformativePriors);
  double best = 0.0, best_v = -1e300;
  for (int i = 1; i < 10000; ++i) {
    const double v = post::log_r_density(i * 1e-4, p);
    if (v > best_v) {
      best_v = v;
      best = i * 1e-4;
    }
  }
  EXPECT_NEAR(common::posterior_mode_r(p), best, 1e-4);
}

TEST(PosteriorDraws, AgreeWithQuadrature) {
  const auto d = pinned(28);
  const auto map = common::map_scale(d.x, d.y, common::kNoninformativePriors);
  const auto p = common::pseudo_posterior(d.x, d.y, map.a, map.b, common::kNoninformativePriors);
  glfr::Rng rng(29);
  auto draws = common::sample_posterior_r(p, 10000, rng).draws;
  glfr::num::CompensatedSum s, s2;
  for (double r : draws) {
    ASSERT_GT(r, 0.0);
    ASSERT_LT(r, 1.0);
    s.add(r);
    s2.add(r * r);
  }
  const double mean = s.value() / 1e4, sd = std::sqrt(s2.value() / 1e4 - mean * mean);
  const double qmean = oracle::integrate(
      [&](double r) { return r <= 0.0 || r >= 1.0 ? 0.0 : r * post::r_density(r, p); }, 0.0, 1.0, 1e-12);
  EXPECT_NEAR(mean, qmean, 3.0 * sd / 100.0);
  std::sort(draws.begin(), draws.end());
  const auto emp = common::percentile_interval(draws, 0.95);
  const auto ex = post::credible_interval(p, 0.95);
  EXPECT_NEAR(emp.lo, ex.lo, 0.01);
  EXPECT_NEAR(emp.hi, ex.hi, 0.01);
}

TEST(LindleyCommon, BracketVanishesGivesHalf) {
  EXPECT_NEAR(common::lindley_common(10, 10, -10.0, -10.0, {1.0, 1.0}, {2.0, 2.1}), 0.5, 1e-14);
}

TEST(LindleyCommon, CloseToQuadratureMean) {
  const auto d = pinned(30, 25, 25);
  glfr::Rng rng(31);
  const auto res = common::bayes_common(d.x, d.y, common::kNoninformativePriors, 2000, 0.95, rng);
  EXPECT_NEAR(res.r_lindley, res.r_mean, 0.01);
  EXPECT_LE(res.exact.lo, res.r_mode);
  EXPECT_GE(res.exact.hi, res.r_mode);
}
