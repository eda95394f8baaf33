#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "glfr/distribution.hpp"
#include "glfr/numerics.hpp"
#include "oracles.hpp"

using glfr::GlfrParams;

namespace {

std::vector<GlfrParams> parameter_grid() {
  std::vector<GlfrParams> out;
  for (double a : {0.0, 0.5, 1.0, 2.0})
    for (double b : {0.0, 0.4, 1.5, 2.0})
      for (double al : {0.5, 1.0, 1.5, 3.0})
        if (a > 0.0 || b > 0.0) out.push_back({a, b, al});
  return out;
}

// Integral of the transcribed density over (0, inf), written with x = s^2.
double oracle_mass(const GlfrParams& p) {
  return oracle::integrate_half_line(
      [&](double s) { return s <= 0.0 ? 0.0 : 2.0 * s * std::exp(oracle::glfr_log_pdf(p.a, p.b, p.alpha, s * s)); },
      1.0, 1e-11);
}

}  // namespace

TEST(GlfrPdf, ExponentialSpecialCaseAtZero) { EXPECT_DOUBLE_EQ(glfr::pdf({1.0, 0.0, 1.0}, 0.0), 1.0); }

TEST(GlfrPdf, NegativeArgumentHasZeroDensity) { EXPECT_EQ(glfr::pdf({1.0, 2.0, 1.5}, -0.5), 0.0); }

TEST(GlfrPdf, IntegratesToOne) {
  EXPECT_NEAR(oracle_mass({1.0, 2.0, 1.5}), 1.0, 1e-8);
  EXPECT_NEAR(glfr::num::quad([](double x) { return glfr::pdf({1.0, 2.0, 1.5}, x); }, 0.0, glfr::num::kInf), 1.0, 1e-8);
}

TEST(GlfrPdf, IntegratesToOneAcrossGrid) {
  for (const auto& p : parameter_grid()) {
    const double mass = glfr::num::quad([&](double x) { return glfr::pdf(p, x); }, 0.0, glfr::num::kInf);
    EXPECT_NEAR(mass, 1.0, 1e-8) << p.a << " " << p.b << " " << p.alpha;
    if (p.alpha >= 1.0) {
      EXPECT_NEAR(oracle_mass(p), 1.0, 1e-8) << p.a << " " << p.b << " " << p.alpha;
    }
  }
}

TEST(GlfrPdf, MatchesDerivativeOfCdf) {
  const GlfrParams p{1.0, 0.4, 1.5};
  const double h = 1e-5;
  const double fd = (glfr::cdf(p, 1.0 + h) - glfr::cdf(p, 1.0 - h)) / (2.0 * h);
  EXPECT_NEAR(glfr::pdf(p, 1.0), fd, 1e-6);
}

TEST(GlfrPdf, AgreesWithTranscribedFormula) {
  for (const auto& p : parameter_grid()) {
    for (double x : {0.01, 0.3, 1.0, 2.5}) {
      EXPECT_NEAR(glfr::log_pdf(p, x), oracle::glfr_log_pdf(p.a, p.b, p.alpha, x), 1e-10);
    }
  }
}

TEST(GlfrCdf, ZeroAtOrigin) {
  for (const auto& p : parameter_grid()) EXPECT_EQ(glfr::cdf(p, 0.0), 0.0);
}

TEST(GlfrCdf, MedianOfBaseExponent) {
  // x + x^2 = ln 2
  const double x = (-1.0 + std::sqrt(1.0 + 4.0 * std::log(2.0))) / 2.0;
  EXPECT_NEAR(glfr::cdf({1.0, 2.0, 1.0}, x), 0.5, 1e-15);
}

TEST(GlfrCdf, MatchesQuadratureOfPdf) {
  const GlfrParams p{1.0, 0.4, 1.5};
  const double ref = oracle::integrate([&](double x) { return glfr::pdf(p, x); }, 0.0, 1.0, 1e-13);
  EXPECT_NEAR(glfr::cdf(p, 1.0), ref, 1e-8);
}

TEST(GlfrCdf, NondecreasingAndBounded) {
  for (const auto& p : parameter_grid()) {
    double prev = 0.0;
    for (double x = 0.0; x <= 30.0; x += 0.01) {
      const double c = glfr::cdf(p, x);
      ASSERT_GE(c, prev);
      ASSERT_LE(c, 1.0);
      ASSERT_GE(c, 0.0);
      prev = c;
    }
  }
}

TEST(GlfrCdf, RejectsInvalidParameters) {
  EXPECT_THROW(glfr::cdf({0.0, 0.0, 1.0}, 1.0), glfr::Error);
  EXPECT_THROW(glfr::cdf({1.0, 0.0, 0.0}, 1.0), glfr::Error);
  EXPECT_THROW(glfr::cdf({-1.0, 1.0, 1.0}, 1.0), glfr::Error);
  EXPECT_THROW(glfr::pdf({1.0, -0.1, 1.0}, 1.0), glfr::Error);
  try {
    glfr::pdf({0.0, 0.0, 1.0}, 1.0);
  } catch (const glfr::Error& e) {
    EXPECT_EQ(e.code(), glfr::ErrorCode::invalid_params);
  }
}

TEST(GlfrQuantile, RoundTrip) {
  for (const auto& p : parameter_grid()) {
    for (double x : {0.1, 1.0, 5.0}) {
      const double u = glfr::cdf(p, x);
      if (u >= 1.0 - 1e-6) continue;  // information about x is lost once F(x) rounds towards 1
      EXPECT_NEAR(glfr::quantile(p, u), x, 1e-10 * x) << p.a << " " << p.b << " " << p.alpha;
    }
  }
}

TEST(GlfrQuantile, RoundTripOverWideRange) {
  const GlfrParams p{0.1, 0.01, 1.5};
  for (double x = 1e-6; x <= 20.0; x *= 1.3) EXPECT_NEAR(glfr::quantile(p, glfr::cdf(p, x)), x, 1e-10 * x);
}

TEST(GlfrQuantile, Exponential) { EXPECT_NEAR(glfr::quantile({1.0, 0.0, 1.0}, 1.0 - std::exp(-1.0)), 1.0, 1e-14); }

TEST(GlfrQuantile, AgreesWithBisection) {
  const GlfrParams p{1.0, 2.0, 1.5};
  const double ref = oracle::bisect([&](double x) { return oracle::glfr_cdf(1.0, 2.0, 1.5, x) - 0.9; }, 0.0, 10.0);
  EXPECT_NEAR(glfr::quantile(p, 0.9), ref, 1e-8);
}

TEST(GlfrQuantile, StableWhenQuadraticTermIsTiny) {
  const GlfrParams p{1.0, 1e-14, 1.0};
  EXPECT_NEAR(glfr::quantile(p, 0.5), std::log(2.0), 1e-12);
}

TEST(GlfrQuantile, RejectsOutOfRangeProbability) {
  for (double u : {0.0, 1.0, -0.2, 1.5}) {
    try {
      glfr::quantile({1.0, 2.0, 1.0}, u);
      FAIL() << "expected an error for u = " << u;
    } catch (const glfr::Error& e) {
      EXPECT_EQ(e.code(), glfr::ErrorCode::invalid_probability);
    }
  }
}

TEST(GlfrSample, DeterministicForSeed) {
  glfr::Rng r1(99), r2(99);
  EXPECT_EQ(glfr::sample({1.0, 2.0, 1.5}, 100, r1), glfr::sample({1.0, 2.0, 1.5}, 100, r2));
}

TEST(GlfrSample, RejectsEmptyRequest) {
  glfr::Rng r(1);
  EXPECT_THROW(glfr::sample({1.0, 2.0, 1.5}, 0, r), glfr::Error);
}

TEST(GlfrSample, PassesKsTest) {
  glfr::Rng rng(2024);
  const GlfrParams p{1.0, 2.0, 1.5};
  auto xs = glfr::sample(p, 5000, rng);
  std::sort(xs.begin(), xs.end());
  const auto ks = glfr::num::ks_test(xs, [&](double x) { return glfr::cdf(p, x); });
  EXPECT_GT(ks.p_value, 0.01);
}

// With 60 parameter sets at level 0.01 about 0.6 false failures are expected
// per fresh seed; the seed below is fixed so the outcome is reproducible.
TEST(GlfrSample, PassesKsTestAcrossGrid) {
  std::uint64_t k = 0;
  int rejections = 0;
  for (const auto& p : parameter_grid()) {
    glfr::Rng rng = glfr::substream(777, k++);
    auto xs = glfr::sample(p, 5000, rng);
    std::sort(xs.begin(), xs.end());
    const auto ks = glfr::num::ks_test(xs, [&](double x) { return glfr::cdf(p, x); });
    if (ks.p_value <= 0.01) ++rejections;
  }
  EXPECT_LE(rejections, 2);
}

TEST(GlfrSample, MeanMatchesIntegratedSurvival) {
  const GlfrParams p{1.0, 0.0, 2.0};
  glfr::Rng rng(5);
  const auto xs = glfr::sample(p, 5000, rng);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / 5000.0;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  const double se = std::sqrt(var / 4999.0 / 5000.0);
  const double ref = oracle::integrate_half_line([&](double x) { return 1.0 - oracle::glfr_cdf(1.0, 0.0, 2.0, x); });
  EXPECT_NEAR(ref, 1.5, 1e-8);  // generalized exponential with alpha = 2: mean = 1 + 1/2
  EXPECT_NEAR(mean, ref, 3.0 * se);
}

TEST(GlfrHazard, ConstantForExponential) {
  for (double x : {0.0, 0.5, 3.0, 10.0}) EXPECT_NEAR(glfr::hazard({0.7, 0.0, 1.0}, x), 0.7, 1e-12);
}

TEST(GlfrHazard, IncreasingForLinearFailureRate) {
  double prev = 0.0;
  for (double x = 0.0; x <= 5.0; x += 0.01) {
    const double h = glfr::hazard({1.0, 2.0, 1.0}, x);
    ASSERT_GE(h, prev - 1e-12);
    prev = h;
  }
}

TEST(GlfrHazard, BathtubForSmallShape) {
  // b > 0 and alpha < 1: the hazard falls from +inf at the origin to a single
  // interior minimum, then rises without bound.
  std::vector<double> h;
  for (double x = 0.001; x <= 4.0; x += 0.001) h.push_back(glfr::hazard({1.0, 2.0, 0.5}, x));
  const auto it = std::min_element(h.begin(), h.end());
  const auto k = static_cast<std::size_t>(it - h.begin());
  ASSERT_GT(k, 0u);
  ASSERT_LT(k, h.size() - 1);
  for (std::size_t i = 1; i <= k; ++i) ASSERT_LE(h[i], h[i - 1]);
  for (std::size_t i = k + 1; i < h.size(); ++i) ASSERT_GE(h[i], h[i - 1]);
}

TEST(GlfrHazard, SaturatedTailRaises) {
  try {
    glfr::hazard({1.0, 2.0, 1.0}, 100.0);
    FAIL();
  } catch (const glfr::Error& e) {
    EXPECT_EQ(e.code(), glfr::ErrorCode::saturated_cdf);
  }
}
