#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "seqmon/analytics.hpp"
#include "seqmon/error.hpp"
#include "seqmon/model.hpp"

using namespace seqmon;

namespace {

double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Inverse Gaussian with mean m = 1/μ and shape λ = a/σ² (normalised time).
double ig_cdf_oracle(double x, double mu, double sigma2, double a) {
  const double m = 1.0 / mu, lam = a / sigma2;
  const double r = std::sqrt(lam / x);
  return Phi(r * (x / m - 1.0)) + std::exp(2.0 * lam / m) * Phi(-r * (x / m + 1.0));
}

// Textbook single-barrier first-passage density of μt + σW_t through a > 0.
double single_barrier_density(double t, double mu, double sigma, double a) {
  return a / (sigma * std::sqrt(2.0 * M_PI * t * t * t)) * std::exp(-(a - mu * t) * (a - mu * t) / (2.0 * sigma * sigma * t));
}

// Probability of leaving (−L, U) through U for μt + σW_t.
double upper_exit_oracle(double mu, double sigma, double L, double U) {
  const double s2 = sigma * sigma;
  return (1.0 - std::exp(2.0 * mu * L / s2)) / (std::exp(-2.0 * mu * U / s2) - std::exp(2.0 * mu * L / s2));
}

}  // namespace

// =============================================================================
// Drift rates
// =============================================================================

TEST(Drift, IdenticalModelsHaveZeroDrift) {
  const auto mu = asymptotic_drift(preset_damping(100, 100, 10, 1, 1));
  EXPECT_NEAR(mu[0], 0.0, 1e-12);
  EXPECT_NEAR(mu[1], 0.0, 1e-12);
}

TEST(Drift, DampingClosedFormAgreesWithLyapunov) {
  for (auto [g0, g1] : {std::pair{100.0, 440.0}, std::pair{50.0, 80.0}, std::pair{300.0, 120.0}}) {
    const auto mu = asymptotic_drift(preset_damping(g0, g1, 10, 1, 1));
    const DampingClosedForms cf = damping_closed_forms(g0, g1, 10, 1, 1);
    EXPECT_NEAR(cf.mu[0], mu[0], 1e-6 * mu[0]) << g0 << " " << g1;
    EXPECT_NEAR(cf.mu[1], mu[1], 1e-6 * mu[1]) << g0 << " " << g1;
  }
}

TEST(Drift, DampingRatesAsymmetric) {
  const auto mu = asymptotic_drift(preset_damping(100, 440, 10, 1, 1));
  EXPECT_NEAR(mu[0], 5.73047, 1e-4);
  EXPECT_NEAR(mu[1], 3.95757, 1e-4);
  EXPECT_GT(std::abs(mu[0] - mu[1]) / mu[0], 0.01);
}

TEST(Drift, LabelSwapExchangesRates) {
  const HypothesisPair p = preset_frequency_scaled();
  const auto a = asymptotic_drift(p);
  const auto b = asymptotic_drift(p.swapped());
  EXPECT_NEAR(a[0], b[1], 1e-9 * a[0]);
  EXPECT_NEAR(a[1], b[0], 1e-9 * a[1]);
}

TEST(Drift, ScaledFrequencyRatesScaleByHundred) {
  const auto full = asymptotic_drift(preset_frequency_full());
  const auto scaled = asymptotic_drift(preset_frequency_scaled());
  EXPECT_NEAR(full[0], 100.0 * scaled[0], 1e-6 * full[0]);
  EXPECT_NEAR(full[1], 100.0 * scaled[1], 1e-6 * full[1]);
}

TEST(Drift, ForceRateIsQuadraticInGap) {
  const auto m1 = asymptotic_drift(preset_force(0, 40, 500, 10, 1e3, 0.1, 1));
  const auto m2 = asymptotic_drift(preset_force(0, 80, 500, 10, 1e3, 0.1, 1));
  EXPECT_NEAR(m2[1], 4.0 * m1[1], 1e-8 * m2[1]);
  // A pure mean shift gives a symmetric test.
  EXPECT_NEAR(m1[0], m1[1], 1e-9 * m1[1]);
}

TEST(Drift, DampingSigmaClosedForm) {
  const DampingClosedForms cf = damping_closed_forms(100, 440, 10, 1, 1);
  EXPECT_NEAR(cf.sigma[0], 1.10850, 5e-6);
  EXPECT_NEAR(cf.sigma[1], 1.35565, 5e-6);
}

// =============================================================================
// Stopping times
// =============================================================================

TEST(StoppingTime, SymmetricWaldFormula) {
  const double eps = 0.01, a = std::log((1 - eps) / eps);
  const auto t = mean_stopping_time({2.0, 4.0}, a, a);
  EXPECT_NEAR(t[0], a * (1 - 2 * eps) / 2.0, 1e-12);
  EXPECT_NEAR(t[1], a * (1 - 2 * eps) / 4.0, 1e-12);
}

TEST(StoppingTime, LargeThresholdLimit) {
  const auto t = mean_stopping_time({3.0, 3.0}, 40.0, 40.0);
  EXPECT_NEAR(t[1], 40.0 / 3.0, 1e-9);
}

TEST(StoppingTime, ZeroDrift) {
  try {
    mean_stopping_time({0.0, 1.0}, 1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroDrift);
  }
}

TEST(InverseGaussian, NormalisedWithUnitMean) {
  for (auto [mu, s2, a] : {std::tuple{1.0, 2.0, 4.6}, std::tuple{5.73, 11.46, 6.9}, std::tuple{0.5, 0.3, 1.0}}) {
    boost::math::quadrature::exp_sinh<double> q;
    const double norm = q.integrate([&](double t) { return inverse_gaussian_pdf(t, mu, s2, a); });
    const double mean = q.integrate([&](double t) { return t * inverse_gaussian_pdf(t, mu, s2, a); });
    EXPECT_NEAR(norm, 1.0, 1e-6);
    EXPECT_NEAR(mean, 1.0 / mu, 1e-6 / mu);
  }
}

TEST(InverseGaussian, CdfMatchesClosedForm) {
  const double mu = 2.0, s2 = 4.0, a = 4.6;
  for (double x : {0.05, 0.2, 0.4, 0.5, 0.8, 1.5, 3.0}) {
    EXPECT_NEAR(inverse_gaussian_cdf(x, mu, s2, a), ig_cdf_oracle(x, mu, s2, a), 1e-9) << x;
  }
  EXPECT_EQ(inverse_gaussian_cdf(0.0, mu, s2, a), 0.0);
}

TEST(InverseGaussian, ConcentratesForSmallNoise) {
  const double mu = 2.0, a = 1.0, s2 = 1e-6;
  EXPECT_LT(inverse_gaussian_cdf(0.99 / mu, mu, s2, a), 1e-6);
  EXPECT_GT(inverse_gaussian_cdf(1.01 / mu, mu, s2, a), 1.0 - 1e-6);
}

TEST(InverseGaussian, MatchesTimeDensity) {
  // p(τ/a)/a is the barrier-a first-passage density.
  const double mu = 3.0, s2 = 6.0, a = 2.5;
  for (double tau : {0.1, 0.5, 0.83, 2.0}) {
    EXPECT_NEAR(inverse_gaussian_pdf(tau / a, mu, s2, a) / a, single_barrier_density(tau, mu, std::sqrt(s2), a),
                1e-12 * single_barrier_density(tau, mu, std::sqrt(s2), a));
  }
}

// =============================================================================
// Two-barrier series
// =============================================================================

TEST(FirstPassage, FarLowerBarrierGivesSingleBarrier) {
  const double mu = 2.0, sigma = 2.0, U = 3.0, L = 50.0 * U;
  for (double t : {0.05, 0.3, 1.0, 1.5, 4.0}) {
    const FirstPassageDensity f = first_passage_series(t, mu, sigma, L, U);
    const double expect = single_barrier_density(t, mu, sigma, U);
    EXPECT_NEAR(f.upper, expect, 1e-8 * expect) << t;
    EXPECT_LT(f.lower, 1e-12 * expect);
  }
}

TEST(FirstPassage, TotalIntegratesToOne) {
  const double mu = 1.5, sigma = std::sqrt(3.0), L = 2.0, U = 3.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double lo = GK::integrate([&](double t) { return first_passage_series(t, mu, sigma, L, U).lower; }, 0.0,
                                  std::numeric_limits<double>::infinity(), 15, 1e-12);
  const double up = GK::integrate([&](double t) { return first_passage_series(t, mu, sigma, L, U).upper; }, 0.0,
                                  std::numeric_limits<double>::infinity(), 15, 1e-12);
  EXPECT_NEAR(lo + up, 1.0, 1e-4);
  EXPECT_NEAR(up, upper_exit_oracle(mu, sigma, L, U), 1e-4);
}

TEST(FirstPassage, MirrorSymmetry) {
  const double sigma = 1.3;
  for (double t : {0.1, 0.7, 2.0}) {
    const FirstPassageDensity f = first_passage_series(t, 0.8, sigma, 1.0, 2.5);
    const FirstPassageDensity g = first_passage_series(t, -0.8, sigma, 2.5, 1.0);
    EXPECT_NEAR(f.lower, g.upper, 1e-12 * std::max(1e-300, f.lower));
    EXPECT_NEAR(f.upper, g.lower, 1e-12 * std::max(1e-300, f.upper));
  }
}

TEST(FirstPassage, DriftlessSymmetricSplit) {
  const FirstPassageDensity f = first_passage_series(0.4, 0.0, 1.0, 1.0, 1.0);
  EXPECT_NEAR(f.lower, f.upper, 1e-14);
}

// =============================================================================
// IID Gaussian
// =============================================================================

TEST(Iid, FixedErrorsAtZeroThreshold) {
  const auto [a0, a1] = iid_fixed_errors(10.0, 0.0, 0.5);
  EXPECT_DOUBLE_EQ(a0, a1);
  EXPECT_NEAR(a0, 0.5 * std::erfc(std::sqrt(0.5 * 10.0) / 2.0), 1e-15);
}

// With the threshold placed at a = −ξt, α_k decays at R_k. The slope between
// two horizons cancels the logarithmic prefactor.
TEST(Iid, FixedErrorsDecayAtAsymptoticRate) {
  const double mu = 0.5, xi = 0.1, t1 = 1000.0, t2 = 2000.0;
  const auto [e0a, e1a] = iid_fixed_errors(t1, -xi * t1, mu);
  const auto [e0b, e1b] = iid_fixed_errors(t2, -xi * t2, mu);
  const auto [r0, r1] = iid_error_rates(mu, xi);
  EXPECT_NEAR((std::log(e0a) - std::log(e0b)) / (t2 - t1), r0, 0.01 * r0);
  EXPECT_NEAR((std::log(e1a) - std::log(e1b)) / (t2 - t1), r1, 0.01 * r1);
  EXPECT_NEAR(iid_error_rates(mu, 0.0).first, mu / 4.0, 1e-15);
}

TEST(Iid, Summary) {
  const IidSummary s = iid_summary({0.0, 1.0, 1.0}, 1e-3);
  EXPECT_DOUBLE_EQ(s.mu, 0.5);
  EXPECT_DOUBLE_EQ(s.nu, 1.0);
  EXPECT_DOUBLE_EQ(s.r_sym, 0.125);
  EXPECT_DOUBLE_EQ(s.r_stein, 0.5);
  EXPECT_NEAR(s.ratio, 4.0, 1e-14);
  EXPECT_NEAR(s.mean_tau, -std::log(1e-3) / 0.5, 1e-12);
  EXPECT_NEAR(0.5 * std::erfc(std::sqrt(s.mu * s.t_det_exact) / 2.0), 1e-3, 1e-12);
}

TEST(Iid, SummaryRejectsEqualMeans) { EXPECT_THROW(iid_summary({1.0, 1.0, 1.0}, 0.01), Error); }

// =============================================================================
// Consistency and variance rate
// =============================================================================

TEST(Consistency, Cases) {
  EXPECT_TRUE(gaussian_llr_consistency(1.0, 1.0, 2.0, 2.0, 1e-6).consistent);
  EXPECT_FALSE(gaussian_llr_consistency(1.0, 2.0, 2.0, 4.0, 1e-6).consistent);
  EXPECT_FALSE(gaussian_llr_consistency(1.0, 1.0, 1.0, 2.0, 1e-6).consistent);
  EXPECT_TRUE(gaussian_llr_consistency(1.0, 1.0 + 1e-8, 2.0, 2.0, 1e-6).consistent);
}

TEST(VarianceRate, IdenticalModelsVanish) {
  const VarianceRate v = variance_rate(preset_damping(100, 100, 10, 1, 1), 1, 0.2, 64, 3, 1e-4);
  EXPECT_EQ(v.nu, 0.0);
}

// A deterministic mean shift makes ℓ an exact drifted Brownian motion.
TEST(VarianceRate, MeanShiftIsGaussian) {
  const HypothesisPair p = preset_force(0, 4000, 500, 10, 1e3, 0.1, 1);
  const auto mu = asymptotic_drift(p);
  const VarianceRate v = variance_rate(p, 1, 0.3, 512, 7, 1e-5);
  EXPECT_NEAR(v.nu, 2.0 * mu[1], std::max(3.0 * v.std_error, 0.02 * mu[1]));
}

TEST(VarianceRate, StableUnderLongerFit) {
  const HypothesisPair p = preset_damping(100, 440, 10, 1, 1);
  const VarianceRate a = variance_rate(p, 1, 1.0, 640, 8, 1e-4);
  const VarianceRate b = variance_rate(p, 1, 2.0, 640, 9, 1e-4);
  EXPECT_LT(std::abs(a.nu - b.nu), 2.0 * std::hypot(a.std_error, b.std_error) + 0.02 * a.nu);
}
