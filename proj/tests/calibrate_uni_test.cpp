#include "bgm/calibrate_uni.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bgm/privacy_verifier.hpp"
#include "bgm/rng.hpp"
#include "test_util.hpp"

namespace {

const bgm::Interval kUnit(0.0, 1.0);

TEST(PrivacySpec, ValidatesInputs) {
  EXPECT_THROW(bgm::PrivacySpec(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(bgm::PrivacySpec(-1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(bgm::PrivacySpec(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(bgm::PrivacySpec(1.0, -0.5), std::invalid_argument);
}

TEST(EffectiveShift, CaseSplit) {
  EXPECT_DOUBLE_EQ(bgm::effective_shift(kUnit, bgm::PrivacySpec(1.0, 0.3)),
                   0.3);
  EXPECT_DOUBLE_EQ(bgm::effective_shift(kUnit, bgm::PrivacySpec(1.0, 0.9)),
                   0.5);
  // Boundary of the case split: both branches agree.
  EXPECT_DOUBLE_EQ(bgm::effective_shift(kUnit, bgm::PrivacySpec(1.0, 0.5)),
                   0.5);
  EXPECT_GT(bgm::effective_shift(kUnit, bgm::PrivacySpec(1.0, 1e-9)), 0.0);
}

TEST(DeltaC, ApproachesOneForHugeSigma) {
  const bgm::PrivacySpec spec(1.0, 0.5);
  const double dc = bgm::delta_c(1e9 * kUnit.width(), kUnit, spec);
  EXPECT_NEAR(dc, 1.0, 1e-9);
}

TEST(DeltaC, FrozenWorkedValue) {
  // [Phi(0.5)-Phi(-0.5)] / [Phi(1)-Phi(0)]
  EXPECT_NEAR(bgm::delta_c(1.0, kUnit, bgm::PrivacySpec(1.0, 0.5)),
              1.1218128503760062, 1e-14);
}

TEST(DeltaC, GreaterThanOneOverLogGrid) {
  const struct {
    bgm::Interval d;
    double dq;
  } cases[] = {{bgm::Interval(0.0, 1.0), 0.5},
               {bgm::Interval(-3.0, 4.0), 10.0},
               {bgm::Interval(2.0, 2.5), 0.01}};
  for (const auto& c : cases) {
    const bgm::PrivacySpec spec(1.0, c.dq);
    const double w = c.d.width();
    for (int k = 0; k <= 60; ++k) {
      const double sigma = 1e-3 * w * std::pow(10.0, 6.0 * k / 60.0);
      EXPECT_GT(bgm::delta_c(sigma, c.d, spec), 1.0)
          << "sigma = " << sigma << " width = " << w;
    }
  }
}

TEST(DeltaC, StrictlyDecreasingInSigma) {
  const bgm::PrivacySpec spec(1.0, 0.5);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 60; ++k) {
    const double sigma = 1e-3 * std::pow(10.0, 6.0 * k / 60.0);
    const double dc = bgm::delta_c(sigma, kUnit, spec);
    EXPECT_LT(dc, prev + 1e-12) << "sigma = " << sigma;
    prev = dc;
  }
}

TEST(DeltaC, MatchesQuadratureOracle) {
  for (double dq : {0.2, 0.5, 0.9, 3.0}) {
    const bgm::PrivacySpec spec(1.0, dq);
    for (double sigma : {0.1, 0.8, 2.0, 25.0}) {
      const double expected = std::exp(static_cast<double>(
          testutil::quad_log_delta_c(sigma, kUnit, dq)));
      EXPECT_NEAR(bgm::delta_c(sigma, kUnit, spec), expected,
                  1e-11 * expected);
    }
  }
}

TEST(NormalizerRatio, DecreasingInLocation) {
  // The ratio mass(s+c)/mass(s) must fall strictly as s sweeps the domain.
  const bgm::Interval d(-1.0, 2.0);
  const bgm::PrivacySpec spec(0.7, 0.8);
  const double sigma = bgm::sigma0(d, spec);
  const double c = bgm::effective_shift(d, spec);
  double prev = std::numeric_limits<double>::infinity();
  const std::vector<double> grid = testutil::linspace(d.a, d.b - c, 1000);
  for (double s : grid) {
    const double ratio = std::exp(bgm::log_interval_mass(s + c, sigma, d) -
                                  bgm::log_interval_mass(s, sigma, d));
    EXPECT_LT(ratio, prev + 1e-12) << "s = " << s;
    prev = ratio;
  }
}

TEST(Sigma0, ClosedFormValues) {
  EXPECT_NEAR(bgm::sigma0(kUnit, bgm::PrivacySpec(1.0, 0.5)),
              0.79056941504209483, 1e-15);
  EXPECT_NEAR(bgm::sigma0(bgm::Interval(0.0, 10.0), bgm::PrivacySpec(0.5, 1.0)),
              std::sqrt(21.0), 1e-13);
}

TEST(Sigma0, ScalesAsInverseSqrtEpsilon) {
  const bgm::Interval d(2.0, 9.0);
  const double base = bgm::sigma0(d, bgm::PrivacySpec(0.5, 1.2));
  const double quad = bgm::sigma0(d, bgm::PrivacySpec(2.0, 1.2));
  EXPECT_NEAR(quad, 0.5 * base, 1e-13 * base);
}

TEST(FResidual, NegativeAtSigma0) {
  for (double dq : {0.1, 0.5, 1.7}) {
    for (double eps : {0.1, 1.0, 3.0}) {
      const bgm::PrivacySpec spec(eps, dq);
      EXPECT_LT(bgm::f_residual(bgm::sigma0(kUnit, spec), kUnit, spec), 0.0);
    }
  }
}

TEST(FResidual, PositiveForLargeSigma) {
  const bgm::PrivacySpec spec(1.0, 0.5);
  EXPECT_GT(bgm::f_residual(100.0, kUnit, spec), 0.0);
}

TEST(FResidual, ThrowsBelowFeasibleRegion) {
  // ln DeltaC(0.05) on [0,1] with dq=0.5 is about 0.69, far above eps.
  const bgm::PrivacySpec spec(0.01, 0.5);
  EXPECT_THROW(bgm::f_residual(0.05, kUnit, spec),
               bgm::DenominatorNotPositiveError);
}

TEST(FResidual, StrictlyIncreasingAboveSigma0) {
  const bgm::Interval d(-2.0, 3.0);
  const bgm::PrivacySpec spec(0.8, 2.0);
  const double s0 = bgm::sigma0(d, spec);
  double prev = -std::numeric_limits<double>::infinity();
  for (double sigma : testutil::linspace(s0, 10.0 * s0, 1000)) {
    const double f = bgm::f_residual(sigma, d, spec);
    EXPECT_GT(f, prev - 1e-12) << "sigma = " << sigma;
    prev = f;
  }
}

TEST(Calibrate, MatchesIndependentFixedPointOracle) {
  const struct {
    bgm::Interval d;
    double eps, dq;
  } cases[] = {{bgm::Interval(0.0, 1.0), 1.0, 0.5},
               {bgm::Interval(0.0, 1.0), 0.1, 0.5},
               {bgm::Interval(-5.0, 3.0), 2.0, 1.0},
               {bgm::Interval(0.0, 1.0), 1.0, 5.0}};
  for (const auto& c : cases) {
    const bgm::PrivacySpec spec(c.eps, c.dq);
    const bgm::UniCalibration cal = bgm::calibrate(c.d, spec);
    const double oracle = testutil::fixed_point_sigma_star_sq(c.d, spec);
    EXPECT_NEAR(cal.sigma_star_sq, oracle, 1e-9 * std::max(1.0, oracle))
        << "eps=" << c.eps << " dq=" << c.dq;
  }
}

TEST(Calibrate, BracketAndResidualContracts) {
  const bgm::PrivacySpec spec(1.0, 0.5);
  const bgm::UniCalibration cal = bgm::calibrate(kUnit, spec);
  EXPECT_GT(cal.sigma_star_sq, cal.sigma0_sq);
  const double right =
      0.625 / (1.0 - bgm::log_delta_c(bgm::sigma0(kUnit, spec), kUnit, spec));
  EXPECT_LT(cal.sigma_star_sq, right);
  EXPECT_LE(std::fabs(cal.residual),
            bgm::residual_tolerance(cal.sigma_star_sq));
  EXPECT_GT(cal.iterations, 0);
  EXPECT_GE(cal.bracket_width, 0.0);
  // The calibrated point is feasible: eps - ln DeltaC(sigma*) > 0.
  EXPECT_GT(spec.epsilon -
                bgm::log_delta_c(std::sqrt(cal.sigma_star_sq), kUnit, spec),
            0.0);
  // f changes sign across sigma*.
  const double sigma_star = std::sqrt(cal.sigma_star_sq);
  EXPECT_LT(bgm::f_residual(sigma_star * (1.0 - 1e-6), kUnit, spec), 0.0);
  EXPECT_GT(bgm::f_residual(sigma_star * (1.0 + 1e-6), kUnit, spec), 0.0);
}

TEST(Calibrate, HugeEpsilonCollapsesToSigma0) {
  const bgm::PrivacySpec spec(1000.0, 0.5);
  const bgm::UniCalibration cal = bgm::calibrate(kUnit, spec);
  EXPECT_NEAR(cal.sigma_star_sq / cal.sigma0_sq, 1.0, 1e-3);
}

TEST(Calibrate, Deterministic) {
  const bgm::PrivacySpec spec(0.3, 1.1);
  const bgm::Interval d(-1.0, 6.0);
  const bgm::UniCalibration a = bgm::calibrate(d, spec);
  const bgm::UniCalibration b = bgm::calibrate(d, spec);
  EXPECT_EQ(a.sigma_star_sq, b.sigma_star_sq);
  EXPECT_EQ(a.residual, b.residual);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Calibrate, AcceptsSensitivityBeyondWidth) {
  // delta_q > b-a: the shift clamps to half the width, the variance formula
  // keeps the raw delta_q.
  const bgm::PrivacySpec spec(1.0, 5.0);
  const bgm::UniCalibration cal = bgm::calibrate(kUnit, spec);
  EXPECT_GT(cal.sigma_star_sq, cal.sigma0_sq);
  EXPECT_LE(std::fabs(cal.residual),
            bgm::residual_tolerance(cal.sigma_star_sq));
}

TEST(Release, StaysInDomainAndValidates) {
  const bgm::PrivacySpec spec(1.0, 0.5);
  const bgm::UniCalibration cal = bgm::calibrate(kUnit, spec);
  bgm::SplitMix64 rng(99);
  for (int i = 0; i < 5000; ++i) {
    const double x = bgm::release(0.9, kUnit, spec, cal, rng);
    EXPECT_TRUE(kUnit.contains(x));
  }
  EXPECT_THROW(bgm::release(1.5, kUnit, spec, cal, rng),
               bgm::QueryValueOutsideDomainError);
  // Calibration fingerprint mismatch.
  const bgm::PrivacySpec other(2.0, 0.5);
  EXPECT_THROW(bgm::release(0.5, kUnit, other, cal, rng),
               std::invalid_argument);
}

TEST(Release, EndpointDistributionsMirror) {
  const bgm::PrivacySpec spec(1.0, 0.5);
  const bgm::UniCalibration cal = bgm::calibrate(kUnit, spec);
  const double sigma = std::sqrt(cal.sigma_star_sq);
  const bgm::TruncatedNormal low(kUnit.a, sigma, kUnit);
  const bgm::TruncatedNormal high(kUnit.b, sigma, kUnit);
  for (double u : {0.05, 0.2, 0.5, 0.77, 0.95}) {
    EXPECT_NEAR(low.quantile(u) + high.quantile(1.0 - u), kUnit.a + kUnit.b,
                1e-9);
  }
}

TEST(Privacy, AuditPassesAtCalibratedSigma) {
  const struct {
    bgm::Interval d;
    double eps, dq;
  } cases[] = {{bgm::Interval(0.0, 1.0), 1.0, 0.5},
               {bgm::Interval(-2.0, 5.0), 0.5, 3.0},
               {bgm::Interval(0.0, 1.0), 3.0, 2.0}};
  for (const auto& c : cases) {
    const bgm::PrivacySpec spec(c.eps, c.dq);
    const bgm::UniCalibration cal = bgm::calibrate(c.d, spec);
    const bgm::AuditReport report =
        bgm::audit_uni(std::sqrt(cal.sigma_star_sq), c.d, spec, 200);
    EXPECT_TRUE(report.passed) << "eps=" << c.eps
                               << " sup=" << report.sup_log_ratio;
    EXPECT_LE(report.sup_log_ratio, c.eps + 1e-6);
  }
}

TEST(Privacy, RandomInstancesStayWithinBudget) {
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    const double a = -5.0 + 10.0 * unif(rng);
    const double w = 0.2 + 8.0 * unif(rng);
    const bgm::Interval d(a, a + w);
    const bgm::PrivacySpec spec(0.1 + 2.9 * unif(rng),
                                w * (0.05 + 1.5 * unif(rng)));
    const bgm::UniCalibration cal = bgm::calibrate(d, spec);
    const bgm::AuditReport report =
        bgm::audit_uni(std::sqrt(cal.sigma_star_sq), d, spec, 120);
    EXPECT_TRUE(report.passed)
        << "a=" << a << " w=" << w << " eps=" << spec.epsilon
        << " dq=" << spec.delta_q << " sup=" << report.sup_log_ratio;
  }
}

}  // namespace
