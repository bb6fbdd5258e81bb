#include <gtest/gtest.h>

#include <cmath>

#include "oracles/oracles.hpp"
#include "supermarket/error.hpp"
#include "supermarket/fixed_point.hpp"
#include "supermarket/metrics.hpp"

using namespace supermarket;

TEST(ResidualMean, Examples) {
  EXPECT_NEAR(residual_mean(ServiceDistribution::exponential(2.5)), 0.4, 1e-15);
  const auto forms = residual_mean_forms(ServiceDistribution::erlang(2, 1.0));
  EXPECT_NEAR(forms.moment_form, 1.5, 1e-14);
  EXPECT_NEAR(forms.double_integral, 1.5, 1e-8);
}

TEST(ResidualMean, ApproachesHalfMeanForLongErlang) {
  double prev = 1.0;
  for (int m : {1, 4, 16, 64}) {
    const double r = residual_mean(ServiceDistribution::erlang(m, m));
    EXPECT_NEAR(r, 0.5 * (1.0 + 1.0 / m), 1e-12);
    EXPECT_LT(r, prev + 1e-15);
    prev = r;
  }
}

TEST(ResidualMean, FormsAgreeOnGrid) {
  const std::vector<ServiceDistribution> dists = {
      ServiceDistribution::exponential(0.5), ServiceDistribution::erlang(3, 2.0),
      ServiceDistribution::weibull(0.5, 5.0), ServiceDistribution::weibull(2.0, 1.0),
      ServiceDistribution::power_law(1.0, 3.5),
      ServiceDistribution::phase_type(PhRepresentation::erlang(2, 1.0))};
  for (const auto& dist : dists) {
    const auto f = residual_mean_forms(dist);
    EXPECT_NEAR(f.double_integral, f.moment_form, 1e-6 * f.moment_form) << dist.describe();
    EXPECT_GE(f.moment_form, 0.5 * mean(dist));
  }
}

TEST(ResidualMean, InfiniteForHeavyPowerLaw) {
  try {
    residual_mean(ServiceDistribution::power_law(1.0, 2.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfiniteMoment);
  }
}

TEST(Sojourn, SingleChoiceIsMM1) {
  for (double lambda : {0.2, 0.5, 0.9}) {
    const auto fp = FixedPointFamily::from_distribution(lambda, 1, ServiceDistribution::exponential(1.0));
    EXPECT_NEAR(expected_sojourn(fp).e_td, 1.0 / (1.0 - lambda), 1e-13);
  }
}

TEST(Sojourn, ExponentialPowerOfTwo) {
  const auto fp = FixedPointFamily::from_distribution(1.0, 2, ServiceDistribution::exponential(2.0));
  const auto r = expected_sojourn(fp);
  EXPECT_NEAR(r.e_td, oracle::kSojournMu2Lambda1, 1e-12);
  EXPECT_DOUBLE_EQ(r.e_x, 0.5);
  EXPECT_NEAR(r.e_xr, 0.5, 1e-15);
  EXPECT_GE(r.e_td, r.e_x);
}

TEST(Sojourn, ExponentialReducesToMeanTimesTailSum) {
  const double mu = 1.0, lambda = 0.7;
  const int d = 3;
  const auto fp = FixedPointFamily::with_theta(lambda, d, ServiceDistribution::exponential(mu), 1.0);
  double sum = 1.0, a = 0.0, term = 1.0;
  for (int k = 1; k < 12; ++k) {
    a += term;
    term *= d;
    sum += std::pow(lambda, d * a);
  }
  EXPECT_NEAR(expected_sojourn(fp).e_td, sum / mu, 1e-12);
}

TEST(Sojourn, RemainderBoundCoversDroppedMass) {
  const auto fp = FixedPointFamily::with_theta(0.99, 1, ServiceDistribution::exponential(1.0), 1.0);
  const auto r = expected_sojourn(fp);
  EXPECT_NEAR(r.e_td, 100.0, 1e-9);
  const auto fp2 = FixedPointFamily::from_distribution(0.9, 2, ServiceDistribution::erlang(2, 2.0));
  const auto r2 = expected_sojourn(fp2);
  double extra = 0.0;
  const double th = fp2.theta(), rho = fp2.rho();
  for (int k = r2.series_terms_used + 1; k <= r2.series_terms_used + 10; ++k) {
    const double a = theta_exponent(2, k + 1);  // (d^k - 1)/(d - 1)
    extra += std::pow(th, a) * std::pow(rho, 2.0 * a);
  }
  EXPECT_GE(r2.truncation_error_bound, extra * r2.e_x);
}

TEST(Sojourn, FinalSumFormIsReportedSeparately) {
  const auto fp = FixedPointFamily::from_distribution(0.6, 2, ServiceDistribution::erlang(2, 2.0));
  const auto r = expected_sojourn(fp);
  EXPECT_TRUE(std::isfinite(r.e_td_final_sum));
  EXPECT_EQ(r.forms_disagree, std::abs(r.e_td - r.e_td_final_sum) > 1e-12);
}

TEST(Sojourn, NonIncreasingInChoices) {
  for (const auto& dist : {ServiceDistribution::exponential(1.0), ServiceDistribution::erlang(2, 2.0),
                           ServiceDistribution::weibull(0.5, 2.0)}) {
    const auto rate = service_rate(dist);
    double prev = INFINITY;
    for (int d = 1; d <= 4; ++d) {
      const auto fp = FixedPointFamily::with_theta(0.8 * rate, d, dist, 1.0);
      const double e = expected_sojourn(fp).e_td;
      EXPECT_LE(e, prev + 1e-12) << dist.describe() << " d=" << d;
      prev = e;
    }
  }
}

TEST(Sojourn, UnstableRejected) {
  try {
    FixedPointFamily::from_distribution(1.0, 2, ServiceDistribution::exponential(1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnstable);
  }
}

TEST(SojournBound, SharesTheExpression) {
  const auto fp = FixedPointFamily::from_distribution(0.5, 2, ServiceDistribution::weibull(0.5, 2.0));
  const auto b = sojourn_upper_bound(fp);
  EXPECT_DOUBLE_EQ(b.value, expected_sojourn(fp).e_td);
  EXPECT_TRUE(b.asymptotic_in_n);
  const auto idle = FixedPointFamily::from_distribution(1e-9, 2, ServiceDistribution::weibull(0.5, 2.0));
  EXPECT_NEAR(sojourn_upper_bound(idle).value, mean(idle.dist()), 1e-8);
}

TEST(Sweep, ErlangCurveIsIncreasingAndConvex) {
  const auto pts = sojourn_sweep(ServiceDistribution::erlang(2, 2.0), 2, 0.05, 0.95, 0.05);
  ASSERT_EQ(pts.size(), 19u);
  for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_GT(pts[i].e_td, pts[i - 1].e_td);
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    EXPECT_GT(pts[i + 1].e_td - 2.0 * pts[i].e_td + pts[i - 1].e_td, 0.0);
  }
}
