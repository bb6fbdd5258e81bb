#include <gtest/gtest.h>

#include <cmath>

#include "oracles/oracles.hpp"
#include "supermarket/convergence.hpp"
#include "supermarket/error.hpp"
#include "supermarket/mean_field.hpp"

using namespace supermarket;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kDomainError;
}

std::vector<double> classical(double rho, int d, int K) {
  std::vector<double> u(K + 1);
  for (int k = 0; k <= K; ++k) u[k] = oracle::classical_tail(rho, d, k);
  return u;
}

}  // namespace

TEST(Ratios, Examples) {
  const auto model = MeanFieldModel::exponential(1.0, 2.0, 2, 4);
  const auto fp = classical(0.5, 2, 4);
  const auto empty = ratios(model, model.empty_state(), fp);
  for (double c : empty.c) EXPECT_EQ(c, 0.0);
  for (double d : empty.d) EXPECT_EQ(d, 0.0);

  std::vector<double> state(5, 0.0);
  state[0] = 1.0;
  state[1] = 0.25;
  const auto r = ratios(model, state, fp);
  EXPECT_DOUBLE_EQ(r.c[0], 0.25);
  EXPECT_DOUBLE_EQ(r.d[0], 2.0);

  EXPECT_EQ(code_of([&] { ratios(model, fp, fp); }), ErrorCode::kZeroGap);
}

TEST(Weights, Examples) {
  const auto w = weights(1.0, {0.5, 0.4}, {0.0, 0.3}, 0.1);
  ASSERT_EQ(w.weights.size(), 3u);
  EXPECT_EQ(w.weights[0], 1.0);
  EXPECT_DOUBLE_EQ(w.weights[1], 1.2);
  EXPECT_NEAR(w.weights[2], 1.65, 1e-15);
  EXPECT_EQ(code_of([] { weights(1.0, {0.5, 0.0}, {0.1, 0.1}); }), ErrorCode::kDegenerateRatio);
}

TEST(Weights, DefaultDeltaAndMonotone) {
  const auto w = weights(2.0, {0.3, 0.2, 0.1, 0.05}, {1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(w.delta, 0.02);
  for (std::size_t k = 1; k < w.weights.size(); ++k) EXPECT_GT(w.weights[k], w.weights[k - 1]);
}

TEST(Potential, Examples) {
  const auto fp = classical(0.5, 2, 8);
  EXPECT_EQ(potential(fp, fp), 0.0);
  std::vector<double> empty(9, 0.0);
  empty[0] = 1.0;
  EXPECT_NEAR(potential(empty, fp), oracle::kTailSumRhoHalf, 1e-15);
  std::vector<double> w(8, 2.0);
  EXPECT_NEAR(potential(empty, fp, w), 2.0 * oracle::kTailSumRhoHalf, 1e-15);
  auto above = fp;
  above[2] += 1e-3;
  EXPECT_EQ(code_of([&] { potential(above, fp); }), ErrorCode::kNegativeGap);
}

TEST(FitDecay, ExactExponential) {
  std::vector<double> t, phi;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.1 * i);
    phi.push_back(2.0 * std::exp(-0.3 * t.back()));
  }
  const auto fit = fit_decay(t, phi, 0.0, 10.0);
  EXPECT_NEAR(fit.c0, 2.0, 1e-9);
  EXPECT_NEAR(fit.delta, 0.3, 1e-9);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-9);
  EXPECT_EQ(fit.points, 101);
}

TEST(FitDecay, ConstantAndErrors) {
  std::vector<double> t, phi;
  for (int i = 0; i < 20; ++i) {
    t.push_back(i);
    phi.push_back(0.7);
  }
  EXPECT_EQ(fit_decay(t, phi, 0.0, 19.0).delta, 0.0);
  EXPECT_EQ(code_of([&] { fit_decay(t, phi, 0.0, 5.0); }), ErrorCode::kInsufficientPoints);
  phi[3] = 0.0;
  EXPECT_EQ(code_of([&] { fit_decay(t, phi, 0.0, 19.0); }), ErrorCode::kDomainError);
}

TEST(FitDecay, EmptyStartTrajectory) {
  const int K = 7;
  const auto model = MeanFieldModel::exponential(1.0, 2.0, 2, K);
  const auto traj = integrate_meanfield({model, model.empty_state(), 50.0, 1e-3, 100});
  const auto fp = classical(0.5, 2, K);
  const auto fit = fit_decay(model, traj, fp, 5.0, 40.0);
  EXPECT_GT(fit.delta, 0.0);
  EXPECT_GT(fit.r_squared, 0.98);

  const auto series = potential_series(model, traj, fp);
  for (std::size_t i = 1; i < series.phi.size(); ++i) {
    EXPECT_LE(series.phi[i], series.phi[i - 1] + 1e-15);
  }
}

TEST(PotentialSeries, PerTimeWeightsSkipTheEmptyStart) {
  const int K = 6;
  const auto model = MeanFieldModel::exponential(1.0, 2.0, 2, K);
  const auto traj = integrate_meanfield({model, model.empty_state(), 2.0, 1e-3, 100});
  const auto series =
      potential_series(model, traj, classical(0.5, 2, K), WeightMode::kPerTime);
  EXPECT_GE(series.skipped, 1);
  for (double p : series.phi) EXPECT_GT(p, 0.0);
}

TEST(Lipschitz, IdenticalPairContributesNothing) {
  const auto model = MeanFieldModel::exponential(0.5, 1.0, 2, 4);
  DriftFunction f = [](const std::vector<double>& u) { return drift_exponential(u, 0.5, 1.0, 2); };
  const std::vector<double> a = {1.0, 0.4, 0.1, 0.01, 0.0};
  const std::vector<double> b = {1.0, 0.5, 0.2, 0.02, 0.0};
  const std::vector<double> c = {1.0, 0.3, 0.05, 0.0, 0.0};
  const double with_same = lipschitz_estimate(f, {{a, a}, {a, b}, {b, c}});
  const double only = lipschitz_estimate(f, {{a, b}, {b, c}});
  EXPECT_DOUBLE_EQ(with_same, only);
}

TEST(Lipschitz, LinearSystemBound) {
  const double lambda = 0.7, mu = 1.3;
  const auto model = MeanFieldModel::exponential(lambda, mu, 1, 8);
  DriftFunction f = [&](const std::vector<double>& u) {
    return drift_exponential(u, lambda, mu, 1);
  };
  const double m = lipschitz_estimate(f, random_state_pairs(model, 2000, 3));
  EXPECT_GT(m, 0.0);
  // Row sums of |coefficients| of the tridiagonal operator.
  EXPECT_LE(m, 2.0 * lambda + 2.0 * mu + 1e-12);
}

TEST(Lipschitz, BoundedForPowerOfD) {
  const double lambda = 0.9, mu = 1.0;
  const int d = 3;
  const auto model = MeanFieldModel::exponential(lambda, mu, d, 6);
  DriftFunction f = [&](const std::vector<double>& u) {
    return drift_exponential(u, lambda, mu, d);
  };
  const double m = lipschitz_estimate(f, random_state_pairs(model, 10000, 8));
  EXPECT_LE(m, 2.0 * d * lambda + 2.0 * mu);
}
