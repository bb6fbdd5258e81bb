#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles/oracles.hpp"
#include "supermarket/error.hpp"
#include "supermarket/simulator.hpp"

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

SimConfig small(double lambda, int d) {
  SimConfig c;
  c.n = 50;
  c.lambda = lambda;
  c.d = d;
  c.horizon = 1000.0;
  c.seed = 42;
  c.replications = 3;
  c.threads = 1;
  return c;
}

}  // namespace

TEST(Seeds, SplitStreamIsDeterministicAndDistinct) {
  const auto a = replication_seeds(7, 16);
  EXPECT_EQ(a, replication_seeds(7, 16));
  EXPECT_EQ(std::set<std::uint64_t>(a.begin(), a.end()).size(), 16u);
  EXPECT_NE(a, replication_seeds(8, 16));
  EXPECT_EQ(replication_seeds(7, 4), std::vector<std::uint64_t>(a.begin(), a.begin() + 4));
}

TEST(Summarize, StudentT) {
  const auto e = summarize({1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(e.value, 2.0);
  EXPECT_NEAR(e.ci, 4.302652729696142 / std::sqrt(3.0), 1e-9);
  EXPECT_TRUE(std::isinf(summarize({5.0}).ci));
}

TEST(Run, BitIdenticalReruns) {
  auto c = small(0.8, 2);
  const auto a = run(c);
  const auto b = run(c);
  ASSERT_EQ(a.tails.size(), b.tails.size());
  for (std::size_t k = 0; k < a.tails.size(); ++k) {
    EXPECT_EQ(a.tails[k].value, b.tails[k].value);
    EXPECT_EQ(a.tails[k].ci, b.tails[k].ci);
  }
  EXPECT_EQ(a.sojourn_mean.value, b.sojourn_mean.value);
  EXPECT_EQ(a.replication_seeds, b.replication_seeds);
}

TEST(Run, WorkerCountDoesNotChangeResults) {
  auto c = small(0.8, 2);
  const auto a = run(c);
  c.threads = 3;
  const auto b = run(c);
  for (std::size_t k = 0; k < a.tails.size(); ++k) EXPECT_EQ(a.tails[k].value, b.tails[k].value);
  EXPECT_EQ(a.sojourn_mean.value, b.sojourn_mean.value);
}

TEST(Run, TailsOrderedAndStartAtOne) {
  const auto r = run(small(0.9, 2));
  EXPECT_EQ(r.tails[0].value, 1.0);
  for (std::size_t k = 1; k < r.tails.size(); ++k) {
    EXPECT_LE(r.tails[k].value, r.tails[k - 1].value);
  }
}

TEST(Run, IndependentQueuesWithSingleChoice) {
  auto c = small(0.5, 1);
  c.horizon = 4000.0;
  c.replications = 4;
  const auto r = run(c);
  for (int k = 1; k <= 4; ++k) EXPECT_NEAR(r.tails[k].value, std::pow(0.5, k), 0.03);
  EXPECT_NEAR(r.sojourn_mean.value, 2.0, 3.0 * r.sojourn_mean.ci + 0.05);
}

TEST(Run, LittlesLaw) {
  for (int d : {1, 2}) {
    const auto r = run(small(0.7, d));
    EXPECT_NEAR(r.littles_check.value, 1.0, 3.0 * r.littles_check.ci + 1e-3);
  }
}

TEST(Run, BacklogDoesNotTrendUp) {
  const auto r = run(small(0.9, 2));
  EXPECT_LT(r.backlog_slope.value, 3.0 * r.backlog_slope.ci + 1e-3);
}

TEST(Run, ChoiceModesAgree) {
  auto c = small(0.9, 2);
  c.n = 300;
  c.horizon = 1500.0;
  const auto a = run(c);
  c.choice_mode = ChoiceMode::kWithReplacement;
  const auto b = run(c);
  for (int k = 1; k <= 3; ++k) {
    const double spread = 3.0 * std::hypot(a.tails[k].ci, b.tails[k].ci) + 0.01;
    EXPECT_NEAR(a.tails[k].value, b.tails[k].value, spread) << k;
  }
}

TEST(Run, HeavyTailCaveat) {
  auto c = small(0.5, 2);
  c.dist = ServiceDistribution::power_law(1.0, 2.5);  // mean 2/3
  c.horizon = 200.0;
  EXPECT_TRUE(run(c).heavy_tail_caveat);
  c.dist = ServiceDistribution::power_law(1.0, 4.0);
  EXPECT_FALSE(run(c).heavy_tail_caveat);
}

TEST(Run, Validation) {
  auto c = small(1.0, 2);
  EXPECT_EQ(code_of([&] { run(c); }), ErrorCode::kUnstable);
  c = small(0.5, 2);
  c.dist = ServiceDistribution::almost_exponential(2.0);
  EXPECT_EQ(code_of([&] { run(c); }), ErrorCode::kUnsupported);
  c = small(0.5, 3);
  c.n = 2;
  EXPECT_EQ(code_of([&] { run(c); }), ErrorCode::kInvalidArgument);
  c.choice_mode = ChoiceMode::kWithReplacement;
  EXPECT_NO_THROW(c.validate());
}

TEST(Run, DefaultHorizonAndWarmup) {
  SimConfig c;
  c.dist = ServiceDistribution::exponential(2.0);
  EXPECT_DOUBLE_EQ(c.resolved_horizon(), 1e4);
  EXPECT_DOUBLE_EQ(c.resolved_warmup(), 2e3);
}

TEST(Replication, SnapshotsFollowRequestedTimes) {
  auto c = small(0.8, 2);
  c.horizon = 10.0;
  c.warmup = 0.0;
  c.snapshot_times = {0.0, 5.0, 10.0};
  const auto r = run_replication(c, 1);
  ASSERT_EQ(r.snapshots.size(), 3u);
  EXPECT_EQ(r.snapshots[0][0], 1.0);
  for (std::size_t k = 1; k < r.snapshots[0].size(); ++k) EXPECT_EQ(r.snapshots[0][k], 0.0);
}

TEST(Replication, InitialProfile) {
  auto c = small(0.5, 2);
  c.n = 100;
  c.horizon = 1e-9;
  c.warmup = 0.0;
  c.initial_tails = {1.0, 0.5, 0.2};
  c.snapshot_times = {0.0};
  const auto r = run_replication(c, 3);
  EXPECT_DOUBLE_EQ(r.snapshots[0][1], 0.5);
  EXPECT_DOUBLE_EQ(r.snapshots[0][2], 0.2);
}

TEST(Kurtz, SingleQueueErrorBounded) {
  auto c = small(0.5, 1);
  c.replications = 2;
  const std::vector<double> times = {0.0, 1.0, 2.0};
  const std::vector<std::vector<double>> levels = {{1.0, 0.0}, {1.0, 0.3}, {1.0, 0.4}};
  const auto pts = kurtz_experiment(c, {1}, times, levels);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_LE(pts[0].error.value, 1.0);
}

TEST(Compare, SelfDistanceIsZeroAndRanked) {
  const auto r = run(small(0.7, 2));
  std::vector<double> own;
  for (const auto& t : r.tails) own.push_back(t.value);
  std::vector<double> classical, halved;
  for (int k = 0; k < 6; ++k) {
    classical.push_back(oracle::classical_tail(0.7, 2, k));
    halved.push_back(k < 2 ? classical.back() : 0.5 * classical.back());
  }
  const auto ranking =
      compare_fixed_points(r, {{"halved", halved}, {"own", own}, {"classical", classical}});
  ASSERT_EQ(ranking.size(), 3u);
  EXPECT_EQ(ranking[0].name, "own");
  EXPECT_EQ(ranking[0].distance, 0.0);
  EXPECT_EQ(ranking[1].name, "classical");
  EXPECT_LE(ranking[1].distance, ranking[2].distance);
  EXPECT_EQ(ranking[1].levels_compared, 5);
}
