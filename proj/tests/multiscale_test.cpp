#include <gtest/gtest.h>

#include <cmath>

#include "lrperc/multiscale.hpp"

using namespace lrperc;

TEST(Schedule, SmallLevels) {
  const auto s = build_schedule(10, 0.95, 1, 0.8, 3);
  ASSERT_EQ(s.levels.size(), 3u);
  EXPECT_EQ(s.levels[1].C, 80);
  EXPECT_EQ(s.levels[1].K, 800);
  EXPECT_EQ(s.levels[2].K, 216000);
  EXPECT_DOUBLE_EQ(s.levels[1].theta, 0.95 - 1.0 / 80.0);
}

TEST(Schedule, ClosedFormExact) {
  for (std::int64_t C1 : {2, 8, 10}) {
    const auto s = build_schedule(C1, 0.95, 0, 0.8, 8);
    BigInt fact = 1, pow = 1;
    for (int n = 1; n <= 8; ++n) {
      fact *= n;
      pow *= C1;
      EXPECT_EQ(s.levels[static_cast<std::size_t>(n - 1)].K, fact * fact * fact * pow) << "C1=" << C1 << " n=" << n;
    }
  }
  // beyond 64 bits
  EXPECT_GT(build_schedule(10, 0.95, 0, 0.8, 8).levels.back().K, BigInt(std::numeric_limits<std::int64_t>::max()));
}

TEST(Schedule, ThetaDecreasesAboveFloor) {
  for (std::int64_t C0 : {1, 5, 20}) {
    const auto s = build_schedule(100, 0.95, C0, 0.8, 30);
    for (std::size_t k = 1; k < s.levels.size(); ++k) {
      EXPECT_LT(s.levels[k].theta, s.levels[k - 1].theta);
      EXPECT_GE(s.levels[k].theta, 0.8);
    }
  }
}

TEST(Schedule, Infeasible) {
  EXPECT_THROW(build_schedule(10, 0.95, 1000, 0.8, 3), ScheduleError);
  EXPECT_THROW(build_schedule(10, 0.7, 0, 0.8, 3), ScheduleError);
  EXPECT_THROW(build_schedule(1, 0.95, 0, 0.8, 3), ScheduleError);
  // the floor is exactly where the infinite sum lands
  const double z3m1 = 0.2020569031595942;
  EXPECT_NO_THROW(build_schedule(100, 0.95, static_cast<std::int64_t>(std::floor(0.15 * 100 / z3m1)), 0.8, 5));
  EXPECT_THROW(build_schedule(100, 0.95, static_cast<std::int64_t>(std::ceil(0.15 * 100 / z3m1)), 0.8, 5), ScheduleError);
}

TEST(LambdaSeed, Identity) {
  EXPECT_NEAR(lambda_seed(10), 12.899219826, 1e-8);
  EXPECT_NEAR(lambda_seed(2), 8.070906089, 1e-8);
  for (std::int64_t C1 : {2, 3, 8, 10, 100, 1000}) {
    const double c = static_cast<double>(C1);
    EXPECT_NEAR(c * std::exp(-lambda_seed(C1)) * 400.0 * c * c, 1.0, 1e-12);
  }
}

TEST(Recursion, SeededRegime) {
  const auto s = build_schedule(8, 0.95, 1, 0.8, 2);
  const ModelParams p{2.0, lambda_seed(8) + 1.0, 1.0, 2.0};
  const auto trace = run_recursion_experiment(s, p, 1000, 2, 3);
  ASSERT_EQ(trace.size(), 2u);
  EXPECT_LE(trace[0].u.mean, 1.0 / (400.0 * 64.0));
  EXPECT_TRUE(trace[0].target_ok);
  EXPECT_FALSE(trace[0].recursion_ok.has_value());
  EXPECT_TRUE(trace[1].recursion_ok.has_value());
  EXPECT_EQ(trace[1].level.K, 512);
}

TEST(Recursion, SubcriticalFails) {
  const auto s = build_schedule(8, 0.95, 1, 0.8, 2);
  const auto trace = run_recursion_experiment(s, ModelParams{0.5, 0.5, 1.0, 2.0}, 200, 2, 3);
  EXPECT_GT(trace[0].u.mean, 0.9);
  EXPECT_FALSE(trace[0].target_ok);
  // with u near 1 the right-hand side exceeds 1, so only the target fails
  EXPECT_EQ(trace[1].pass_flags(), "target=fail;recursion=pass");
}

TEST(Recursion, SingleLevelAndBudget) {
  const auto s = build_schedule(10, 0.95, 1, 0.8, 4);
  const auto one = run_recursion_experiment(s, ModelParams{2.0, 14.0, 1.0, 2.0}, 100, 1, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].pass_flags().substr(one[0].pass_flags().find(';')), ";recursion=na");
  EXPECT_THROW(run_recursion_experiment(s, ModelParams{2.0, 14.0, 1.0, 2.0}, 100, 4, 1), ResourceError);
  EXPECT_THROW(run_recursion_experiment(s, ModelParams{2.0, 14.0, 1.0, 2.0}, 100, 5, 1), std::invalid_argument);
}

TEST(DensityToPercolation, Limits) {
  EXPECT_GT(density_to_percolation(32, ModelParams{1.0, 50.0, 1.0, 2.0}, 200, 1).g.mean, 0.99);
  EXPECT_LT(density_to_percolation(32, ModelParams{0.01, 0.01, 1.0, 2.0}, 200, 1).g.mean, 0.01);
  EXPECT_THROW(density_to_percolation(32, ModelParams{}, 99, 1), std::invalid_argument);
}

TEST(DensityToPercolation, AveragingInequality) {
  const auto r = density_to_percolation(64, ModelParams{2.0, 13.0, 1.0, 2.0}, 2000, 7);
  EXPECT_TRUE(r.companion_applies());
  EXPECT_TRUE(r.holds);
  EXPECT_GE(r.g.mean, 0.375 - 3.0 * r.g.std_error);
  // the inequality is per-replicate in expectation only; sweep a range
  for (double lambda : {1.0, 2.0, 3.0}) {
    const auto s = density_to_percolation(32, ModelParams{1.5, lambda, 1.0, 2.0}, 1000, 9);
    EXPECT_TRUE(s.holds) << lambda;
  }
}
