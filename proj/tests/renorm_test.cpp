#include <gtest/gtest.h>

#include <cmath>

#include "lrperc/renorm.hpp"
#include "oracles.hpp"

using namespace lrperc;

namespace {

Configuration full_chain(const Interval& box) {
  std::vector<Edge> e;
  for (Vertex k = box.lo; k + 1 < box.hi; ++k) e.push_back({k, k + 1});
  return Configuration::from_edges(box, e);
}

std::vector<BlockReport> synthetic_reports(Vertex C, const std::vector<Vertex>& bad) {
  std::vector<BlockReport> r;
  for (Vertex j = -C + 1; j <= C - 1; ++j) {
    const bool is_bad = std::find(bad.begin(), bad.end(), j) != bad.end();
    r.push_back({BlockSpec{4, j}, 0.8, !is_bad, is_bad ? 1u : 8u});
  }
  return r;
}

}  // namespace

TEST(BlockSpec, GeometryAndOverlap) {
  const BlockSpec b{5, 2};
  EXPECT_EQ(b.interval(), Interval(5, 15));
  EXPECT_EQ(b.interval().size(), 10);
  const auto next = BlockSpec{5, 3}.interval();
  EXPECT_EQ(b.interval().hi - next.lo, 5);  // overlap of K sites
}

TEST(GoodThreshold, Ceiling) {
  EXPECT_EQ(good_threshold(16, 0.8), 26u);    // 25.6
  EXPECT_EQ(good_threshold(10, 0.9), 18u);    // exactly 18, no float bump
  EXPECT_EQ(good_threshold(2, 0.6), 3u);      // 2.4
  EXPECT_EQ(good_threshold(4, 0.75), 6u);
}

TEST(IsThetaGood, HandExamples) {
  const Vertex K = 10;
  const auto chain = full_chain(Interval(-K, K));
  auto rep = is_theta_good(chain, BlockSpec{K, 0}, 0.9);
  EXPECT_TRUE(rep.good);
  EXPECT_EQ(rep.largest_size, static_cast<std::size_t>(2 * K));

  const auto empty = Configuration::from_edges(Interval(-K, K), {});
  rep = is_theta_good(empty, BlockSpec{K, 0}, 0.1);
  EXPECT_FALSE(rep.good);
  EXPECT_EQ(rep.largest_size, 1u);

  EXPECT_THROW(is_theta_good(empty, BlockSpec{K, 1}, 0.5), std::invalid_argument);
  EXPECT_THROW(is_theta_good(empty, BlockSpec{K, 0}, 1.0), std::invalid_argument);
}

TEST(IsThetaGood, MatchesBfsOracle) {
  const Vertex K = 32;
  const double theta = 0.8;
  for (std::uint64_t r = 0; r < 1500; ++r) {
    const auto c = sample_config(Interval(-K, K), ModelParams{1.5, 2.0 + static_cast<double>(r % 5) * 0.3, 1.0, 2.0},
                                 replicate_seed(99, r));
    const bool oracle_good = oracle::max_component(oracle::bfs_components(c.open_edges(), -K, K)) >= 52;
    ASSERT_EQ(is_theta_good(c, BlockSpec{K, 0}, theta).good, oracle_good);
  }
}

TEST(IsThetaGood, MonotoneAndUniqueLargeCluster) {
  const Vertex K = 12;
  CounterRng pick(3, {3});
  for (std::uint64_t r = 0; r < 500; ++r) {
    const auto c = sample_config(Interval(-K, K), ModelParams{1.5, 1.5, 1.0, 2.0}, replicate_seed(1, r));
    ASSERT_LE(count_large_clusters(c, BlockSpec{K, 0}, 0.76), 1u);
    const bool good = is_theta_good(c, BlockSpec{K, 0}, 0.8).good;
    auto edges = c.open_edges();
    const Vertex i = -K + static_cast<Vertex>(pick.below(2 * K - 1));
    edges.push_back({i, i + 1 + static_cast<Vertex>(pick.below(static_cast<std::uint64_t>(K - i - 1)))});
    const auto more = Configuration::from_edges(c.box(), edges);
    if (good) {
      ASSERT_TRUE(is_theta_good(more, BlockSpec{K, 0}, 0.8).good);
    }
  }
}

TEST(EstimatePBad, DegenerateRegimes) {
  auto strong = estimate_p_bad(8, 0.9, ModelParams{2.0, 50.0, 1.0, 2.0}, 2000, 1);
  EXPECT_LT(strong.mean, 0.01);
  auto weak = estimate_p_bad(8, 0.9, ModelParams{0.01, 0.01, 1.0, 2.0}, 2000, 2);
  EXPECT_GT(weak.mean, 0.99);
  EXPECT_THROW(estimate_p_bad(8, 0.9, ModelParams{}, 99, 1), std::invalid_argument);
  EXPECT_THROW(estimate_p_bad(1, 0.9, ModelParams{}, 100, 1), std::invalid_argument);
}

// K = 2, theta = 0.6: a 4-site block is bad unless some cluster has >= 3
// vertices. Exact probability by enumerating the 64 edge states.
TEST(EstimatePBad, MatchesEnumeration) {
  const ModelParams p{1.0, 0.7, 1.0, 2.0};
  const auto pairs = oracle::all_pairs(-2, 2);
  double exact = 0.0;
  for (std::uint64_t m = 0; m < 64; ++m) {
    if (oracle::max_component(oracle::bfs_components(oracle::edges_of_mask(pairs, m), -2, 2)) < 3)
      exact += oracle::product_law(pairs, m, p);
  }
  const auto est = estimate_p_bad(2, 0.6, p, 40000, 17);
  EXPECT_NEAR(est.mean, exact, 3.0 * est.std_error);
  EXPECT_GT(exact, 0.05);
  EXPECT_LT(exact, 0.95);
}

TEST(EstimatePBad, Deterministic) {
  const ModelParams p{1.2, 2.0, 1.0, 2.0};
  const auto a = estimate_p_bad(16, 0.8, p, 300, 5);
  const auto b = estimate_p_bad(16, 0.8, p, 300, 5);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(MergeLemma, HandCases) {
  const Vertex K = 4, C = 5;
  EXPECT_TRUE(verify_merge_lemma(full_chain(Interval(-C * K, C * K)), K, C, 0.9));
  EXPECT_TRUE(verify_merge_lemma(Configuration::from_edges(Interval(-C * K, C * K), {}), K, C, 0.9));
  EXPECT_THROW(verify_merge_lemma(full_chain(Interval(-C * K, C * K)), K, C, 0.75), std::invalid_argument);
  EXPECT_THROW(verify_merge_lemma(full_chain(Interval(-10, 10)), K, C, 0.8), std::invalid_argument);
}

TEST(MergeLemma, RandomConfigurations) {
  const Vertex K = 16, C = 8;
  const ModelParams p{1.5, 3.0, 1.0, 2.0};
  int antecedent = 0;
  for (std::uint64_t r = 0; r < 1000; ++r) {
    const auto c = sample_config(big_block(K, C), p, replicate_seed(2, r));
    ASSERT_TRUE(verify_merge_lemma(c, K, C, 0.8));
    bool all_good = true;
    for (const auto& rep : block_reports(c, K, C, 0.8)) all_good = all_good && rep.good;
    antecedent += all_good;
  }
  EXPECT_GT(antecedent, 100);  // the implication is exercised, not just vacuous
}

TEST(DetectEi, HandExamples) {
  const Vertex C = 6;
  auto all_good = synthetic_reports(C, {});
  for (Vertex i = -C + 1; i <= C - 1; ++i) EXPECT_FALSE(detect_E_i(all_good, i));

  auto one_bad = synthetic_reports(C, {2});
  for (Vertex i = -C + 1; i <= C - 1; ++i) EXPECT_EQ(detect_E_i(one_bad, i), i == 2);

  auto two_bad = synthetic_reports(C, {-3, 2});
  for (Vertex i = -C + 1; i <= C - 1; ++i) EXPECT_FALSE(detect_E_i(two_bad, i));

  // neighbours of i may be bad
  auto triple = synthetic_reports(C, {1, 2, 3});
  EXPECT_TRUE(detect_E_i(triple, 2));
  EXPECT_FALSE(detect_E_i(triple, 1));
}

TEST(DetectEi, RejectsIncompleteReports) {
  auto r = synthetic_reports(4, {});
  r.pop_back();
  EXPECT_THROW(detect_E_i(r, 0), std::invalid_argument);
  r = synthetic_reports(4, {});
  r[2].block.K = 5;
  EXPECT_THROW(detect_E_i(r, 0), std::invalid_argument);
  EXPECT_THROW(detect_E_i(synthetic_reports(4, {}), 4), std::invalid_argument);
  EXPECT_THROW(detect_E_i({}, 0), std::invalid_argument);
}

// E_i and E_j with |i - j| >= 2 never hold together.
TEST(DetectEi, DisjointBeyondTriple) {
  CounterRng r(8, {8});
  const Vertex C = 7;
  for (int trial = 0; trial < 3000; ++trial) {
    std::vector<Vertex> bad;
    for (Vertex j = -C + 1; j <= C - 1; ++j)
      if (r.uniform() < 0.12) bad.push_back(j);
    const auto reps = synthetic_reports(C, bad);
    for (Vertex i = -C + 1; i <= C - 1; ++i)
      for (Vertex j = i + 2; j <= C - 1; ++j) ASSERT_FALSE(detect_E_i(reps, i) && detect_E_i(reps, j));
  }
}

TEST(DetectFi, HandExamples) {
  const Vertex K = 4, C = 5;
  const auto chain = full_chain(Interval(-C * K, C * K));
  for (Vertex i = -C + 1; i <= C - 1; ++i) EXPECT_FALSE(detect_F_i(chain, K, C, i, 0.8, 0.6));
  // block 0 bad but B_CK is theta'-good through a long edge: F_0 false
  std::vector<Edge> e;
  for (Vertex k = -C * K; k + 1 < C * K; ++k)
    if (k < -K || k >= K - 1) e.push_back({k, k + 1});
  e.push_back({-K - 1, K});
  const auto gap = Configuration::from_edges(Interval(-C * K, C * K), e);
  EXPECT_TRUE(detect_E_i(block_reports(gap, K, C, 0.8), 0));
  EXPECT_FALSE(detect_F_i(gap, K, C, 0, 0.8, 0.6));
  // without the long edge B_CK splits into two chains of 17 < ceil(2*0.6*20) = 24
  e.pop_back();
  const auto split = Configuration::from_edges(Interval(-C * K, C * K), e);
  EXPECT_TRUE(detect_F_i(split, K, C, 0, 0.8, 0.6));
  EXPECT_THROW(detect_F_i(split, K, C, 0, 0.6, 0.8), std::invalid_argument);
}

TEST(DetectFi, MonteCarloRespectsProductBound) {
  const Vertex K = 16, C = 12;
  const double beta = 1.5, theta = 0.8, theta_prime = theta - 2.0 / static_cast<double>(C);
  const auto st = estimate_f_events(K, C, theta, theta_prime, ModelParams{beta, 2.5, 1.0, 2.0}, 1500, 4);
  const double pbad = st.p_bad();
  EXPECT_GT(pbad, 0.0);
  for (Vertex i = -2; i <= 2; ++i) {
    EXPECT_LE(st.p_f(i), f_i_bound(C, i, beta, theta) * pbad + 3.0 * st.p_f_stderr(i) + 1e-12) << "i=" << i;
  }
  EXPECT_GE(st.f_sum_ratio(), 0.0);
}

TEST(ClosedPairWeight, HandExamples) {
  DensitySets one{{-1}, {1}, 0, 1, 0.9};
  EXPECT_NEAR(closed_pair_weight(one, 1.0), std::exp(-0.25), 1e-15);
  EXPECT_NEAR(closed_pair_weight(one, 1.0), 0.7788, 1e-4);
  DensitySets two{{-1, -2}, {1, 2}, 0, 1, 0.9};
  EXPECT_NEAR(closed_pair_weight(two, 1.0), std::exp(-(1.0 / 9 + 1.0 / 16 + 1.0 / 4 + 1.0 / 9)), 1e-15);
  EXPECT_NEAR(closed_pair_log_weight(two, 1.0), 0.5347, 1e-4);

  DensitySets overlap{{-1}, {-1}, -1, 1, 0.9};
  EXPECT_THROW(closed_pair_weight(overlap, 1.0), std::invalid_argument);
  DensitySets unordered{{-2, -1}, {1}, 0, 1, 0.9};
  EXPECT_THROW(closed_pair_weight(unordered, 1.0), std::invalid_argument);
}

TEST(ClosedPairWeight, MaxSpreadSetsAreValidAndExtreme) {
  const auto d = max_spread_density_sets(4, 40, 0, 0.8);
  EXPECT_TRUE(density_violation(d).empty());
  EXPECT_EQ(d.cminus.size(), 122u);  // ceil(0.8 * 4 * 38)
  EXPECT_EQ(d.cminus.front(), -12);
  EXPECT_EQ(d.cplus.front(), 12);
  // pushing any element one step further breaks the spacing
  auto moved = d;
  moved.cminus[5] -= 1;
  EXPECT_FALSE(density_violation(moved).empty());
  for (double beta : {1.2, 2.0}) EXPECT_LE(closed_pair_weight(d, beta), f_i_bound(40, 0, beta, 0.8));
}

TEST(ClosedPairWeight, BoundOnWorstCaseGrid) {
  for (Vertex K : {2, 4, 8})
    for (Vertex C : {50, 100, 200})
      for (Vertex i : {Vertex{0}, C / 2})
        for (double theta : {0.8, 0.9}) {
          const auto sets = max_spread_density_sets(K, C, i, theta);
          const double base = closed_pair_log_weight(sets, 1.0);
          for (double beta : {1.2, 2.0}) {
            EXPECT_LE(std::exp(-beta * base), f_i_bound(C, i, beta, theta))
                << "K=" << K << " C=" << C << " i=" << i << " theta=" << theta << " beta=" << beta;
          }
        }
}

TEST(FiBound, ClosedForms) {
  EXPECT_DOUBLE_EQ(f_i_bound(12, 0, 1.0, 1.0), 1.0);
  EXPECT_NEAR(f_i_bound(100, 0, 1.21, 0.9), std::pow(0.12, 0.9801), 1e-15);
  EXPECT_NEAR(f_i_bound(100, 0, 1.21, 0.9), 0.1249, 1e-3);
  EXPECT_DOUBLE_EQ(f_i_bound(100, 88, 1.21, 0.9), 1.0);
  EXPECT_DOUBLE_EQ(f_i_bound(100, -88, 1.21, 0.9), 1.0);
  EXPECT_THROW(f_i_bound(10, 10, 1.0, 0.9), std::invalid_argument);
}
