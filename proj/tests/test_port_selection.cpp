#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fasec/error.hpp"
#include "fasec/port_selection.hpp"
#include "fasec/secrecy.hpp"
#include "test_support.hpp"

namespace fasec {
namespace {

using testing::randn;
using testing::randn_vec;
using testing::uniform_int;

TEST(BatchSize, WorkedExamples) {
  EXPECT_EQ(batch_size(64, 16, 0.5, 1), 24);
  EXPECT_EQ(batch_size(40, 16, 0.5, 1), 12);
  EXPECT_EQ(batch_size(17, 16, 0.5, 1), 1);
  EXPECT_EQ(batch_size(18, 16, 0.5, 1), 1);
  EXPECT_EQ(batch_size(18, 16, 0.5, 5), 2);  // capped at the surplus
  EXPECT_EQ(batch_size(16, 16, 0.5, 1), 0);
  EXPECT_EQ(batch_size(512, 128, 0.5, 1), 192);
}

TEST(BatchSize, StageCountForTheSmallArray) {
  int s = 64, stages = 0;
  while (s > 16) {
    s -= batch_size(s, 16, 0.5, 1);
    ++stages;
  }
  EXPECT_EQ(s, 16);
  EXPECT_EQ(stages, 7);  // 64 → 40 → 28 → 22 → 19 → 18 → 17 → 16
}

TEST(Prune, RemovesLowestScoresAndBreaksTiesByIndex) {
  const std::vector<int> support{2, 5, 7, 9, 11};
  VectorXd scores(5);
  scores << 0.3, 0.1, 0.3, 0.3, 0.9;
  std::vector<int> removed;
  const auto kept = prune(support, scores, 3, &removed);
  EXPECT_EQ(removed, (std::vector<int>{5, 2, 7}));
  EXPECT_EQ(kept, (std::vector<int>{9, 11}));
  EXPECT_THROW(prune(support, scores, 6), ConfigError);
  EXPECT_THROW(prune(support, VectorXd::Zero(4), 1), ConfigError);
}

TEST(Prune, MaximizesRetainedScoreMass) {
  // Exhaustive check: the kept set has the largest possible score sum.
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = uniform_int(rng, 2, 12);
    const int d = uniform_int(rng, 0, n - 1);
    std::vector<int> support(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) support[static_cast<std::size_t>(i)] = 3 * i + 1;
    VectorXd scores(n);
    for (int i = 0; i < n; ++i) scores(i) = std::uniform_real_distribution<double>(0, 1)(rng);
    const auto kept = prune(support, scores, d);
    double got = 0.0;
    for (int p : kept) got += scores((p - 1) / 3);
    double best = -1.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (__builtin_popcount(mask) != n - d) continue;
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        if (mask & (1u << i)) s += scores(i);
      }
      best = std::max(best, s);
    }
    EXPECT_NEAR(got, best, 1e-12);
    EXPECT_TRUE(std::is_sorted(kept.begin(), kept.end()));
  }
}

TEST(SelectionMatrix, ExtractsColumns) {
  std::mt19937_64 rng(2);
  const MatrixXcd h = randn(3, 10, rng);
  const std::vector<int> s{1, 4, 9};
  const MatrixXd p = selection_matrix(s, 10);
  EXPECT_LT((h * p - select_columns(h, s)).norm(), 1e-15);
  EXPECT_EQ((p.transpose() * p - MatrixXd::Identity(3, 3)).norm(), 0.0);
  EXPECT_THROW(selection_matrix({10}, 10), ConfigError);
}

TEST(RowEnergy, JointNorm) {
  MatrixXcd w(2, 2);
  w << cd(3, 0), cd(0, 0), cd(0, 1), cd(0, 0);
  VectorXcd v(2);
  v << cd(0, 4), cd(0, 0);
  const VectorXd e = row_energy(w, v);
  EXPECT_DOUBLE_EQ(e(0), 5.0);
  EXPECT_DOUBLE_EQ(e(1), 1.0);
}

ChannelPair random_pair(std::mt19937_64& rng, int ports, int nu, int ne, double gain) {
  ChannelPair c;
  c.bob = randn(nu, ports, rng) * gain;
  c.eve = randn(ne, ports, rng) * gain;
  return c;
}

TEST(SelectPorts, StageInvariants) {
  std::mt19937_64 rng(3);
  const ChannelPair ch = random_pair(rng, 24, 3, 3, 2.0);
  SelectorOptions o;
  o.stage_iters = 10;
  o.final_iters = 30;
  const SelectionResult r = select_ports(ch, 6, 2, 1.0, o);
  ASSERT_EQ(r.support.size(), 6u);
  EXPECT_TRUE(std::is_sorted(r.support.begin(), r.support.end()));
  EXPECT_EQ(std::set<int>(r.support.begin(), r.support.end()).size(), 6u);
  std::size_t prev = 25;
  for (const auto& st : r.stages) {
    EXPECT_LT(st.support.size(), prev);
    prev = st.support.size();
    EXPECT_EQ(st.pruned.size(),
              static_cast<std::size_t>(batch_size(static_cast<int>(st.support.size()), 6, 0.5, 1)));
    for (double s : st.pruned_scores) EXPECT_LE(s, st.min_retained_score);
    for (int p : st.pruned) {
      EXPECT_EQ(std::count(r.support.begin(), r.support.end(), p), 0);
    }
  }
  EXPECT_LE(r.refit.W.squaredNorm() + r.refit.v.squaredNorm(), 1.0 + 1e-8);
}

TEST(SelectPorts, FullSupportSkipsPruning) {
  std::mt19937_64 rng(4);
  const ChannelPair ch = random_pair(rng, 5, 2, 2, 1.0);
  SelectorOptions o;
  o.final_iters = 20;
  const SelectionResult r = select_ports(ch, 5, 2, 1.0, o);
  EXPECT_TRUE(r.stages.empty());
  EXPECT_EQ(r.support, (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(SelectPorts, DuplicateColumnsKeepAValidSupport) {
  std::mt19937_64 rng(5);
  ChannelPair ch = random_pair(rng, 10, 2, 2, 2.0);
  for (int j = 5; j < 10; ++j) {
    ch.bob.col(j) = ch.bob.col(j - 5);
    ch.eve.col(j) = ch.eve.col(j - 5);
  }
  SelectorOptions o;
  o.stage_iters = 10;
  o.final_iters = 20;
  const SelectionResult r = select_ports(ch, 3, 1, 1.0, o);
  EXPECT_EQ(r.support.size(), 3u);
  EXPECT_TRUE(r.refit.W.allFinite());
}

TEST(SelectPorts, DeterministicForFixedSeed) {
  std::mt19937_64 rng(6);
  const ChannelPair ch = random_pair(rng, 16, 2, 2, 2.0);
  SelectorOptions o;
  o.stage_iters = 8;
  o.final_iters = 15;
  const auto a = select_ports(ch, 4, 1, 1.0, o);
  const auto b = select_ports(ch, 4, 1, 1.0, o);
  EXPECT_EQ(a.support, b.support);
  EXPECT_EQ(a.refit.W, b.refit.W);
}

TEST(SelectPorts, HybridScoresRun) {
  std::mt19937_64 rng(7);
  const ChannelPair ch = random_pair(rng, 16, 2, 2, 2.0);
  SelectorOptions o;
  o.stage_iters = 8;
  o.final_iters = 15;
  o.score_source = ScoreSource::hybrid;
  o.rf_chains = 2;
  const auto r = select_ports(ch, 4, 1, 1.0, o);
  EXPECT_EQ(r.support.size(), 4u);
  o.rf_chains = 0;
  EXPECT_THROW(select_ports(ch, 4, 1, 1.0, o), ConfigError);
}

TEST(SelectPorts, RejectsBadArguments) {
  std::mt19937_64 rng(8);
  const ChannelPair ch = random_pair(rng, 8, 2, 2, 1.0);
  SelectorOptions o;
  EXPECT_THROW(select_ports(ch, 9, 1, 1.0, o), ConfigError);
  EXPECT_THROW(select_ports(ch, 3, 4, 1.0, o), ConfigError);
  o.eta = 1.0;
  EXPECT_THROW(select_ports(ch, 3, 1, 1.0, o), ConfigError);
}

// Best SR over a few BCD restarts on a fixed support.
double best_sr(const ChannelPair& ch, const std::vector<int>& s, std::mt19937_64& rng) {
  double best = 0.0;
  for (int restart = 0; restart < 3; ++restart) {
    auto [W0, v0] = random_initial_state(static_cast<Eigen::Index>(s.size()), 1, 1.0, true, rng);
    const BcdResult r = bcd_optimize(ch.bob_on(s), ch.eve_on(s), 1.0, W0, v0);
    best = std::max(best, secrecy_rate(ch.bob_on(s), ch.eve_on(s), r.W, r.v));
  }
  return best;
}

TEST(SelectPorts, CompetitiveWithExhaustiveSearchOnToyInstances) {
  double ratio_sum = 0.0;
  const int seeds = 5;
  for (int seed = 0; seed < seeds; ++seed) {
    std::mt19937_64 rng(100 + seed);
    const ChannelPair ch = random_pair(rng, 8, 2, 2, 1.5);
    SelectorOptions o;
    o.seed = static_cast<std::uint64_t>(seed) + 1;
    const auto sel = select_ports(ch, 3, 1, 1.0, o);
    const double got = secrecy_rate(ch.bob_on(sel.support), ch.eve_on(sel.support), sel.refit.W,
                                    sel.refit.v);
    double best = 0.0;
    for (int a = 0; a < 8; ++a)
      for (int b = a + 1; b < 8; ++b)
        for (int c = b + 1; c < 8; ++c) best = std::max(best, best_sr(ch, {a, b, c}, rng));
    ASSERT_GT(best, 0.0);
    ratio_sum += got / best;
  }
  EXPECT_GE(ratio_sum / seeds, 0.8);
}

}  // namespace
}  // namespace fasec
