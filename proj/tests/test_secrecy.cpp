#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fasec/error.hpp"
#include "fasec/secrecy.hpp"
#include "test_support.hpp"

namespace fasec {
namespace {

using testing::oracle_rate;
using testing::randn;
using testing::randn_vec;
using testing::uniform_int;

TEST(Rates, MatchEigenvalueOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int s = uniform_int(rng, 1, 8);
    const int n = uniform_int(rng, 1, 4);
    const int k = uniform_int(rng, 1, 3);
    const MatrixXcd h = randn(n, s, rng) * 3.0;
    const MatrixXcd W = randn(s, k, rng);
    const VectorXcd v = randn_vec(s, rng);
    EXPECT_NEAR(link_rate(h, W, v), oracle_rate(h, W, v), 1e-9);
  }
}

TEST(Rates, ZeroPrecoderGivesZeroRate) {
  std::mt19937_64 rng(3);
  const MatrixXcd h = randn(4, 6, rng);
  EXPECT_NEAR(link_rate(h, MatrixXcd::Zero(6, 2), randn_vec(6, rng)), 0.0, 1e-12);
}

TEST(Rates, SingleStreamClosedForm) {
  // One antenna, one stream, no AN: log₂(1 + |hw|²).
  MatrixXcd h(1, 1);
  h(0, 0) = cd(2.0, 0.0);
  MatrixXcd W(1, 1);
  W(0, 0) = cd(0.0, 1.5);
  const VectorXcd v = VectorXcd::Zero(1);
  EXPECT_NEAR(link_rate(h, W, v), std::log2(1.0 + 9.0), 1e-14);
  // With AN of equal gain: log₂((1 + 9 + 4)/(1 + 4)).
  VectorXcd a(1);
  a(0) = 1.0;
  EXPECT_NEAR(link_rate(h, W, a), std::log2(14.0 / 5.0), 1e-14);
}

TEST(Secrecy, ClampsAtZero) {
  std::mt19937_64 rng(5);
  const MatrixXcd hb = randn(2, 4, rng) * 0.01;
  const MatrixXcd he = randn(2, 4, rng) * 10.0;
  const MatrixXcd W = randn(4, 1, rng);
  const VectorXcd v = VectorXcd::Zero(4);
  EXPECT_LT(rate_bob(hb, W, v) - rate_eve(he, W, v), 0.0);
  EXPECT_EQ(secrecy_rate(hb, he, W, v), 0.0);
}

TEST(Decomposition, IdentityHoldsOnRandomInstances) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const int s = uniform_int(rng, 1, 8);
    const MatrixXcd hb = randn(uniform_int(rng, 1, 4), s, rng) * 2.0;
    const MatrixXcd he = randn(uniform_int(rng, 1, 4), s, rng) * 2.0;
    const MatrixXcd W = randn(s, uniform_int(rng, 1, 3), rng);
    const VectorXcd v = randn_vec(s, rng);
    const RateDecomposition d = decompose_r123(hb, he, W, v);
    const double gap = oracle_rate(hb, W, v) - oracle_rate(he, W, v);
    EXPECT_NEAR(d.secrecy_gap(), gap, 1e-9);
    EXPECT_GE(d.r2, 0.0);
    EXPECT_GE(d.r3, d.r2 - 1e-12);
  }
}

TEST(BeamformerState, BudgetCheck) {
  BeamformerState s;
  s.W = MatrixXcd::Constant(2, 1, cd(0.5, 0.0));
  s.v = VectorXcd::Constant(2, cd(0.5, 0.0));
  s.power_budget = 1.0;
  EXPECT_NEAR(s.total_power(), 1.0, 1e-15);
  EXPECT_TRUE(s.within_budget());
  s.power_budget = 0.9;
  EXPECT_FALSE(s.within_budget());
}

TEST(Grid, RowMajorYOuterXInner) {
  const auto g = rectangular_grid(0.0, 1.0, 3, 10.0, 11.0, 2);
  ASSERT_EQ(g.size(), 6u);
  EXPECT_DOUBLE_EQ(g[0].x, 0.0);
  EXPECT_DOUBLE_EQ(g[1].x, 0.5);
  EXPECT_DOUBLE_EQ(g[2].x, 1.0);
  EXPECT_DOUBLE_EQ(g[0].y, 10.0);
  EXPECT_DOUBLE_EQ(g[3].y, 11.0);
}

TEST(FieldMaps, AnOffInterferenceIsTheNoiseFloor) {
  const ScenarioGeometry g = testing::small_scenario();
  std::mt19937_64 rng(23);
  BeamformerState s;
  s.support = {0, 5, 9, 20};
  s.W = randn(4, 2, rng) * 1e-3;
  s.v = VectorXcd::Zero(4);
  const auto samples = field_power_maps(g, s, rectangular_grid(0.5, 20.0, 9, 0.0, 20.0, 9));
  for (const auto& f : samples) {
    EXPECT_NEAR(f.inp_dbm, -105.0, 1e-9);
    EXPECT_TRUE(std::isfinite(f.rsp_dbm));
  }
}

TEST(FieldMaps, ProbePowerMatchesDirectComputation) {
  const ScenarioGeometry g = testing::small_scenario();
  std::mt19937_64 rng(29);
  BeamformerState s;
  s.support = {1, 2, 40, 63};
  s.W = randn(4, 3, rng) * 1e-2;
  s.v = randn_vec(4, rng) * 1e-2;
  const GridPoint p{7.0, 3.0};
  const auto f = field_power_maps(g, s, {p});
  const MatrixXcd h = select_columns(probe_channel(g, p.x, p.y), s.support);
  EXPECT_NEAR(f[0].rsp_dbm, watts_to_dbm((h * s.W).squaredNorm()), 1e-9);
  EXPECT_NEAR(f[0].inp_dbm, watts_to_dbm((h * s.v).squaredNorm() + g.noise_power_w), 1e-9);
}

TEST(FieldMaps, ZeroSignalReportsFloor) {
  const ScenarioGeometry g = testing::small_scenario();
  BeamformerState s;
  s.support = {0, 1};
  s.W = MatrixXcd::Zero(2, 1);
  s.v = VectorXcd::Zero(2);
  const auto f = field_power_maps(g, s, {{5.0, 5.0}});
  EXPECT_EQ(f[0].rsp_dbm, kDbmFloor);
}

TEST(FieldMaps, DimensionMismatchThrows) {
  const ScenarioGeometry g = testing::small_scenario();
  BeamformerState s;
  s.support = {0, 1, 2};
  s.W = MatrixXcd::Zero(2, 1);
  s.v = VectorXcd::Zero(2);
  EXPECT_THROW(field_power_maps(g, s, {{5.0, 5.0}}), ConfigError);
}

}  // namespace
}  // namespace fasec
