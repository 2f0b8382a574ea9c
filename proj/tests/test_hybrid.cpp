#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fasec/error.hpp"
#include "fasec/hybrid.hpp"
#include "test_support.hpp"

namespace fasec {
namespace {

using testing::randn;
using testing::randn_vec;
using testing::uniform_int;

void expect_constant_modulus(const MatrixXcd& f) {
  const double m = 1.0 / std::sqrt(static_cast<double>(f.rows()));
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (Eigen::Index j = 0; j < f.cols(); ++j) {
      EXPECT_NEAR(std::abs(f(i, j)), m, 1e-12);
    }
  }
}

TEST(InitialRf, ConstantModulusForEveryChainCount) {
  std::mt19937_64 rng(1);
  const MatrixXcd t = randn(10, 3, rng);
  for (int n = 1; n <= 10; ++n) {
    const MatrixXcd f = initial_rf(t, n);
    ASSERT_EQ(f.cols(), n);
    expect_constant_modulus(f);
  }
  EXPECT_THROW(initial_rf(t, 0), ConfigError);
  EXPECT_THROW(initial_rf(t, 11), ConfigError);
}

TEST(ColumnUpdate, NeverIncreasesTheResidual) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const int s = uniform_int(rng, 2, 12);
    const int k = uniform_int(rng, 1, 3);
    const int nrf = uniform_int(rng, k, std::max(k, std::min(s, 2 * k + 1)));
    if (nrf > s) continue;
    const MatrixXcd t = randn(s, k + 1, rng);
    MatrixXcd f = linalg::unit_phase(randn(s, nrf, rng), 1.0 / std::sqrt(double(s)));
    const MatrixXcd x = randn(nrf, k + 1, rng);
    const int col = uniform_int(rng, 0, nrf - 1);
    const double before = (t - f * x).squaredNorm();
    f.col(col) = frf_column_update(f, col, t, x);
    const double after = (t - f * x).squaredNorm();
    EXPECT_LE(after, before * (1 + 1e-12) + 1e-12) << trial;
    expect_constant_modulus(f.col(col));
  }
}

TEST(ColumnUpdate, ZeroCouplingRowKeepsColumn) {
  std::mt19937_64 rng(3);
  const MatrixXcd t = randn(4, 2, rng);
  const MatrixXcd f = linalg::unit_phase(randn(4, 2, rng), 0.5);
  MatrixXcd x = randn(2, 2, rng);
  x.row(1).setZero();
  EXPECT_EQ(frf_column_update(f, 1, t, x), VectorXcd(f.col(1)));
}

TEST(EmbedAn, IsTheProjectionOntoTheDataSubspace) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int s = uniform_int(rng, 3, 10);
    const int k = uniform_int(rng, 1, s - 1);
    const MatrixXcd w = randn(s, k, rng);
    const VectorXcd v = randn_vec(s, rng);
    bool fallback = false;
    const VectorXcd vp = embed_an(w, v, 1e-10, &fallback);
    EXPECT_FALSE(fallback);
    const VectorXcd proj = w * vp;
    // Residual is orthogonal to range(W).
    EXPECT_LT((w.adjoint() * (v - proj)).norm(), 1e-10 * v.norm() * w.norm());
    // Idempotent.
    const VectorXcd again = w * embed_an(w, proj);
    EXPECT_LT((again - proj).norm(), 1e-10 * std::max(proj.norm(), 1.0));
    EXPECT_LE(proj.norm(), v.norm() * (1 + 1e-12));
  }
}

TEST(EmbedAn, RankDeficientUsesPseudoInverse) {
  std::mt19937_64 rng(5);
  MatrixXcd w = randn(6, 3, rng);
  w.col(2) = w.col(0) * 2.0;
  bool fallback = false;
  const VectorXcd v = randn_vec(6, rng);
  const VectorXcd vp = embed_an(w, v, 1e-10, &fallback);
  EXPECT_TRUE(fallback);
  EXPECT_TRUE(vp.allFinite());
  EXPECT_LT((w.adjoint() * (v - w * vp)).norm(), 1e-9 * v.norm() * w.norm());
  EXPECT_THROW(embed_an(w, randn_vec(5, rng)), ConfigError);
}

TEST(Normalize, ScalesBasebandToTheBudget) {
  std::mt19937_64 rng(6);
  HybridRealization r;
  r.F_RF = linalg::unit_phase(randn(8, 4, rng), 1.0 / std::sqrt(8.0));
  r.F_BB = randn(4, 2, rng);
  r.v_pre = randn_vec(2, rng);
  const MatrixXcd frf = r.F_RF;
  const HybridRealization n = normalize_power(r, 0.01);
  EXPECT_NEAR(n.total_power(), 0.01, 1e-15);
  EXPECT_EQ(n.F_RF, frf);
  EXPECT_NEAR(n.alpha, std::sqrt(0.01 / r.total_power()), 1e-15);
}

TEST(Normalize, WorkedExample) {
  HybridRealization r;
  r.F_RF = MatrixXcd::Identity(2, 2);
  r.F_BB = MatrixXcd::Identity(2, 1) * 2.0;
  r.v_pre = VectorXcd::Constant(1, cd(1.0, 0.0));
  // W_HB = [2, 0]ᵀ, v_HB = [2, 0]ᵀ, total 8.
  EXPECT_DOUBLE_EQ(r.total_power(), 8.0);
  const HybridRealization n = normalize_power(r, 2.0);
  EXPECT_DOUBLE_EQ(n.alpha, 0.5);
  EXPECT_DOUBLE_EQ(n.total_power(), 2.0);
}

TEST(Normalize, ZeroRealizationIsReturnedAsIs) {
  HybridRealization r;
  r.F_RF = MatrixXcd::Constant(3, 2, cd(1.0 / std::sqrt(3.0), 0.0));
  r.F_BB = MatrixXcd::Zero(2, 1);
  r.v_pre = VectorXcd::Zero(1);
  const HybridRealization n = normalize_power(r, 1.0);
  EXPECT_EQ(n.alpha, 1.0);
  EXPECT_EQ(n.total_power(), 0.0);
  EXPECT_THROW(normalize_power(r, 0.0), ConfigError);
}

TEST(FitHybrid, ResidualTraceIsMonotoneAndModulusHolds) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int s = uniform_int(rng, 4, 24);
    const int k = uniform_int(rng, 1, std::min(3, s - 1));
    const int nrf = uniform_int(rng, k, std::min(s, 2 * k + 2));
    const MatrixXcd t = randn(s, k + 1, rng);
    const HybridRealization r = fit_hybrid(t, nrf, 1.0);
    expect_constant_modulus(r.F_RF);
    for (std::size_t i = 1; i < r.residual_trace.size(); ++i) {
      EXPECT_LE(r.residual_trace[i], r.residual_trace[i - 1] * (1 + 1e-10) + 1e-14) << trial;
    }
    EXPECT_NEAR(r.total_power(), 1.0, 1e-10);
    EXPECT_LE(r.sweeps, 100);
    EXPECT_LE(r.fit_residual, t.squaredNorm() * (1 + 1e-12));
  }
}

TEST(FitHybrid, ReachesTheRankKFloorWhenChainsCoverTheSupport) {
  // With N_RF = |S| the model F_RF·F_BB·[I, v_pre] spans every rank-K matrix
  // whose row space contains [I, v_pre], so the best fit leaves σ²_{K+1}(T).
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int s = 6, k = 2;
    const MatrixXcd t = randn(s, k + 1, rng);
    const double floor = Eigen::JacobiSVD<MatrixXcd>(t).singularValues()(k);
    const HybridRealization r = fit_hybrid(t, s, 1.0);
    EXPECT_GE(r.fit_residual, floor * floor * (1 - 1e-9));
    EXPECT_LE(r.fit_residual, floor * floor * (1 + 1e-3) + 1e-9 * t.squaredNorm()) << trial;
  }
}

TEST(FitHybrid, ZeroTargetGivesZeroPower) {
  const MatrixXcd t = MatrixXcd::Zero(5, 3);
  const HybridRealization r = fit_hybrid(t, 3, 1.0);
  EXPECT_EQ(r.total_power(), 0.0);
  expect_constant_modulus(r.F_RF);
}

TEST(FitHybrid, RejectsBadShapes) {
  std::mt19937_64 rng(9);
  EXPECT_THROW(fit_hybrid(randn(5, 1, rng), 2, 1.0), ConfigError);
  EXPECT_THROW(fit_hybrid(randn(5, 3, rng), 1, 1.0), ConfigError);
  MatrixXcd bad = randn(5, 3, rng);
  bad(0, 0) = cd(NAN, 0.0);
  EXPECT_THROW(fit_hybrid(bad, 3, 1.0), NumericalError);
}

}  // namespace
}  // namespace fasec
