#include "fasec/hybrid.hpp"

#include <algorithm>
#include <cmath>

#include "fasec/error.hpp"

namespace fasec {

namespace {

// Least-squares solve m·x = rhs through a thresholded SVD. Sets *deficient
// when some singular value falls below rtol·σ_max.
MatrixXcd lstsq(const MatrixXcd& m, const MatrixXcd& rhs, double rtol, bool* deficient) {
  if (m.cols() == 0) return MatrixXcd::Zero(0, rhs.cols());
  Eigen::JacobiSVD<MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? rtol * s(0) : 0.0;
  VectorXd inv = VectorXd::Zero(s.size());
  bool short_rank = s.size() < m.cols();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) {
      inv(i) = 1.0 / s(i);
    } else {
      short_rank = true;
    }
  }
  if (deficient != nullptr && short_rank) *deficient = true;
  return svd.matrixV() * (inv.asDiagonal() * (svd.matrixU().adjoint() * rhs));
}

double modulus_for(Eigen::Index rows) { return 1.0 / std::sqrt(static_cast<double>(rows)); }

MatrixXcd coupling(const VectorXcd& v_pre) {
  const Eigen::Index k = v_pre.size();
  MatrixXcd s(k, k + 1);
  s << MatrixXcd::Identity(k, k), v_pre;
  return s;
}

}  // namespace

double HybridRealization::total_power() const {
  const MatrixXcd w = W_HB();
  return w.squaredNorm() + (w * v_pre).squaredNorm();
}

double hybrid_residual(const MatrixXcd& target, const MatrixXcd& F_RF, const MatrixXcd& F_BB,
                       const VectorXcd& v_pre) {
  return (target - F_RF * (F_BB * coupling(v_pre))).squaredNorm();
}

MatrixXcd initial_rf(const MatrixXcd& target, int n_rf) {
  if (n_rf < 1 || n_rf > target.rows()) {
    throw ConfigError("RF chain count must lie in [1, |S|]");
  }
  // Full U: N_RF may exceed the rank of the (K+1)-column target.
  Eigen::JacobiSVD<MatrixXcd> svd(target, Eigen::ComputeFullU);
  return linalg::unit_phase(svd.matrixU().leftCols(n_rf), modulus_for(target.rows()));
}

VectorXcd frf_column_update(const MatrixXcd& F_RF, int column, const MatrixXcd& target,
                            const MatrixXcd& X) {
  const VectorXcd x = X.row(column).adjoint();
  const double xx = x.squaredNorm();
  if (xx == 0.0) return F_RF.col(column);
  const MatrixXcd y = F_RF * X;
  const VectorXcd g =
      ((target - y) * x + F_RF.col(column) * xx) / xx;  // (T − Y + f xᴴ)x/‖x‖²
  return linalg::unit_phase(g, modulus_for(F_RF.rows())).col(0);
}

VectorXcd embed_an(const MatrixXcd& W_HB, const VectorXcd& v_bal, double pinv_rtol,
                   bool* fallback) {
  if (W_HB.rows() != v_bal.size()) throw ConfigError("AN vector length mismatch");
  return lstsq(W_HB, v_bal, pinv_rtol, fallback).col(0);
}

HybridRealization normalize_power(HybridRealization r, double power_budget) {
  if (!(power_budget > 0.0)) throw ConfigError("power budget must be positive");
  const double p = r.total_power();
  if (p == 0.0) {
    r.alpha = 1.0;
    return r;
  }
  if (!std::isfinite(p)) throw NumericalError("hybrid power is not finite");
  r.alpha = std::sqrt(power_budget / p);
  r.F_BB *= r.alpha;
  return r;
}

HybridRealization fit_hybrid(const MatrixXcd& target, int n_rf, double power_budget,
                             const HybridOptions& opts) {
  if (target.cols() < 2) throw ConfigError("hybrid target needs K ≥ 1 data columns plus AN");
  const Eigen::Index k = target.cols() - 1;
  if (n_rf < k) throw ConfigError("RF chain count must be at least the stream count");
  if (!target.allFinite()) throw NumericalError("hybrid target is not finite");

  const VectorXcd v_target = target.col(k);

  HybridRealization r;
  r.F_RF = initial_rf(target, n_rf);
  r.v_pre = VectorXcd::Zero(k);
  r.F_BB = MatrixXcd::Zero(n_rf, k);

  double prev = target.squaredNorm();
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    // Baseband precoder.
    // T·S⁺ with S = [I, v]: (SSᴴ)⁻¹ = I − v vᴴ/(1 + ‖v‖²). Expanded so a large v never
    // forms T_d + t_v vᴴ, which cancels catastrophically against the projector.
    const double gain = 1.0 / (1.0 + r.v_pre.squaredNorm());
    const MatrixXcd rhs = target.leftCols(k) -
                          (target.leftCols(k) * r.v_pre) * (gain * r.v_pre.adjoint()) +
                          v_target * (gain * r.v_pre.adjoint());
    r.F_BB = lstsq(r.F_RF, rhs, opts.pinv_rtol, &r.pinv_fallback);

    // Column-space AN weight.
    r.v_pre = embed_an(r.F_RF * r.F_BB, v_target, opts.pinv_rtol, &r.pinv_fallback);

    // RF columns in index order, keeping Y = F_RF X current.
    const MatrixXcd x = r.F_BB * coupling(r.v_pre);
    MatrixXcd y = r.F_RF * x;
    for (int n = 0; n < n_rf; ++n) {
      const VectorXcd xn = x.row(n).adjoint();
      const double xx = xn.squaredNorm();
      if (xx == 0.0) continue;
      const VectorXcd g = ((target - y) * xn + r.F_RF.col(n) * xx) / xx;
      const VectorXcd f = linalg::unit_phase(g, modulus_for(target.rows())).col(0);
      y += (f - r.F_RF.col(n)) * x.row(n);
      r.F_RF.col(n) = f;
    }

    const double res = (target - y).squaredNorm();
    if (!std::isfinite(res)) throw NumericalError("hybrid fit residual is not finite");
    r.residual_trace.push_back(res);
    r.sweeps = sweep + 1;
    const double prev_before = prev;
    const double change = std::abs(prev - res);
    prev = res;
    if (res == 0.0 || change < opts.tol_rel * std::max(prev_before, 1e-300)) break;
  }
  r.fit_residual = hybrid_residual(target, r.F_RF, r.F_BB, r.v_pre);
  return normalize_power(std::move(r), power_budget);
}

}  // namespace fasec
