#pragma once

#include <vector>

#include "fasec/linalg.hpp"

namespace fasec {

struct HybridOptions {
  int max_sweeps = 100;
  double tol_rel = 1e-6;     // relative residual change that ends the fit
  double pinv_rtol = 1e-10;  // singular values below rtol·σ_max are dropped
};

/// Constant-modulus RF precoder, baseband precoder and baseband AN weight.
struct HybridRealization {
  MatrixXcd F_RF;  // |S| × N_RF, |entries| = 1/√|S|
  MatrixXcd F_BB;  // N_RF × K
  VectorXcd v_pre; // K

  double fit_residual = 0.0;             // ‖T − F_RF F_BB [I, v_pre]‖²_F before scaling
  std::vector<double> residual_trace;    // residual after each sweep
  int sweeps = 0;
  bool pinv_fallback = false;
  double alpha = 1.0;                    // last applied power gain

  MatrixXcd W_HB() const { return F_RF * F_BB; }
  VectorXcd v_HB() const { return F_RF * (F_BB * v_pre); }
  /// Tr(T_HB T_HBᴴ) with T_HB = [W_HB, v_HB].
  double total_power() const;
};

/// ‖T − F_RF F_BB [I, v_pre]‖²_F.
double hybrid_residual(const MatrixXcd& target, const MatrixXcd& F_RF, const MatrixXcd& F_BB,
                       const VectorXcd& v_pre);

/// Initial RF matrix: phases of the first n_rf left singular vectors of the
/// target, modulus 1/√|S|.
MatrixXcd initial_rf(const MatrixXcd& target, int n_rf);

/// Phase projection of one RF column given the coupling X = F_BB·[I, v_pre]:
/// f_n = e^{ι∠g_n}/√|S| with g_n = (T − Y + f_n x_nᴴ)x_n/‖x_n‖², Y = F_RF X.
/// Returns the current column unchanged when ‖x_n‖ = 0.
VectorXcd frf_column_update(const MatrixXcd& F_RF, int column, const MatrixXcd& target,
                            const MatrixXcd& X);

/// Least-squares AN weight (W_HBᴴW_HB)⁻¹W_HBᴴṽ; v_HB = W_HB v_pre is the
/// projection of ṽ onto range(W_HB). Uses a pseudo-inverse when W_HB is
/// rank deficient and reports it through `fallback`.
VectorXcd embed_an(const MatrixXcd& W_HB, const VectorXcd& v_bal, double pinv_rtol = 1e-10,
                   bool* fallback = nullptr);

/// Scales F_BB by α = √(P_t / Tr(T_HB T_HBᴴ)); F_RF is untouched. A zero
/// realization is returned as is.
HybridRealization normalize_power(HybridRealization r, double power_budget);

/// Alternating fit of T_bal = [W̃_bal, ṽ_bal] (|S| × (K+1)) followed by the
/// trace-based power normalization.
HybridRealization fit_hybrid(const MatrixXcd& target, int n_rf, double power_budget,
                             const HybridOptions& opts = {});

}  // namespace fasec
