#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "fasec/linalg.hpp"

namespace fasec {

// ---------------------------------------------------------------------------
// Auxiliary variables of the variational (MMSE-weighted) secrecy surrogate.
// All log quantities here are natural log.
// ---------------------------------------------------------------------------

struct BobAux {
  MatrixXcd U;  // N_u × K MMSE receive filter
  MatrixXcd G;  // K × K MMSE matrix
  MatrixXcd Q;  // G⁻¹
};

struct EveAux {
  VectorXcd u;   // N_e MMSE filter for the AN stream
  double G = 1;  // scalar MSE
  double Q = 1;  // 1/G
};

struct AuxiliaryState {
  MatrixXcd U_B;
  MatrixXcd Q_B;
  VectorXcd u_E;
  double Q_E = 1.0;
  MatrixXcd Q_Z;
};

/// U_B = (J_B + H̄W̃W̃ᴴH̄ᴴ)⁻¹H̄W̃ with J_B = I + H̄ṽṽᴴH̄ᴴ, G_B the MMSE matrix,
/// Q_B = G_B⁻¹.
BobAux update_bob_aux(const MatrixXcd& hb, const MatrixXcd& W, const VectorXcd& v);

/// u_E = (I + H̄ṽṽᴴH̄ᴴ)⁻¹H̄ṽ, G_E = |1 − u_Eᴴ H̄ṽ|² + ‖u_E‖², Q_E = 1/G_E.
EveAux update_eve_aux(const MatrixXcd& he, const VectorXcd& v);

/// Q_Z = (I + H̄_E T Tᴴ H̄_Eᴴ)⁻¹, T = [W̃, ṽ].
MatrixXcd update_z_aux(const MatrixXcd& he, const MatrixXcd& W, const VectorXcd& v);

AuxiliaryState update_auxiliaries(const MatrixXcd& hb, const MatrixXcd& he,
                                  const MatrixXcd& W, const VectorXcd& v);

/// Quadratic surrogate data for fixed auxiliaries:
///   f(W̃, ṽ) = −Tr(W̃ᴴAW̃) + 2Re Tr(R_wᴴW̃) − ṽᴴBṽ + 2Re(r_vᴴṽ) + constant.
struct CurvatureSystem {
  MatrixXcd A;    // F_b + C
  MatrixXcd B;    // F_b + F_e + C
  MatrixXcd R_w;  // |S| × K
  VectorXcd r_v;  // |S|
  MatrixXcd F_b;
  MatrixXcd F_e;
  MatrixXcd C;
  double constant = 0.0;  // c_B + c_E + c_Z

  /// Optional orthonormal basis whose span contains the ranges of A and B
  /// and the linear terms (empty when |S| ≤ N_u + N_e). Lets the spectral
  /// solver diagonalize an r×r compression instead of the |S|×|S| matrix.
  MatrixXcd range_basis;

  Eigen::Index ports() const { return A.rows(); }
  Eigen::Index streams() const { return R_w.cols(); }
};

CurvatureSystem build_curvature(const MatrixXcd& hb, const MatrixXcd& he,
                                const AuxiliaryState& aux);

/// Surrogate value f(W̃, ṽ) in nats. Equals r1 + r2 − r3 (nats) when the
/// auxiliaries were computed at (W̃, ṽ).
double surrogate_value(const CurvatureSystem& curv, const MatrixXcd& W, const VectorXcd& v);

struct PrimalSolution {
  MatrixXcd W;
  VectorXcd v;
};

/// Direct route: W̃ = (A + λI)⁻¹R_w, ṽ = (B + λI)⁻¹r_v via Cholesky. At
/// λ = 0 a singular A or B receives the ridge 10⁻¹²·Tr(·)/|S|.
PrimalSolution solve_primal(const CurvatureSystem& curv, double lambda);

/// Eigen-basis form of a curvature system: A = Z_A Ξ_A Z_Aᴴ, R̂ = Z_Aᴴ R_w
/// (and likewise for B, r_v). When the system carries a range basis only
/// the non-trivial modes are stored; the complement has zero curvature and
/// zero linear term.
class SpectralSystem {
 public:
  explicit SpectralSystem(const CurvatureSystem& curv);

  /// Σ‖R̂_i‖²/(ξ_A,i + λ)² + Σ|r̂_i|²/(ξ_B,i + λ)². At λ = 0 numerically
  /// null modes (ξ ≤ 10⁻¹²·ξ_max) are skipped.
  double power(double lambda) const;
  /// Mode-wise shrinkage solution at λ; pseudo-inverse at λ = 0.
  PrimalSolution primal(double lambda) const;
  /// Power at λ = 0 with the ridges below added to every mode.
  double probe_power() const;

  /// Ridges that make the λ = 0 probe well posed (0 when not needed).
  double ridge_a() const { return ridge_a_; }
  double ridge_b() const { return ridge_b_; }

  const VectorXd& values_a() const { return xi_a_; }
  const VectorXd& values_b() const { return xi_b_; }
  /// Squared row norms ‖R̂_i‖² and |r̂_i|².
  const VectorXd& weights_a() const { return wa_; }
  const VectorXd& weights_b() const { return wb_; }

 private:
  Eigen::Index ports_;
  Eigen::Index streams_;
  MatrixXcd za_, zb_;
  VectorXd xi_a_, xi_b_;
  MatrixXcd r_hat_;
  VectorXcd rv_hat_;
  VectorXd wa_, wb_;
  double ridge_a_ = 0.0;
  double ridge_b_ = 0.0;
};

struct WaterfillResult {
  double lambda = 0.0;
  MatrixXcd W;
  VectorXcd v;
  double delivered_power = 0.0;
  int bisection_steps = 0;
};

/// Total-power water-filling: λ* = 0 when the unconstrained maximizer fits
/// the budget (checked by the ridged probe), otherwise the unique root of power(λ) = P_t by safeguarded
/// bisection. Throws NumericalError if no bracket is found in 200 doublings.
WaterfillResult waterfill(const CurvatureSystem& curv, double power_budget);

/// K-point unitary DFT matrix.
MatrixXcd dft_matrix(int k);

/// {I, DFT, `random_count` Haar-like unitaries from a seeded Gaussian QR}.
std::vector<MatrixXcd> unitary_dictionary(int k, int random_count = 8,
                                          std::uint64_t seed = 0x5eedULL);

/// max_k p_k / min_k p_k with p = diag(WᴴW); +∞ if some p_k = 0 < max.
double peak_to_valley(const MatrixXcd& W);

struct BalanceResult {
  MatrixXcd W;
  int chosen = 0;  // dictionary index
  double ratio_before = 1.0;
  double ratio_after = 1.0;
};

/// Right-rotates W̃ by the dictionary member with the smallest peak-to-valley
/// stream power ratio (first occurrence wins ties).
BalanceResult balance_streams(const MatrixXcd& W, const std::vector<MatrixXcd>& dictionary);

struct BcdOptions {
  double tol_rel = 1e-4;
  int max_iters = 200;
  bool with_an = true;
  bool balance = true;
  int dictionary_random = 8;
  std::uint64_t dictionary_seed = 0x5eedULL;
};

struct BcdIteration {
  double objective_bits = 0.0;   // R_B − R_E after the update (unclamped)
  double surrogate_nats = 0.0;   // surrogate at the update, previous auxiliaries
  double rate_bob = 0.0;
  double rate_eve = 0.0;
  double lambda = 0.0;
  double an_power = 0.0;
  bool decreased = false;        // objective fell by more than 10⁻⁶
};

struct BcdResult {
  MatrixXcd W;      // balanced
  MatrixXcd W_raw;  // before balancing; pairs with last_curvature
  VectorXcd v;
  double lambda = 0.0;
  double objective_bits = 0.0;  // R_B − R_E of the returned state
  double initial_objective_bits = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  int balance_index = 0;
  std::vector<BcdIteration> trace;
  CurvatureSystem last_curvature;  // system that produced the final iterate
};

/// Block coordinate ascent on the secrecy surrogate for a fixed support.
/// `W0`, `v0` must satisfy the budget. With `with_an = false` the AN
/// linear term is zeroed each iteration so ṽ stays 0.
BcdResult bcd_optimize(const MatrixXcd& hb, const MatrixXcd& he, double power_budget,
                       const MatrixXcd& W0, const VectorXcd& v0, const BcdOptions& opts = {});

/// i.i.d. CN(0,1) W̃ (|S|×K) and ṽ scaled jointly to Tr + ‖ṽ‖² = P_t.
/// `with_an = false` returns ṽ = 0 with all power on W̃.
template <class Rng>
std::pair<MatrixXcd, VectorXcd> random_initial_state(Eigen::Index ports, Eigen::Index streams,
                                                     double power_budget, bool with_an,
                                                     Rng& rng) {
  MatrixXcd W = linalg::complex_gaussian(ports, streams, rng);
  VectorXcd v = linalg::complex_gaussian(ports, 1, rng).col(0);
  if (!with_an) v.setZero();
  const double p = W.squaredNorm() + v.squaredNorm();
  const double s = p > 0.0 ? std::sqrt(power_budget / p) : 0.0;
  return {W * s, v * s};
}

}  // namespace fasec
