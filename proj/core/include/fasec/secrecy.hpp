#pragma once

#include <vector>

#include "fasec/geometry.hpp"
#include "fasec/linalg.hpp"

namespace fasec {

/// Dense digital precoder and AN vector on an ordered port support.
struct BeamformerState {
  MatrixXcd W;   // |S| × K
  VectorXcd v;   // |S|
  double power_budget = 0.0;
  std::vector<int> support;

  double total_power() const { return W.squaredNorm() + v.squaredNorm(); }
  /// Tr(WWᴴ) + ‖v‖² ≤ P_t(1 + slack).
  bool within_budget(double slack = 1e-9) const;
};

/// Achievable rate (bits/s/Hz) of a receiver with whitened channel h:
/// log₂det(I + h(S+A)hᴴ) − log₂det(I + hAhᴴ), S = WWᴴ, A = vvᴴ.
double link_rate(const MatrixXcd& h, const MatrixXcd& W, const VectorXcd& v);

inline double rate_bob(const MatrixXcd& hb, const MatrixXcd& W, const VectorXcd& v) {
  return link_rate(hb, W, v);
}
inline double rate_eve(const MatrixXcd& he, const MatrixXcd& W, const VectorXcd& v) {
  return link_rate(he, W, v);
}
inline double rate_bob(const MatrixXcd& hb, const BeamformerState& s) {
  return link_rate(hb, s.W, s.v);
}
inline double rate_eve(const MatrixXcd& he, const BeamformerState& s) {
  return link_rate(he, s.W, s.v);
}

/// [R_B − R_E]⁺.
double secrecy_rate(const MatrixXcd& hb, const MatrixXcd& he, const MatrixXcd& W,
                    const VectorXcd& v);
inline double secrecy_rate(const MatrixXcd& hb, const MatrixXcd& he,
                           const BeamformerState& s) {
  return secrecy_rate(hb, he, s.W, s.v);
}

/// The three log-det terms whose combination r1 + r2 − r3 equals R_B − R_E.
/// Values in bits.
struct RateDecomposition {
  double r1 = 0.0;  // Bob SINR term
  double r2 = 0.0;  // Eve AN-only term
  double r3 = 0.0;  // Eve signal-plus-AN term

  double secrecy_gap() const { return r1 + r2 - r3; }
};

RateDecomposition decompose_r123(const MatrixXcd& hb, const MatrixXcd& he,
                                 const MatrixXcd& W, const VectorXcd& v);

/// Power reported for an exactly-zero field sample.
inline constexpr double kDbmFloor = -200.0;

struct FieldSample {
  double x = 0.0;
  double y = 0.0;
  double rsp_dbm = kDbmFloor;  // ‖h(p)W‖²
  double inp_dbm = kDbmFloor;  // ‖h(p)v‖² + σ²
};

struct GridPoint {
  double x;
  double y;
};

/// Received-signal and interference-plus-noise power of a single isotropic
/// probe element at each grid point, for a state living on `state.support`.
std::vector<FieldSample> field_power_maps(const ScenarioGeometry& g,
                                          const BeamformerState& state,
                                          const std::vector<GridPoint>& grid);

/// Rectangular nx × ny grid, row-major in y then x.
std::vector<GridPoint> rectangular_grid(double x_min, double x_max, int nx, double y_min,
                                        double y_max, int ny);

}  // namespace fasec
