#include "fasec/bcd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fasec/error.hpp"
#include "fasec/secrecy.hpp"

namespace fasec {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kSingularRtol = 1e-12;
constexpr double kRidgeScale = 1e-12;
constexpr int kMaxDoublings = 200;
constexpr int kMaxBisections = 200;
constexpr double kPowerRtol = 1e-8;
constexpr double kDecreaseTol = 1e-6;

void require_same_ports(const MatrixXcd& hb, const MatrixXcd& he, const MatrixXcd& W,
                        const VectorXcd& v) {
  if (hb.cols() != W.rows() || he.cols() != W.rows() || v.size() != W.rows()) {
    throw ConfigError("dimension mismatch between channels and beamformers");
  }
}

double ridge_for(const MatrixXcd& m, const VectorXd& values) {
  if (values.size() == 0) return 0.0;
  const double top = std::max(values.maxCoeff(), 0.0);
  if (values.minCoeff() > kSingularRtol * top && top > 0.0) return 0.0;
  return kRidgeScale * m.trace().real() / static_cast<double>(m.rows());
}

// Modes with values at or below `floor` are dropped (pseudo-inverse at λ = 0).
MatrixXcd shrink(const MatrixXcd& z, const VectorXd& values, const MatrixXcd& rhs_hat,
                 const VectorXd& weights, double shift, double floor) {
  MatrixXcd scaled = rhs_hat;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (weights(i) == 0.0 || values(i) + shift <= floor) {
      scaled.row(i).setZero();
    } else {
      scaled.row(i) /= values(i) + shift;
    }
  }
  return z * scaled;
}

double mode_power(const VectorXd& values, const VectorXd& weights, double shift, double floor) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double denom = values(i) + shift;
    if (weights(i) == 0.0 || denom <= floor) continue;
    acc += weights(i) / (denom * denom);
  }
  return acc;
}

double null_floor(const VectorXd& values) {
  return values.size() > 0 ? kSingularRtol * std::max(values.maxCoeff(), 0.0) : 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Auxiliary updates
// ---------------------------------------------------------------------------

BobAux update_bob_aux(const MatrixXcd& hb, const MatrixXcd& W, const VectorXcd& v) {
  const Eigen::Index nu = hb.rows();
  const MatrixXcd hw = hb * W;
  const VectorXcd hv = hb * v;
  const MatrixXcd J = MatrixXcd::Identity(nu, nu) + hv * hv.adjoint();
  const MatrixXcd M = linalg::hermitian_part(J + hw * hw.adjoint());

  Eigen::LLT<MatrixXcd> m_llt(M);
  Eigen::LLT<MatrixXcd> j_llt(linalg::hermitian_part(J));
  if (m_llt.info() != Eigen::Success || j_llt.info() != Eigen::Success) {
    throw NumericalError("Bob auxiliary update: factorization failed",
                         linalg::inverse_condition(M));
  }
  BobAux aux;
  aux.U = m_llt.solve(hw);
  const Eigen::Index k = W.cols();
  aux.Q = linalg::hermitian_part(MatrixXcd::Identity(k, k) + hw.adjoint() * j_llt.solve(hw));
  aux.G = linalg::hermitian_part(linalg::inverse_hpd(aux.Q));
  return aux;
}

EveAux update_eve_aux(const MatrixXcd& he, const VectorXcd& v) {
  const Eigen::Index ne = he.rows();
  const VectorXcd hv = he * v;
  const MatrixXcd J = MatrixXcd::Identity(ne, ne) + hv * hv.adjoint();
  Eigen::LLT<MatrixXcd> llt(linalg::hermitian_part(J));
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Eve auxiliary update: factorization failed");
  }
  EveAux aux;
  aux.u = llt.solve(hv);
  const cd gain = aux.u.dot(hv);  // uᴴ H̄ṽ
  aux.G = std::norm(1.0 - gain) + aux.u.squaredNorm();
  if (!(aux.G > 0.0) || !std::isfinite(aux.G)) {
    throw NumericalError("Eve auxiliary update: MSE is not positive", aux.G);
  }
  aux.Q = 1.0 / aux.G;
  return aux;
}

MatrixXcd update_z_aux(const MatrixXcd& he, const MatrixXcd& W, const VectorXcd& v) {
  const Eigen::Index ne = he.rows();
  MatrixXcd t(W.rows(), W.cols() + 1);
  t << W, v;
  const MatrixXcd ht = he * t;
  const MatrixXcd G = linalg::hermitian_part(MatrixXcd::Identity(ne, ne) + ht * ht.adjoint());
  return linalg::hermitian_part(linalg::inverse_hpd(G));
}

AuxiliaryState update_auxiliaries(const MatrixXcd& hb, const MatrixXcd& he, const MatrixXcd& W,
                                  const VectorXcd& v) {
  require_same_ports(hb, he, W, v);
  BobAux bob = update_bob_aux(hb, W, v);
  EveAux eve = update_eve_aux(he, v);
  AuxiliaryState aux;
  aux.U_B = std::move(bob.U);
  aux.Q_B = std::move(bob.Q);
  aux.u_E = std::move(eve.u);
  aux.Q_E = eve.Q;
  aux.Q_Z = update_z_aux(he, W, v);
  return aux;
}

// ---------------------------------------------------------------------------
// Curvature system and surrogate
// ---------------------------------------------------------------------------

CurvatureSystem build_curvature(const MatrixXcd& hb, const MatrixXcd& he,
                                const AuxiliaryState& aux) {
  const Eigen::Index ports = hb.cols();
  const Eigen::Index k = aux.U_B.cols();
  const Eigen::Index ne = he.rows();

  CurvatureSystem c;
  const MatrixXcd x = hb.adjoint() * aux.U_B;  // |S| × K
  c.R_w = x * aux.Q_B;
  c.F_b = linalg::hermitian_part(c.R_w * x.adjoint());

  const VectorXcd y = he.adjoint() * aux.u_E;
  c.r_v = aux.Q_E * y;
  c.F_e = linalg::hermitian_part(c.r_v * y.adjoint());

  c.C = linalg::hermitian_part(he.adjoint() * (aux.Q_Z * he));
  c.A = c.F_b + c.C;
  c.B = c.F_b + c.F_e + c.C;

  const double c_b = linalg::logdet_hpd(aux.Q_B) + static_cast<double>(k) -
                     aux.Q_B.trace().real() -
                     (aux.Q_B * (aux.U_B.adjoint() * aux.U_B)).trace().real();
  const double c_e = std::log(aux.Q_E) + 1.0 - aux.Q_E * (1.0 + aux.u_E.squaredNorm());
  const double c_z =
      static_cast<double>(ne) + linalg::logdet_hpd(aux.Q_Z) - aux.Q_Z.trace().real();
  c.constant = c_b + c_e + c_z;

  if (hb.rows() + he.rows() < ports) {
    MatrixXcd span(ports, hb.rows() + he.rows());
    span << hb.adjoint(), he.adjoint();
    c.range_basis = linalg::orthonormal_basis(span);
  }
  return c;
}

double surrogate_value(const CurvatureSystem& curv, const MatrixXcd& W, const VectorXcd& v) {
  const double quad_w = (W.adjoint() * (curv.A * W)).trace().real();
  const double lin_w = (curv.R_w.adjoint() * W).trace().real();
  const double quad_v = v.dot(curv.B * v).real();
  const double lin_v = curv.r_v.dot(v).real();
  return -quad_w + 2.0 * lin_w - quad_v + 2.0 * lin_v + curv.constant;
}

PrimalSolution solve_primal(const CurvatureSystem& curv, double lambda) {
  if (lambda < 0.0) throw ConfigError("water level must be nonnegative");
  const Eigen::Index n = curv.ports();
  auto solve = [&](const MatrixXcd& m, const MatrixXcd& rhs) -> MatrixXcd {
    double shift = lambda;
    if (lambda == 0.0) {
      const VectorXd values = linalg::eigh(m).values;
      shift = ridge_for(m, values);
      if (shift == 0.0 && values.size() > 0 && values.maxCoeff() <= 0.0) {
        // Zero curvature: bounded only when the linear term vanishes.
        if (rhs.norm() > 0.0) throw NumericalError("unbounded surrogate at λ = 0");
        return MatrixXcd::Zero(rhs.rows(), rhs.cols());
      }
    }
    const MatrixXcd shifted = m + shift * MatrixXcd::Identity(n, n);
    Eigen::LLT<MatrixXcd> llt(shifted);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("primal solve: shifted curvature is not positive definite",
                           linalg::inverse_condition(shifted));
    }
    return llt.solve(rhs);
  };
  PrimalSolution out;
  out.W = solve(curv.A, curv.R_w);
  out.v = solve(curv.B, curv.r_v).col(0);
  return out;
}

// ---------------------------------------------------------------------------
// Spectral water-filling
// ---------------------------------------------------------------------------

SpectralSystem::SpectralSystem(const CurvatureSystem& curv)
    : ports_(curv.ports()), streams_(curv.streams()) {
  auto decompose = [&](const MatrixXcd& m, MatrixXcd& z, VectorXd& xi) {
    linalg::HermitianSpectrum spec;
    if (curv.range_basis.size() > 0) {
      const MatrixXcd& q = curv.range_basis;
      spec = linalg::eigh(linalg::hermitian_part(q.adjoint() * (m * q)));
      z = q * spec.vectors;
    } else {
      spec = linalg::eigh(m);
      z = std::move(spec.vectors);
    }
    xi = spec.values.cwiseMax(0.0);
  };
  decompose(curv.A, za_, xi_a_);
  decompose(curv.B, zb_, xi_b_);
  r_hat_ = za_.adjoint() * curv.R_w;
  rv_hat_ = zb_.adjoint() * curv.r_v;
  wa_ = r_hat_.rowwise().squaredNorm();
  wb_ = rv_hat_.cwiseAbs2();
  ridge_a_ = ridge_for(curv.A, xi_a_);
  ridge_b_ = ridge_for(curv.B, xi_b_);
}

double SpectralSystem::power(double lambda) const {
  if (lambda > 0.0) return mode_power(xi_a_, wa_, lambda, -1.0) + mode_power(xi_b_, wb_, lambda, -1.0);
  return mode_power(xi_a_, wa_, 0.0, null_floor(xi_a_)) +
         mode_power(xi_b_, wb_, 0.0, null_floor(xi_b_));
}

double SpectralSystem::probe_power() const {
  return mode_power(xi_a_, wa_, ridge_a_, -1.0) + mode_power(xi_b_, wb_, ridge_b_, -1.0);
}

PrimalSolution SpectralSystem::primal(double lambda) const {
  const double fa = lambda > 0.0 ? -1.0 : null_floor(xi_a_);
  const double fb = lambda > 0.0 ? -1.0 : null_floor(xi_b_);
  PrimalSolution out;
  out.W = shrink(za_, xi_a_, r_hat_, wa_, lambda, fa);
  out.v = shrink(zb_, xi_b_, rv_hat_, wb_, lambda, fb).col(0);
  return out;
}

WaterfillResult waterfill(const CurvatureSystem& curv, double power_budget) {
  if (!(power_budget > 0.0)) throw ConfigError("power budget must be positive");
  const SpectralSystem spec(curv);

  WaterfillResult out;
  // The ridged probe exposes unbounded null-space directions; the returned
  // λ = 0 point itself is the minimum-norm (pseudo-inverse) maximizer.
  const double probe = spec.probe_power();
  const double p0 = spec.power(0.0);
  if (std::isfinite(probe) && probe <= power_budget && p0 <= power_budget) {
    PrimalSolution sol = spec.primal(0.0);
    out.lambda = 0.0;
    out.W = std::move(sol.W);
    out.v = std::move(sol.v);
    out.delivered_power = p0;
    return out;
  }

  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (spec.power(hi) >= power_budget) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > kMaxDoublings) {
      throw NumericalError("water-filling: bracket expansion failed", hi);
    }
  }

  double mid = hi;
  double p_mid = spec.power(hi);
  int steps = 0;
  for (; steps < kMaxBisections; ++steps) {
    if (std::abs(p_mid - power_budget) <= kPowerRtol * power_budget && mid > lo) break;
    const double next = 0.5 * (lo + hi);
    if (next <= lo || next >= hi) break;
    mid = next;
    p_mid = spec.power(mid);
    if (p_mid > power_budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  PrimalSolution sol = spec.primal(mid);
  out.lambda = mid;
  out.W = std::move(sol.W);
  out.v = std::move(sol.v);
  out.delivered_power = p_mid;
  out.bisection_steps = steps;
  return out;
}

// ---------------------------------------------------------------------------
// Stream balancing
// ---------------------------------------------------------------------------

MatrixXcd dft_matrix(int k) {
  MatrixXcd f(k, k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(r * c) / k;
      f(r, c) = std::polar(scale, phase);
    }
  }
  return f;
}

std::vector<MatrixXcd> unitary_dictionary(int k, int random_count, std::uint64_t seed) {
  std::vector<MatrixXcd> dict;
  dict.reserve(static_cast<std::size_t>(2 + std::max(random_count, 0)));
  dict.push_back(MatrixXcd::Identity(k, k));
  dict.push_back(dft_matrix(k));
  std::mt19937_64 rng(seed);
  for (int i = 0; i < random_count; ++i) {
    const MatrixXcd g = linalg::complex_gaussian(k, k, rng);
    Eigen::HouseholderQR<MatrixXcd> qr(g);
    dict.push_back(qr.householderQ() * MatrixXcd::Identity(k, k));
  }
  return dict;
}

double peak_to_valley(const MatrixXcd& W) {
  const VectorXd p = W.colwise().squaredNorm().transpose();
  if (p.size() == 0) return 1.0;
  const double hi = p.maxCoeff();
  const double lo = p.minCoeff();
  if (hi <= 0.0) return 1.0;
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

BalanceResult balance_streams(const MatrixXcd& W, const std::vector<MatrixXcd>& dictionary) {
  BalanceResult out;
  out.W = W;
  out.ratio_before = peak_to_valley(W);
  out.ratio_after = out.ratio_before;
  if (W.cols() <= 1 || W.squaredNorm() == 0.0) return out;

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dictionary.size(); ++i) {
    const MatrixXcd& omega = dictionary[i];
    if (omega.rows() != W.cols() || omega.cols() != W.cols()) {
      throw ConfigError("balancing dictionary has the wrong dimension");
    }
    const double ratio = peak_to_valley(W * omega);
    if (ratio < best) {
      best = ratio;
      out.chosen = static_cast<int>(i);
    }
  }
  if (!std::isfinite(best) && !std::isfinite(out.ratio_before)) return out;
  out.W = W * dictionary[static_cast<std::size_t>(out.chosen)];
  out.ratio_after = best;
  return out;
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

BcdResult bcd_optimize(const MatrixXcd& hb, const MatrixXcd& he, double power_budget,
                       const MatrixXcd& W0, const VectorXcd& v0, const BcdOptions& opts) {
  require_same_ports(hb, he, W0, v0);
  if (!(power_budget > 0.0)) throw ConfigError("power budget must be positive");
  if (opts.max_iters < 0) throw ConfigError("max_iters must be nonnegative");

  MatrixXcd W = W0;
  VectorXcd v = opts.with_an ? v0 : VectorXcd::Zero(v0.size());
  if (W.squaredNorm() + v.squaredNorm() > power_budget * (1.0 + 1e-8)) {
    throw ConfigError("initial state exceeds the power budget");
  }

  auto objective = [&](const MatrixXcd& w, const VectorXcd& a) {
    return rate_bob(hb, w, a) - rate_eve(he, w, a);
  };

  BcdResult res;
  double obj = objective(W, v);
  res.initial_objective_bits = obj;

  MatrixXcd best_W = W;
  VectorXcd best_v = v;
  double best_obj = obj;
  double best_lambda = 0.0;
  CurvatureSystem best_curv;

  for (int it = 0; it < opts.max_iters; ++it) {
    const AuxiliaryState aux = update_auxiliaries(hb, he, W, v);
    CurvatureSystem curv = build_curvature(hb, he, aux);
    if (!opts.with_an) curv.r_v.setZero();
    WaterfillResult wf = waterfill(curv, power_budget);

    BcdIteration rec;
    rec.surrogate_nats = surrogate_value(curv, wf.W, wf.v);
    W = std::move(wf.W);
    v = std::move(wf.v);
    rec.rate_bob = rate_bob(hb, W, v);
    rec.rate_eve = rate_eve(he, W, v);
    rec.objective_bits = rec.rate_bob - rec.rate_eve;
    rec.lambda = wf.lambda;
    rec.an_power = v.squaredNorm();
    rec.decreased = rec.objective_bits < obj - kDecreaseTol;
    res.diverged = res.diverged || rec.decreased;
    res.trace.push_back(rec);
    res.iterations = it + 1;

    if (rec.objective_bits >= best_obj || it == 0) {
      best_obj = rec.objective_bits;
      best_W = W;
      best_v = v;
      best_lambda = wf.lambda;
      best_curv = std::move(curv);
    }
    const double change = std::abs(rec.objective_bits - obj);
    obj = rec.objective_bits;
    if (change <= opts.tol_rel * std::max(std::abs(obj), 1e-9)) {
      res.converged = true;
      break;
    }
  }

  // With zero iterations the initial point is returned as is.
  res.W_raw = best_W;
  res.v = std::move(best_v);
  res.lambda = best_lambda;
  res.objective_bits = best_obj;
  res.last_curvature = std::move(best_curv);

  if (opts.balance && best_W.cols() > 1) {
    const auto dict = unitary_dictionary(static_cast<int>(best_W.cols()), opts.dictionary_random,
                                         opts.dictionary_seed);
    BalanceResult bal = balance_streams(best_W, dict);
    res.W = std::move(bal.W);
    res.balance_index = bal.chosen;
  } else {
    res.W = std::move(best_W);
  }
  return res;
}

}  // namespace fasec
