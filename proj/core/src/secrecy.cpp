#include "fasec/secrecy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fasec/error.hpp"

namespace fasec {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// ln det(I + h X Xᴴ hᴴ), evaluated as ln det(I + (hX)ᴴ(hX)) on the smaller side.
double logdet_gram(const MatrixXcd& h, const MatrixXcd& x) {
  if (x.cols() == 0 || h.rows() == 0) return 0.0;
  const MatrixXcd hx = h * x;
  if (hx.cols() < hx.rows()) {
    MatrixXcd m = MatrixXcd::Identity(hx.cols(), hx.cols()) + hx.adjoint() * hx;
    return linalg::logdet_hpd(linalg::hermitian_part(m));
  }
  MatrixXcd m = MatrixXcd::Identity(hx.rows(), hx.rows()) + hx * hx.adjoint();
  return linalg::logdet_hpd(linalg::hermitian_part(m));
}

MatrixXcd stack(const MatrixXcd& W, const VectorXcd& v) {
  MatrixXcd t(W.rows(), W.cols() + 1);
  t << W, v;
  return t;
}

double finite_or_throw(double value, const char* what) {
  if (!std::isfinite(value)) throw NumericalError(what);
  return value;
}

}  // namespace

bool BeamformerState::within_budget(double slack) const {
  return total_power() <= power_budget * (1.0 + slack);
}

double link_rate(const MatrixXcd& h, const MatrixXcd& W, const VectorXcd& v) {
  const double with_signal = logdet_gram(h, stack(W, v));
  const double noise_only = logdet_gram(h, v);
  const double rate = (with_signal - noise_only) / kLn2;
  // A log-det difference of two PD matrices ordered by ⪰ is ≥ 0 up to roundoff.
  return std::max(0.0, finite_or_throw(rate, "link rate is not finite"));
}

double secrecy_rate(const MatrixXcd& hb, const MatrixXcd& he, const MatrixXcd& W,
                    const VectorXcd& v) {
  return std::max(0.0, rate_bob(hb, W, v) - rate_eve(he, W, v));
}

RateDecomposition decompose_r123(const MatrixXcd& hb, const MatrixXcd& he, const MatrixXcd& W,
                                 const VectorXcd& v) {
  RateDecomposition out;
  out.r1 = (logdet_gram(hb, stack(W, v)) - logdet_gram(hb, v)) / kLn2;
  out.r2 = logdet_gram(he, v) / kLn2;
  out.r3 = logdet_gram(he, stack(W, v)) / kLn2;
  finite_or_throw(out.r1 + out.r2 + out.r3, "rate decomposition is not finite");
  return out;
}

std::vector<FieldSample> field_power_maps(const ScenarioGeometry& g,
                                          const BeamformerState& state,
                                          const std::vector<GridPoint>& grid) {
  if (static_cast<Eigen::Index>(state.support.size()) != state.W.rows() ||
      state.v.size() != state.W.rows()) {
    throw ConfigError("field map: state dimensions do not match its support");
  }
  auto to_dbm = [](double watts) {
    return watts > 0.0 ? std::max(kDbmFloor, watts_to_dbm(watts)) : kDbmFloor;
  };
  std::vector<FieldSample> out;
  out.reserve(grid.size());
  for (const GridPoint& p : grid) {
    const MatrixXcd h = select_columns(probe_channel(g, p.x, p.y), state.support);
    const double signal = (h * state.W).squaredNorm();
    const double interference = (h * state.v).squaredNorm();
    out.push_back({p.x, p.y, to_dbm(signal), to_dbm(interference + g.noise_power_w)});
  }
  return out;
}

std::vector<GridPoint> rectangular_grid(double x_min, double x_max, int nx, double y_min,
                                        double y_max, int ny) {
  if (nx < 1 || ny < 1) throw ConfigError("grid needs at least one point per axis");
  auto axis = [](double lo, double hi, int n, int i) {
    return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  std::vector<GridPoint> out;
  out.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) out.push_back({axis(x_min, x_max, nx, ix), axis(y_min, y_max, ny, iy)});
  }
  return out;
}

}  // namespace fasec
