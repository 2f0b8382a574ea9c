#include "fasec/linalg.hpp"

#include <cmath>
#include <limits>

#include "fasec/error.hpp"

namespace fasec::linalg {

MatrixXcd hermitian_part(const MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

double logdet_hpd(const MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::LLT<MatrixXcd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("log-det: matrix is not positive definite", inverse_condition(m));
  }
  const auto& l = llt.matrixLLT();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i).real());
  acc *= 2.0;
  if (!std::isfinite(acc)) {
    throw NumericalError("log-det: non-finite determinant", inverse_condition(m));
  }
  return acc;
}

MatrixXcd inverse_hpd(const MatrixXcd& m) {
  Eigen::LLT<MatrixXcd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("inverse: matrix is not positive definite", inverse_condition(m));
  }
  return llt.solve(MatrixXcd::Identity(m.rows(), m.cols()));
}

MatrixXcd pinv(const MatrixXcd& m, double rtol) {
  if (m.size() == 0) return MatrixXcd::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  const double cutoff = rtol * (s.size() > 0 ? s(0) : 0.0);
  VectorXd inv = VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

double inverse_condition(const MatrixXcd& m) {
  if (m.size() == 0) return 1.0;
  if (!m.allFinite()) return std::numeric_limits<double>::quiet_NaN();
  Eigen::JacobiSVD<MatrixXcd> svd(m);
  const VectorXd& s = svd.singularValues();
  if (s(0) <= 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

HermitianSpectrum eigh(const MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m);
  if (es.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigendecomposition did not converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

MatrixXcd orthonormal_basis(const MatrixXcd& m) {
  const Eigen::Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<MatrixXcd> qr(m);
  return qr.householderQ() * MatrixXcd::Identity(m.rows(), k);
}

MatrixXcd unit_phase(const MatrixXcd& m, double modulus) {
  MatrixXcd out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double phase = std::abs(m(i, j)) > 0.0 ? std::arg(m(i, j)) : 0.0;
      out(i, j) = std::polar(modulus, phase);
    }
  }
  return out;
}

}  // namespace fasec::linalg
