#pragma once

#include <complex>

#include <Eigen/Dense>

namespace fasec {

using cd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace linalg {

/// (M + Mᴴ)/2.
MatrixXcd hermitian_part(const MatrixXcd& m);

/// Natural log-determinant of a Hermitian positive-definite matrix through a
/// Cholesky factorization. Throws NumericalError when the factorization fails.
double logdet_hpd(const MatrixXcd& m);

/// Inverse of a Hermitian positive-definite matrix.
MatrixXcd inverse_hpd(const MatrixXcd& m);

/// Moore-Penrose pseudo-inverse; singular values below rtol·σ_max count as 0.
MatrixXcd pinv(const MatrixXcd& m, double rtol = 1e-10);

/// Ratio σ_min/σ_max (0 for an all-zero matrix).
double inverse_condition(const MatrixXcd& m);

struct HermitianSpectrum {
  VectorXd values;    // ascending
  MatrixXcd vectors;  // orthonormal columns
};

/// Eigendecomposition of a Hermitian matrix (only the lower triangle is read).
HermitianSpectrum eigh(const MatrixXcd& m);

/// Orthonormal basis (thin Q of a Householder QR) for the column span of m.
/// The result has min(rows, cols) columns.
MatrixXcd orthonormal_basis(const MatrixXcd& m);

/// Draws a rows×cols matrix of i.i.d. CN(0, 1) entries.
template <class Rng>
MatrixXcd complex_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Elementwise phase, with angle(0) = 0.
MatrixXcd unit_phase(const MatrixXcd& m, double modulus);

}  // namespace linalg
}  // namespace fasec

#include <random>

namespace fasec::linalg {

template <class Rng>
MatrixXcd complex_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  MatrixXcd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      out(i, j) = cd(re, im);
    }
  }
  return out;
}

}  // namespace fasec::linalg
