#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <cstddef>

namespace cvqft {

using cplx = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using SparseComplex = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

inline constexpr cplx kI{0.0, 1.0};

/// exp(i t H) for Hermitian H, through the eigendecomposition of H.
inline ComplexMatrix expi_hermitian(const ComplexMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  const ComplexMatrix& v = es.eigenvectors();
  ComplexVector phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    phases(k) = std::exp(kI * (t * es.eigenvalues()(k)));
  }
  return v * phases.asDiagonal() * v.adjoint();
}

/// Induced 1-norm bound of a sparse matrix (max absolute column sum).
inline double one_norm(const SparseComplex& h) {
  RealVector col = RealVector::Zero(h.cols());
  for (Eigen::Index r = 0; r < h.outerSize(); ++r) {
    for (SparseComplex::InnerIterator it(h, r); it; ++it) {
      col(it.col()) += std::abs(it.value());
    }
  }
  return h.cols() > 0 ? col.maxCoeff() : 0.0;
}

/// exp(i t H) v for sparse Hermitian H without forming the exponential.
/// Truncated Taylor series on sub-steps with |t| ||H|| / steps <= 1.
inline ComplexVector expi_apply(const SparseComplex& h, double t, const ComplexVector& v) {
  const double norm = one_norm(h) * std::abs(t);
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(norm)));
  const double dt = t / static_cast<double>(steps);
  ComplexVector out = v;
  for (std::size_t s = 0; s < steps; ++s) {
    ComplexVector term = out;
    ComplexVector acc = out;
    const double scale = out.norm();
    for (int k = 1; k < 64; ++k) {
      term = (h * term) * (kI * dt / static_cast<double>(k));
      acc += term;
      if (term.norm() <= 1e-17 * scale) break;
    }
    out = acc;
  }
  return out;
}

}  // namespace cvqft
