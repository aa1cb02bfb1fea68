#ifndef BATHYLOC_MATHUTIL_HPP
#define BATHYLOC_MATHUTIL_HPP

#include <Eigen/Dense>

#include "bathyloc/errors.hpp"

namespace bathyloc {

template <typename Derived>
auto symmetrize(const Eigen::MatrixBase<Derived>& m) {
  return (0.5 * (m + m.transpose())).eval();
}

/// Symmetric square root of a positive semidefinite matrix; eigenvalues below
/// zero are clamped so covariances perturbed by roundoff still factor.
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(m));
  if (es.info() != Eigen::Success) {
    throw NumericError("psd_sqrt: eigendecomposition failed");
  }
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

/// Lower Cholesky factor with a single jitter retry (1e-9 * trace on the
/// diagonal) when the plain factorization fails.
inline Eigen::Matrix3d cholesky_with_jitter(const Eigen::Matrix3d& p) {
  Eigen::LLT<Eigen::Matrix3d> llt(symmetrize(p));
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  const double jitter = 1e-9 * p.trace();
  llt.compute(symmetrize(p) + jitter * Eigen::Matrix3d::Identity());
  if (llt.info() != Eigen::Success) {
    throw NumericError("covariance not positive definite even after jitter");
  }
  return llt.matrixL();
}

} // namespace bathyloc

#endif
