// General-form conditional Kalman recursions of the marginalized particle
// filter for the full mixed linear/nonlinear model
//
//   x^n_{t+1} = f^n(x^n) + A^n x^l + G^n w^n,   w^n ~ N(0, Q^n)
//   x^l_{t+1} = f^l      + A^l x^l + G^l w^l,   w^l ~ N(0, Q^l),
//               E[w^l (w^n)'] = (Q^ln)'
//   y_t       = h(x^n)   + C   x^l + e,         e ~ N(0, R)
//
// kept as a cross-validation reference for the reduced recursions shipped in
// the library (which specialize A^n = 0, A^l = 1, G = I, Q^ln = 0).
#ifndef BATHYLOC_TESTS_MPF_REFERENCE_HPP
#define BATHYLOC_TESTS_MPF_REFERENCE_HPP

#include <Eigen/Dense>
#include <cmath>

namespace testutil {

struct GeneralMpfModel {
  Eigen::MatrixXd An;  // dn x dl
  Eigen::MatrixXd Al;  // dl x dl
  Eigen::MatrixXd Gn;  // dn x dn
  Eigen::MatrixXd Gl;  // dl x dl
  Eigen::MatrixXd C;   // dy x dl
  Eigen::MatrixXd Qn;  // dn x dn
  Eigen::MatrixXd Ql;  // dl x dl
  Eigen::MatrixXd Qln; // dn x dl, cross-covariance E[w^n (w^l)']
  Eigen::MatrixXd R;   // dy x dy
};

/// Per-particle conditional Kalman state.
struct GeneralMpfKf {
  Eigen::VectorXd mean; // dl
  Eigen::MatrixXd cov;  // dl x dl

  /// Measurement update against y = h + C x^l + e. Returns the full Gaussian
  /// likelihood N(y; h + C mean, M).
  double measurement_update(const Eigen::VectorXd& y, const Eigen::VectorXd& h,
                            const GeneralMpfModel& m) {
    const Eigen::MatrixXd M = m.C * cov * m.C.transpose() + m.R;
    const Eigen::VectorXd nu = y - h - m.C * mean;
    const Eigen::MatrixXd Minv = M.inverse();
    const Eigen::MatrixXd K = cov * m.C.transpose() * Minv;
    mean += K * nu;
    cov -= K * M * K.transpose();

    const double dy = static_cast<double>(y.size());
    const double norm = std::pow(2.0 * M_PI, -0.5 * dy) / std::sqrt(M.determinant());
    return norm * std::exp(-0.5 * nu.dot(Minv * nu));
  }

  /// Time update conditioned on the realized nonlinear transition
  /// z = x^n_{t+1} - f^n(x^n_t).
  void time_update(const Eigen::VectorXd& z, const Eigen::VectorXd& fl,
                   const GeneralMpfModel& m) {
    const Eigen::MatrixXd QnInv = m.Qn.inverse();
    const Eigen::MatrixXd GnInv = m.Gn.inverse();
    const Eigen::MatrixXd Al_bar =
        m.Al - m.Gl * m.Qln.transpose() * QnInv * GnInv * m.An;
    const Eigen::MatrixXd Ql_bar = m.Ql - m.Qln.transpose() * QnInv * m.Qln;

    const Eigen::MatrixXd N =
        m.An * cov * m.An.transpose() + m.Gn * m.Qn * m.Gn.transpose();
    const Eigen::MatrixXd L = Al_bar * cov * m.An.transpose() * N.inverse();

    const Eigen::VectorXd info_term =
        m.Gl * m.Qln.transpose() * (m.Gn * m.Qn).inverse() * z;
    const Eigen::VectorXd next_mean =
        Al_bar * mean + info_term + fl + L * (z - m.An * mean);
    const Eigen::MatrixXd next_cov = Al_bar * cov * Al_bar.transpose() +
                                     m.Gl * Ql_bar * m.Gl.transpose() -
                                     L * N * L.transpose();
    mean = next_mean;
    cov = next_cov;
  }
};

} // namespace testutil

#endif
