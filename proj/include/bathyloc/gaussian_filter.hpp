#ifndef BATHYLOC_GAUSSIAN_FILTER_HPP
#define BATHYLOC_GAUSSIAN_FILTER_HPP

#include <Eigen/Dense>
#include <array>

#include "bathyloc/errors.hpp"
#include "bathyloc/models.hpp"

namespace bathyloc {

/// Gaussian posterior over the vehicle state. The covariance is symmetrized
/// after every update; callers may rely on cov == cov^T.
struct GaussianBelief {
  State mean;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
};

/// Scaled unscented-transform parameters.
struct UkfParams {
  double alpha = 1.0;
  double beta = 2.0;
  double kappa = 0.0;

  void validate() const;
};

/// The filter mean left the usable map area; carries the last belief that was
/// still evaluable so the caller can report it.
class DivergenceError : public Error {
public:
  DivergenceError(const std::string& msg, GaussianBelief last)
      : Error(msg), last_belief(std::move(last)) {}
  GaussianBelief last_belief;
};

GaussianBelief ekf_predict(const GaussianBelief& b, const MotionModel& motion,
                           const BathymetryGrid& grid, const Eigen::Matrix3d& q, double dt);

GaussianBelief ekf_correct(const GaussianBelief& b, const Measurement& z,
                           const BathymetryGrid& grid, const Eigen::Matrix2d& r,
                           JacobianConvention convention = JacobianConvention::analytic);

/// 2n+1 = 7 sigma points with mean and covariance recombination weights.
struct SigmaPoints {
  std::array<Eigen::Vector3d, 7> points;
  std::array<double, 7> mean_weights;
  std::array<double, 7> cov_weights;
};

SigmaPoints ukf_sigma_points(const GaussianBelief& b, const UkfParams& p);

GaussianBelief ukf_predict(const GaussianBelief& b, const MotionModel& motion,
                           const BathymetryGrid& grid, const Eigen::Matrix3d& q, double dt,
                           const UkfParams& p);

GaussianBelief ukf_correct(const GaussianBelief& b, const Measurement& z,
                           const BathymetryGrid& grid, const Eigen::Matrix2d& r,
                           const UkfParams& p);

} // namespace bathyloc

#endif
