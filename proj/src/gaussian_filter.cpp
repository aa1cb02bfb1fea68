#include "bathyloc/gaussian_filter.hpp"

#include <cmath>

#include "bathyloc/mathutil.hpp"

namespace bathyloc {

void UkfParams::validate() const {
  if (!(alpha > 0.0)) {
    throw ValueError("ukf alpha must be > 0");
  }
  constexpr int n = 3;
  if (!(alpha * alpha * (n + kappa) > 0.0)) {
    throw ValueError("ukf requires alpha^2 * (n + kappa) > 0");
  }
}

GaussianBelief ekf_predict(const GaussianBelief& b, const MotionModel& motion,
                           const BathymetryGrid& grid, const Eigen::Matrix3d& q, double dt) {
  try {
    const Eigen::Matrix3d f = motion.jacobian(grid, b.mean, dt);
    GaussianBelief out;
    out.mean = motion.step(grid, b.mean, dt);
    out.cov = symmetrize(f * b.cov * f.transpose() + q);
    return out;
  } catch (const BoundsError& e) {
    throw DivergenceError(std::string("ekf predict: ") + e.what(), b);
  } catch (const NodataError& e) {
    throw DivergenceError(std::string("ekf predict: ") + e.what(), b);
  }
}

GaussianBelief ekf_correct(const GaussianBelief& b, const Measurement& z,
                           const BathymetryGrid& grid, const Eigen::Matrix2d& r,
                           JacobianConvention convention) {
  Eigen::Matrix<double, 2, 3> h;
  Measurement predicted;
  try {
    h = measurement_jacobian(grid, b.mean, convention);
    predicted = measure(grid, b.mean);
  } catch (const BoundsError& e) {
    throw DivergenceError(std::string("ekf correct: ") + e.what(), b);
  } catch (const NodataError& e) {
    throw DivergenceError(std::string("ekf correct: ") + e.what(), b);
  }

  const Eigen::Matrix2d s = h * b.cov * h.transpose() + r;
  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  if (!std::isfinite(det) || std::abs(det) < 1e-300) {
    throw NumericError("ekf correct: innovation covariance not invertible");
  }
  const Eigen::Matrix<double, 3, 2> k = b.cov * h.transpose() * s.inverse();
  const Eigen::Vector2d innovation = z.vec() - predicted.vec();

  GaussianBelief out;
  out.mean = State::from(b.mean.vec() + k * innovation);
  out.cov = symmetrize((Eigen::Matrix3d::Identity() - k * h) * b.cov);
  return out;
}

SigmaPoints ukf_sigma_points(const GaussianBelief& b, const UkfParams& p) {
  p.validate();
  constexpr int n = 3;
  const double lambda = p.alpha * p.alpha * (n + p.kappa) - n;
  const Eigen::Matrix3d scaled = (n + lambda) * b.cov;
  const Eigen::Matrix3d l = cholesky_with_jitter(scaled);

  SigmaPoints sp;
  const Eigen::Vector3d mean = b.mean.vec();
  sp.points[0] = mean;
  for (int i = 0; i < n; ++i) {
    sp.points[1 + i] = mean + l.col(i);
    sp.points[1 + n + i] = mean - l.col(i);
  }
  sp.mean_weights[0] = lambda / (n + lambda);
  sp.cov_weights[0] = lambda / (n + lambda) + (1.0 - p.alpha * p.alpha + p.beta);
  for (int i = 1; i < 2 * n + 1; ++i) {
    sp.mean_weights[i] = 1.0 / (2.0 * (n + lambda));
    sp.cov_weights[i] = sp.mean_weights[i];
  }
  return sp;
}

GaussianBelief ukf_predict(const GaussianBelief& b, const MotionModel& motion,
                           const BathymetryGrid& grid, const Eigen::Matrix3d& q, double dt,
                           const UkfParams& p) {
  const SigmaPoints sp = ukf_sigma_points(b, p);

  std::array<Eigen::Vector3d, 7> propagated;
  try {
    for (std::size_t i = 0; i < sp.points.size(); ++i) {
      propagated[i] = motion.step(grid, State::from(sp.points[i]), dt).vec();
    }
  } catch (const BoundsError& e) {
    throw DivergenceError(std::string("ukf predict: ") + e.what(), b);
  } catch (const NodataError& e) {
    throw DivergenceError(std::string("ukf predict: ") + e.what(), b);
  }

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < propagated.size(); ++i) {
    mean += sp.mean_weights[i] * propagated[i];
  }
  Eigen::Matrix3d cov = q;
  for (std::size_t i = 0; i < propagated.size(); ++i) {
    const Eigen::Vector3d d = propagated[i] - mean;
    cov += sp.cov_weights[i] * d * d.transpose();
  }

  GaussianBelief out;
  out.mean = State::from(mean);
  out.cov = symmetrize(cov);
  return out;
}

GaussianBelief ukf_correct(const GaussianBelief& b, const Measurement& z,
                           const BathymetryGrid& grid, const Eigen::Matrix2d& r,
                           const UkfParams& p) {
  const SigmaPoints sp = ukf_sigma_points(b, p);

  std::array<Eigen::Vector2d, 7> observed;
  try {
    for (std::size_t i = 0; i < sp.points.size(); ++i) {
      observed[i] = measure(grid, State::from(sp.points[i])).vec();
    }
  } catch (const BoundsError& e) {
    throw DivergenceError(std::string("ukf correct: ") + e.what(), b);
  } catch (const NodataError& e) {
    throw DivergenceError(std::string("ukf correct: ") + e.what(), b);
  }

  Eigen::Vector2d predicted = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < observed.size(); ++i) {
    predicted += sp.mean_weights[i] * observed[i];
  }
  Eigen::Matrix2d s = r;
  Eigen::Matrix<double, 3, 2> cross = Eigen::Matrix<double, 3, 2>::Zero();
  const Eigen::Vector3d mean = b.mean.vec();
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const Eigen::Vector2d dy = observed[i] - predicted;
    s += sp.cov_weights[i] * dy * dy.transpose();
    cross += sp.cov_weights[i] * (sp.points[i] - mean) * dy.transpose();
  }

  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  if (!std::isfinite(det) || std::abs(det) < 1e-300) {
    throw NumericError("ukf correct: innovation covariance not invertible");
  }
  const Eigen::Matrix<double, 3, 2> k = cross * s.inverse();

  GaussianBelief out;
  out.mean = State::from(mean + k * (z.vec() - predicted));
  out.cov = symmetrize(b.cov - k * s * k.transpose());
  return out;
}

} // namespace bathyloc
