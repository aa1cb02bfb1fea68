#include "bathyloc/models.hpp"

#include <cmath>

#include "bathyloc/errors.hpp"
#include "bathyloc/mathutil.hpp"

namespace bathyloc {

void MixedMotionParams::validate() const {
  for (double v : {a, a_d, a_off, b, b_d, b_off, vz}) {
    if (!std::isfinite(v)) {
      throw ValueError("mixed motion parameters must be finite");
    }
  }
  if (a_d == 0.0 || b_d == 0.0) {
    throw ValueError("mixed motion divisors a_d and b_d must be nonzero");
  }
}

NoiseConfig NoiseConfig::defaults(double vx, double vy, double vz) {
  NoiseConfig n;
  n.process = Eigen::Vector3d(vx * vx, vy * vy,
                              (kFeetToMeters * vz) * (kFeetToMeters * vz))
                  .asDiagonal();
  n.process *= 0.01;
  n.measurement = Eigen::Vector2d(kFeetToMeters * kFeetToMeters,
                                  kFeetToMeters * kFeetToMeters)
                      .asDiagonal();
  n.initial = Eigen::Vector3d(1.0, 1.0, kFeetToMeters * kFeetToMeters).asDiagonal();
  return n;
}

namespace {

void check_psd(const Eigen::MatrixXd& m, const char* name, bool require_pd) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw ValueError(std::string(name) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(m));
  const double min_ev = es.eigenvalues().minCoeff();
  const double scale = std::abs(es.eigenvalues().maxCoeff()) + 1e-300;
  if (require_pd ? (min_ev <= 0.0) : (min_ev < -1e-9 * scale)) {
    throw ValueError(std::string(name) + (require_pd ? " must be positive definite"
                                                     : " must be positive semidefinite"));
  }
}

} // namespace

void NoiseConfig::validate() const {
  check_psd(process, "process noise covariance Q", false);
  check_psd(measurement, "measurement noise covariance R", true);
  check_psd(initial, "initial covariance P0", false);
}

State step_linear(const State& s, const ControlInput& u, double dt) {
  return {s.px + u.vx * dt, s.py + u.vy * dt, s.pz + u.vz * dt};
}

State step_mixed(const State& s, const MixedMotionParams& p, const BathymetryGrid& grid,
                 double dt) {
  const double height = grid.height_at(s.px, s.py);
  return {s.px + p.a * (height / p.a_d + p.a_off) * dt,
          s.py + p.b * (height / p.b_d + p.b_off) * dt,
          s.pz + p.vz * dt};
}

Eigen::Matrix3d motion_jacobian_linear() { return Eigen::Matrix3d::Identity(); }

Eigen::Matrix3d motion_jacobian_mixed(const State& s, const MixedMotionParams& p,
                                      const BathymetryGrid& grid, double dt) {
  const auto [dldx, dldy] = grid.gradient_at(s.px, s.py);
  Eigen::Matrix3d f = Eigen::Matrix3d::Zero();
  f(0, 0) = 1.0 + (p.a / p.a_d) * dldx * dt;
  f(0, 1) = (p.a / p.a_d) * dldy * dt;
  f(1, 0) = (p.b / p.b_d) * dldx * dt;
  f(1, 1) = 1.0 + (p.b / p.b_d) * dldy * dt;
  f(2, 2) = 1.0;
  return f;
}

Measurement measure(const BathymetryGrid& grid, const State& s) {
  const double height = grid.height_at(s.px, s.py);
  return {s.pz, height - s.pz};
}

Eigen::Matrix<double, 2, 3> measurement_jacobian(const BathymetryGrid& grid, const State& s,
                                                 JacobianConvention convention) {
  const auto [dldx, dldy] = grid.gradient_at(s.px, s.py);
  Eigen::Matrix<double, 2, 3> h;
  h << 0.0, 0.0, 1.0, dldx, dldy, -1.0;
  if (convention == JacobianConvention::paper_exact) {
    h = -h;
  }
  return h;
}

State MotionModel::step(const BathymetryGrid& grid, const State& s, double dt) const {
  if (const auto* u = control()) {
    return step_linear(s, *u, dt);
  }
  return step_mixed(s, *mixed_params(), grid, dt);
}

Eigen::Matrix3d MotionModel::jacobian(const BathymetryGrid& grid, const State& s,
                                      double dt) const {
  if (control()) {
    return motion_jacobian_linear();
  }
  return motion_jacobian_mixed(s, *mixed_params(), grid, dt);
}

double MotionModel::vz() const {
  if (const auto* u = control()) {
    return u->vz;
  }
  return mixed_params()->vz;
}

} // namespace bathyloc
