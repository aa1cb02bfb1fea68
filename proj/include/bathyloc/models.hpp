#ifndef BATHYLOC_MODELS_HPP
#define BATHYLOC_MODELS_HPP

#include <Eigen/Dense>
#include <variant>

#include "bathyloc/grid.hpp"

namespace bathyloc {

/// Vehicle position: horizontal coordinates plus depth below the surface
/// (positive downward), all in meters.
struct State {
  double px = 0.0;
  double py = 0.0;
  double pz = 0.0;

  Eigen::Vector3d vec() const { return {px, py, pz}; }
  static State from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

/// Commanded velocity, meters/second.
struct ControlInput {
  double vx = 0.0;
  double vy = 0.0;
  double vz = 0.0;

  Eigen::Vector3d vec() const { return {vx, vy, vz}; }
};

/// One sensor frame: pressure-sensor depth and single-beam sonar altitude.
/// depth + altitude equals the local water-column height for noiseless
/// readings; noisy altitude may dip below zero and filters must tolerate it.
struct Measurement {
  double depth = 0.0;
  double altitude = 0.0;

  Eigen::Vector2d vec() const { return {depth, altitude}; }
};

/// Per-water-body constants of the height-coupled horizontal motion:
/// the horizontal rates are a*(L/a_d + a_off) and b*(L/b_d + b_off), while
/// depth advances linearly at vz.
struct MixedMotionParams {
  double a = 0.0;
  double a_d = 1.0;
  double a_off = 0.0;
  double b = 0.0;
  double b_d = 1.0;
  double b_off = 0.0;
  double vz = 0.0; // meters/second

  void validate() const;
};

/// Process, measurement, and initial-uncertainty covariances.
struct NoiseConfig {
  Eigen::Matrix3d process = Eigen::Matrix3d::Zero();     // Q, m^2
  Eigen::Matrix2d measurement = Eigen::Matrix2d::Zero(); // R, m^2
  Eigen::Matrix3d initial = Eigen::Matrix3d::Zero();     // P0, m^2

  /// Default covariances scaled from a nominal velocity:
  /// Q = 0.01 diag(vx^2, vy^2, (0.3048 vz)^2), R = 0.3048^2 I,
  /// P0 = diag(1, 1, 0.3048^2).
  static NoiseConfig defaults(double vx, double vy, double vz);

  void validate() const;
};

/// x' = x + u*dt, componentwise. Noise injection is the simulator's job.
State step_linear(const State& s, const ControlInput& u, double dt);

/// Height-coupled horizontal update plus linear depth update. Throws
/// BoundsError/NodataError when (px, py) cannot be evaluated on the grid.
State step_mixed(const State& s, const MixedMotionParams& p, const BathymetryGrid& grid,
                 double dt);

/// d(step_linear)/dx: the identity.
Eigen::Matrix3d motion_jacobian_linear();

/// d(step_mixed)/dx, with terrain partials from gradient_at.
Eigen::Matrix3d motion_jacobian_mixed(const State& s, const MixedMotionParams& p,
                                      const BathymetryGrid& grid, double dt);

/// Noiseless measurement: depth = pz, altitude = L(px,py) - pz.
Measurement measure(const BathymetryGrid& grid, const State& s);

/// Sign convention of the measurement Jacobian. `analytic` is dh/dx of
/// measure(); `paper_exact` negates both rows, matching a published variant
/// kept for comparison runs.
enum class JacobianConvention { analytic, paper_exact };

Eigen::Matrix<double, 2, 3> measurement_jacobian(
    const BathymetryGrid& grid, const State& s,
    JacobianConvention convention = JacobianConvention::analytic);

/// Value-type handle bundling one of the two motion models, so filters and
/// the simulator can be written against a single propagation interface.
class MotionModel {
public:
  static MotionModel linear(const ControlInput& u) { return MotionModel(u); }
  static MotionModel mixed(const MixedMotionParams& p) { return MotionModel(p); }

  State step(const BathymetryGrid& grid, const State& s, double dt) const;
  Eigen::Matrix3d jacobian(const BathymetryGrid& grid, const State& s, double dt) const;

  bool is_mixed() const { return std::holds_alternative<MixedMotionParams>(model_); }
  const ControlInput* control() const { return std::get_if<ControlInput>(&model_); }
  const MixedMotionParams* mixed_params() const { return std::get_if<MixedMotionParams>(&model_); }

  /// Vertical rate shared by both models.
  double vz() const;

private:
  explicit MotionModel(const ControlInput& u) : model_(u) {}
  explicit MotionModel(const MixedMotionParams& p) : model_(p) {}
  std::variant<ControlInput, MixedMotionParams> model_;
};

} // namespace bathyloc

#endif
