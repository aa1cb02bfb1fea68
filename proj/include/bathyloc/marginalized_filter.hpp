#ifndef BATHYLOC_MARGINALIZED_FILTER_HPP
#define BATHYLOC_MARGINALIZED_FILTER_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "bathyloc/models.hpp"
#include "bathyloc/rng.hpp"

namespace bathyloc {

/// Marginalized (Rao-Blackwellized) particle representation: horizontal
/// position is sampled, depth is carried as a per-particle 1-D Gaussian
/// (mean, variance) maintained by a conditional Kalman filter.
struct MpfParticleSet {
  std::vector<double> nx;           // horizontal samples, x
  std::vector<double> ny;           // horizontal samples, y
  std::vector<double> linear_mean;  // conditional depth mean per particle
  std::vector<double> linear_var;   // conditional depth variance per particle
  std::vector<double> weights;
  double prior_mean = 0.0;          // injected particles restart from these
  double prior_var = 0.0;
  bool degenerate = false;

  std::size_t size() const { return nx.size(); }
};

/// Model split for the marginalized filter. The horizontal dynamics never
/// read the depth, depth advances as a single integrator at vz, and the
/// measurement decomposes as y = (0, L(x,y)) + (1, -1)' * pz + r. With a
/// block-diagonal process noise this collapses the general conditional-KF
/// prediction to mean += vz*dt, var += q_linear (the cross-information gain
/// vanishes identically).
struct MpfModel {
  MotionModel motion;               // horizontal rows drive the samples
  Eigen::Matrix2d q_nonlinear;      // horizontal process noise
  double q_linear = 0.0;            // depth process noise
  Eigen::Matrix2d r;                // measurement noise

  static MpfModel from(const MotionModel& motion, const Eigen::Matrix3d& q,
                       const Eigen::Matrix2d& r);
};

MpfParticleSet mpf_init(const BathymetryGrid& grid, std::size_t n, const State& init_pose,
                        const Eigen::Matrix3d& p0, Rng& rng);

/// Weighting plus the per-particle Kalman measurement update of the depth
/// statistics. Weights end normalized; an all-zero total resets to uniform
/// and latches the degenerate flag.
void mpf_measurement_update(MpfParticleSet& set, const Measurement& z,
                            const BathymetryGrid& grid, const MpfModel& model);

/// Systematic resampling of the joint (sample, depth mean, depth variance)
/// tuples; injected particles restart their depth statistics from the prior.
void mpf_resample(MpfParticleSet& set, const BathymetryGrid& grid, Rng& rng,
                  double inject_fraction);

/// Horizontal samples propagate through the motion model plus Gaussian
/// noise; depth statistics advance by the reduced conditional-KF prediction.
void mpf_predict(MpfParticleSet& set, const MpfModel& model, const BathymetryGrid& grid,
                 double dt, Rng& rng);

/// Weighted horizontal mean and weighted mean of the conditional depth means.
State mpf_get_estimate(const MpfParticleSet& set);

double mpf_effective_sample_size(const MpfParticleSet& set);

struct MpfStepResult {
  State estimate;
  double ess = 0.0;
  bool degenerate = false;
};

/// One filter iteration in measurement-first order: measurement update ->
/// estimate -> resample -> predict. The first frame is covered by the same
/// call because initialization plays the role of the missing prediction.
MpfStepResult mpf_step(MpfParticleSet& set, const MpfModel& model, const Measurement& z,
                       const BathymetryGrid& grid, double dt, double inject_fraction, Rng& rng,
                       bool predict_at_end = true);

} // namespace bathyloc

#endif
