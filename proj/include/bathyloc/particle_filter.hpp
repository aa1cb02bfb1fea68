#ifndef BATHYLOC_PARTICLE_FILTER_HPP
#define BATHYLOC_PARTICLE_FILTER_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <vector>

#include "bathyloc/models.hpp"
#include "bathyloc/rng.hpp"

namespace bathyloc {

/// Weighted sample cloud over vehicle states.
/// `degenerate` is latched when a normalization found all weights zero and
/// reset them to uniform.
struct ParticleSet {
  std::vector<State> positions;
  std::vector<double> weights;
  bool degenerate = false;

  std::size_t size() const { return positions.size(); }
};

/// Knobs of the depth-based particle filter loop.
struct PfConfig {
  std::size_t particles = 5000;
  double inject_fraction = 0.05;            // share of particles redrawn uniformly each step
  std::optional<double> ess_threshold;      // resample only when ESS < threshold*N; off = always
  bool estimate_before_resample = false;    // report the weighted mean instead of the
                                            // post-resample mean
};

/// N draws from Gaussian(init_pose, p0), rejection-sampled into the map
/// interior, uniform weights.
ParticleSet pf_init(const BathymetryGrid& grid, std::size_t n, const State& init_pose,
                    const Eigen::Matrix3d& p0, Rng& rng);

/// Propagates every particle through the motion model plus a fresh
/// Gaussian(0, q) draw. Particles may leave the map; the sensor update zeroes
/// their weight.
void pf_motion_update(ParticleSet& set, const MotionModel& motion, const BathymetryGrid& grid,
                      const Eigen::Matrix3d& q, double dt, Rng& rng);

/// Multiplies weights by the Gaussian measurement likelihood
/// exp(-0.5 nu' R^-1 nu); the shared normalization constant is omitted.
/// Out-of-map particles get weight zero. Weights are left unnormalized.
void pf_sensor_update(ParticleSet& set, const Measurement& z, const BathymetryGrid& grid,
                      const Eigen::Matrix2d& r);

/// Scales weights to sum one. A vanishing total resets to uniform and sets
/// the degenerate flag.
void pf_normalize(ParticleSet& set);

/// Systematic resampling of ceil((1-inject_fraction)*N) particles; the rest
/// are drawn uniformly over the map with depth uniform in [0, local height].
/// All weights reset to 1/N.
void pf_resample(ParticleSet& set, const BathymetryGrid& grid, Rng& rng,
                 double inject_fraction);

/// Weighted mean of the particle positions.
State pf_get_pose(const ParticleSet& set);

/// 1 / sum(w^2) for normalized weights.
double effective_sample_size(const ParticleSet& set);

struct PfStepResult {
  State estimate;
  double ess = 0.0;       // after the sensor update, before any resampling
  bool degenerate = false;
};

/// One full filter iteration: motion -> sensor -> normalize -> resample ->
/// pose estimate.
PfStepResult pf_step(ParticleSet& set, const MotionModel& motion, const Measurement& z,
                     const PfConfig& cfg, const BathymetryGrid& grid, const Eigen::Matrix3d& q,
                     const Eigen::Matrix2d& r, double dt, Rng& rng);

/// Sensor-only iteration for the first frame, where no motion has happened
/// yet: sensor -> normalize -> resample -> pose estimate.
PfStepResult pf_step_measurement_only(ParticleSet& set, const Measurement& z,
                                      const PfConfig& cfg, const BathymetryGrid& grid,
                                      const Eigen::Matrix2d& r, Rng& rng);

} // namespace bathyloc

#endif
