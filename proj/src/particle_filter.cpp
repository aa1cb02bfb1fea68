#include "bathyloc/particle_filter.hpp"

#include <cmath>

#include "bathyloc/errors.hpp"
#include "bathyloc/mathutil.hpp"

namespace bathyloc {

namespace {

constexpr double kDegenerateTotal = 1e-300;

Eigen::Vector3d gaussian3(Rng& rng) {
  return {rng.gaussian(), rng.gaussian(), rng.gaussian()};
}

// Uniform draw over in-bounds map positions with depth uniform in the local
// water column.
State draw_uniform_state(const BathymetryGrid& grid, Rng& rng) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const double x = rng.uniform(grid.min_x(), grid.max_x());
    const double y = rng.uniform(grid.min_y(), grid.max_y());
    if (!grid.in_bounds(x, y)) continue;
    const double pz = rng.uniform() * grid.height_at(x, y);
    return {x, y, pz};
  }
  throw NumericError("particle injection: no in-bounds position found");
}

} // namespace

ParticleSet pf_init(const BathymetryGrid& grid, std::size_t n, const State& init_pose,
                    const Eigen::Matrix3d& p0, Rng& rng) {
  if (n < 1) {
    throw ValueError("particle filter needs at least one particle");
  }
  if (!grid.in_bounds(init_pose.px, init_pose.py)) {
    throw BoundsError("particle init pose outside the map");
  }
  const Eigen::Matrix3d sqrt_p0 = psd_sqrt(p0);
  const Eigen::Vector3d mean = init_pose.vec();

  ParticleSet set;
  set.positions.reserve(n);
  set.weights.assign(n, 1.0 / static_cast<double>(n));
  const std::size_t max_draws = 100 * n;
  std::size_t draws = 0;
  while (set.positions.size() < n) {
    if (draws++ >= max_draws) {
      throw NumericError("particle init: rejection sampling failed after 100*N draws");
    }
    const State s = State::from(mean + sqrt_p0 * gaussian3(rng));
    if (!grid.in_bounds(s.px, s.py)) continue;
    set.positions.push_back(s);
  }
  return set;
}

void pf_motion_update(ParticleSet& set, const MotionModel& motion, const BathymetryGrid& grid,
                      const Eigen::Matrix3d& q, double dt, Rng& rng) {
  const Eigen::Matrix3d sqrt_q = psd_sqrt(q);
  for (State& s : set.positions) {
    State propagated;
    if (motion.is_mixed() && !grid.in_bounds(s.px, s.py)) {
      // Height-coupled rates are unavailable off the map; the particle keeps
      // drifting vertically and will be zero-weighted by the sensor update.
      propagated = s;
      propagated.pz += motion.vz() * dt;
    } else {
      propagated = motion.step(grid, s, dt);
    }
    s = State::from(propagated.vec() + sqrt_q * gaussian3(rng));
  }
}

void pf_sensor_update(ParticleSet& set, const Measurement& z, const BathymetryGrid& grid,
                      const Eigen::Matrix2d& r) {
  const Eigen::Matrix2d r_inv = r.inverse();
  for (std::size_t i = 0; i < set.size(); ++i) {
    const State& s = set.positions[i];
    if (!grid.in_bounds(s.px, s.py)) {
      set.weights[i] = 0.0;
      continue;
    }
    const Eigen::Vector2d nu = z.vec() - measure(grid, s).vec();
    set.weights[i] *= std::exp(-0.5 * nu.dot(r_inv * nu));
  }
}

void pf_normalize(ParticleSet& set) {
  double total = 0.0;
  for (double w : set.weights) total += w;
  if (!(total > kDegenerateTotal) || !std::isfinite(total)) {
    const double uniform = 1.0 / static_cast<double>(set.size());
    for (double& w : set.weights) w = uniform;
    set.degenerate = true;
    return;
  }
  for (double& w : set.weights) w /= total;
}

namespace {

// Low-variance systematic resampling: one uniform offset, N evenly spaced
// points on the cumulative weight axis.
void systematic_indices(const std::vector<double>& weights, std::size_t count, Rng& rng,
                        std::vector<std::size_t>& out) {
  out.clear();
  out.reserve(count);
  if (count == 0) return;
  const double step = 1.0 / static_cast<double>(count);
  double position = rng.uniform() * step;
  double cumulative = weights.empty() ? 0.0 : weights[0];
  std::size_t index = 0;
  for (std::size_t m = 0; m < count; ++m) {
    while (position > cumulative && index + 1 < weights.size()) {
      ++index;
      cumulative += weights[index];
    }
    out.push_back(index);
    position += step;
  }
}

} // namespace

void pf_resample(ParticleSet& set, const BathymetryGrid& grid, Rng& rng,
                 double inject_fraction) {
  const std::size_t n = set.size();
  const std::size_t keep = static_cast<std::size_t>(
      std::ceil((1.0 - inject_fraction) * static_cast<double>(n)));

  std::vector<std::size_t> picks;
  systematic_indices(set.weights, keep, rng, picks);

  std::vector<State> next;
  next.reserve(n);
  for (std::size_t idx : picks) next.push_back(set.positions[idx]);
  while (next.size() < n) next.push_back(draw_uniform_state(grid, rng));

  set.positions = std::move(next);
  set.weights.assign(n, 1.0 / static_cast<double>(n));
}

State pf_get_pose(const ParticleSet& set) {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < set.size(); ++i) {
    mean += set.weights[i] * set.positions[i].vec();
  }
  return State::from(mean);
}

double effective_sample_size(const ParticleSet& set) {
  double sum_sq = 0.0;
  for (double w : set.weights) sum_sq += w * w;
  return sum_sq > 0.0 ? 1.0 / sum_sq : 0.0;
}

namespace {

PfStepResult finish_step(ParticleSet& set, const PfConfig& cfg, const BathymetryGrid& grid,
                         Rng& rng) {
  PfStepResult result;
  result.ess = effective_sample_size(set);
  result.degenerate = set.degenerate;

  const bool resample = !cfg.ess_threshold ||
                        result.ess < *cfg.ess_threshold * static_cast<double>(set.size());
  if (cfg.estimate_before_resample) {
    result.estimate = pf_get_pose(set);
    if (resample) pf_resample(set, grid, rng, cfg.inject_fraction);
  } else if (resample) {
    pf_resample(set, grid, rng, cfg.inject_fraction);
    result.estimate = pf_get_pose(set);
  } else {
    result.estimate = pf_get_pose(set);
  }
  return result;
}

} // namespace

PfStepResult pf_step(ParticleSet& set, const MotionModel& motion, const Measurement& z,
                     const PfConfig& cfg, const BathymetryGrid& grid, const Eigen::Matrix3d& q,
                     const Eigen::Matrix2d& r, double dt, Rng& rng) {
  set.degenerate = false;
  pf_motion_update(set, motion, grid, q, dt, rng);
  pf_sensor_update(set, z, grid, r);
  pf_normalize(set);
  return finish_step(set, cfg, grid, rng);
}

PfStepResult pf_step_measurement_only(ParticleSet& set, const Measurement& z,
                                      const PfConfig& cfg, const BathymetryGrid& grid,
                                      const Eigen::Matrix2d& r, Rng& rng) {
  set.degenerate = false;
  pf_sensor_update(set, z, grid, r);
  pf_normalize(set);
  return finish_step(set, cfg, grid, rng);
}

} // namespace bathyloc
