#include "bathyloc/marginalized_filter.hpp"

#include <cmath>

#include "bathyloc/errors.hpp"
#include "bathyloc/mathutil.hpp"

namespace bathyloc {

namespace {

constexpr double kDegenerateTotal = 1e-300;
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Measurement matrix of the depth component: y = (pz, L - pz) + r.
const Eigen::Vector2d kC(1.0, -1.0);

} // namespace

MpfModel MpfModel::from(const MotionModel& motion, const Eigen::Matrix3d& q,
                        const Eigen::Matrix2d& r) {
  MpfModel m{motion, q.topLeftCorner<2, 2>(), q(2, 2), r};
  return m;
}

MpfParticleSet mpf_init(const BathymetryGrid& grid, std::size_t n, const State& init_pose,
                        const Eigen::Matrix3d& p0, Rng& rng) {
  if (n < 1) {
    throw ValueError("marginalized filter needs at least one particle");
  }
  if (!grid.in_bounds(init_pose.px, init_pose.py)) {
    throw BoundsError("marginalized filter init pose outside the map");
  }
  const Eigen::Matrix2d sqrt_p = psd_sqrt(p0.topLeftCorner<2, 2>());

  MpfParticleSet set;
  set.nx.reserve(n);
  set.ny.reserve(n);
  set.linear_mean.assign(n, init_pose.pz);
  set.linear_var.assign(n, p0(2, 2));
  set.weights.assign(n, 1.0 / static_cast<double>(n));
  set.prior_mean = init_pose.pz;
  set.prior_var = p0(2, 2);

  const std::size_t max_draws = 100 * n;
  std::size_t draws = 0;
  while (set.nx.size() < n) {
    if (draws++ >= max_draws) {
      throw NumericError("marginalized filter init: rejection sampling failed after 100*N draws");
    }
    const Eigen::Vector2d d = sqrt_p * Eigen::Vector2d(rng.gaussian(), rng.gaussian());
    const double x = init_pose.px + d.x();
    const double y = init_pose.py + d.y();
    if (!grid.in_bounds(x, y)) continue;
    set.nx.push_back(x);
    set.ny.push_back(y);
  }
  return set;
}

void mpf_measurement_update(MpfParticleSet& set, const Measurement& z,
                            const BathymetryGrid& grid, const MpfModel& model) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (!grid.in_bounds(set.nx[i], set.ny[i])) {
      set.weights[i] = 0.0;
      continue;
    }
    const double height = grid.height_at(set.nx[i], set.ny[i]);
    const double mean = set.linear_mean[i];
    const double var = set.linear_var[i];

    const Eigen::Vector2d predicted(mean, height - mean);
    const Eigen::Matrix2d s = var * (kC * kC.transpose()) + model.r;
    const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
    if (!std::isfinite(det) || det <= 0.0) {
      throw NumericError("marginalized filter: innovation covariance not invertible");
    }
    const Eigen::Matrix2d s_inv = s.inverse();
    const Eigen::Vector2d nu = z.vec() - predicted;

    // Full Gaussian density: the normalization varies across particles when
    // their depth variances differ (e.g. after injection), so it cannot be
    // dropped the way the plain PF drops it.
    const double likelihood =
        std::exp(-0.5 * nu.dot(s_inv * nu)) / (kTwoPi * std::sqrt(det));
    set.weights[i] *= likelihood;

    const Eigen::RowVector2d gain = var * kC.transpose() * s_inv;
    set.linear_mean[i] = mean + gain * nu;
    set.linear_var[i] = var * (1.0 - gain * kC);
  }

  double total = 0.0;
  for (double w : set.weights) total += w;
  if (!(total > kDegenerateTotal) || !std::isfinite(total)) {
    const double uniform = 1.0 / static_cast<double>(set.size());
    for (double& w : set.weights) w = uniform;
    set.degenerate = true;
  } else {
    for (double& w : set.weights) w /= total;
  }
}

namespace {

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

void mpf_resample(MpfParticleSet& set, const BathymetryGrid& grid, Rng& rng,
                  double inject_fraction) {
  const std::size_t n = set.size();
  const std::size_t keep = static_cast<std::size_t>(
      std::ceil((1.0 - inject_fraction) * static_cast<double>(n)));

  std::vector<std::size_t> picks;
  systematic_indices(set.weights, keep, rng, picks);

  std::vector<double> nx, ny, lm, lv;
  nx.reserve(n);
  ny.reserve(n);
  lm.reserve(n);
  lv.reserve(n);
  for (std::size_t idx : picks) {
    nx.push_back(set.nx[idx]);
    ny.push_back(set.ny[idx]);
    lm.push_back(set.linear_mean[idx]);
    lv.push_back(set.linear_var[idx]);
  }
  while (nx.size() < n) {
    // Uniform injection over the map; depth statistics restart from the prior.
    for (int attempt = 0;; ++attempt) {
      if (attempt >= 100000) {
        throw NumericError("marginalized filter injection: no in-bounds position found");
      }
      const double x = rng.uniform(grid.min_x(), grid.max_x());
      const double y = rng.uniform(grid.min_y(), grid.max_y());
      if (!grid.in_bounds(x, y)) continue;
      nx.push_back(x);
      ny.push_back(y);
      break;
    }
    lm.push_back(set.prior_mean);
    lv.push_back(set.prior_var);
  }

  set.nx = std::move(nx);
  set.ny = std::move(ny);
  set.linear_mean = std::move(lm);
  set.linear_var = std::move(lv);
  set.weights.assign(n, 1.0 / static_cast<double>(n));
}

void mpf_predict(MpfParticleSet& set, const MpfModel& model, const BathymetryGrid& grid,
                 double dt, Rng& rng) {
  const Eigen::Matrix2d sqrt_qn = psd_sqrt(model.q_nonlinear);
  const double f_l = model.motion.vz() * dt;

  for (std::size_t i = 0; i < set.size(); ++i) {
    double x = set.nx[i];
    double y = set.ny[i];
    if (!model.motion.is_mixed() || grid.in_bounds(x, y)) {
      const State moved = model.motion.step(grid, {x, y, 0.0}, dt);
      x = moved.px;
      y = moved.py;
    }
    const Eigen::Vector2d noise = sqrt_qn * Eigen::Vector2d(rng.gaussian(), rng.gaussian());
    set.nx[i] = x + noise.x();
    set.ny[i] = y + noise.y();

    // Reduced conditional-KF prediction; see MpfModel.
    set.linear_mean[i] += f_l;
    set.linear_var[i] += model.q_linear;
  }
}

State mpf_get_estimate(const MpfParticleSet& set) {
  double x = 0.0, y = 0.0, z = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    x += set.weights[i] * set.nx[i];
    y += set.weights[i] * set.ny[i];
    z += set.weights[i] * set.linear_mean[i];
  }
  return {x, y, z};
}

double mpf_effective_sample_size(const MpfParticleSet& set) {
  double sum_sq = 0.0;
  for (double w : set.weights) sum_sq += w * w;
  return sum_sq > 0.0 ? 1.0 / sum_sq : 0.0;
}

MpfStepResult mpf_step(MpfParticleSet& set, const MpfModel& model, const Measurement& z,
                       const BathymetryGrid& grid, double dt, double inject_fraction, Rng& rng,
                       bool predict_at_end) {
  set.degenerate = false;
  mpf_measurement_update(set, z, grid, model);

  MpfStepResult result;
  result.ess = mpf_effective_sample_size(set);
  result.degenerate = set.degenerate;
  result.estimate = mpf_get_estimate(set);

  mpf_resample(set, grid, rng, inject_fraction);
  if (predict_at_end) {
    mpf_predict(set, model, grid, dt, rng);
  }
  return result;
}

} // namespace bathyloc
