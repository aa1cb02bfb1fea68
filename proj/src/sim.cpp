#include "bathyloc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "bathyloc/errors.hpp"
#include "bathyloc/marginalized_filter.hpp"
#include "bathyloc/mathutil.hpp"
#include "bathyloc/rng.hpp"

namespace bathyloc {

const char* filter_name(FilterKind k) {
  switch (k) {
    case FilterKind::ekf: return "ekf";
    case FilterKind::ukf: return "ukf";
    case FilterKind::pf: return "pf";
    case FilterKind::mpf: return "mpf";
  }
  return "ekf";
}

FilterKind filter_from_name(const std::string& name) {
  if (name == "ekf" || name == "EKF") return FilterKind::ekf;
  if (name == "ukf" || name == "UKF") return FilterKind::ukf;
  if (name == "pf" || name == "PF") return FilterKind::pf;
  if (name == "mpf" || name == "MPF") return FilterKind::mpf;
  throw ValueError("unknown filter: " + name);
}

TruthRun simulate_truth(const BathymetryGrid& grid, const MotionModel& motion,
                        std::size_t steps, const NoiseConfig& noise, double dt,
                        std::uint64_t seed, const State& init_pose, bool process_noise) {
  if (steps < 1) {
    throw ValueError("simulate_truth: steps must be >= 1");
  }
  if (!(dt > 0.0)) {
    throw ValueError("simulate_truth: dt must be > 0");
  }
  if (!grid.in_bounds(init_pose.px, init_pose.py)) {
    throw BoundsError("simulate_truth: initial pose outside the map");
  }

  Rng rng(seed);
  const Eigen::Matrix3d sqrt_q = psd_sqrt(noise.process);
  const Eigen::Matrix2d sqrt_r = psd_sqrt(noise.measurement);

  TruthRun run;
  run.dt = dt;
  run.seed = seed;
  run.states.reserve(steps);
  run.measurements.reserve(steps);

  auto clamp_depth = [&](State s) {
    const double height = grid.height_at(s.px, s.py);
    s.pz = std::clamp(s.pz, 0.0, height);
    return s;
  };
  auto observe = [&](const State& s) {
    const Eigen::Vector2d noise_draw =
        sqrt_r * Eigen::Vector2d(rng.gaussian(), rng.gaussian());
    const Measurement clean = measure(grid, s);
    return Measurement{clean.depth + noise_draw(0), clean.altitude + noise_draw(1)};
  };

  State current = clamp_depth(init_pose);
  run.states.push_back(current);
  run.measurements.push_back(observe(current));
  if (const auto* u = motion.control()) run.controls.push_back(*u);

  for (std::size_t t = 1; t < steps; ++t) {
    State next = motion.step(grid, current, dt);
    if (process_noise) {
      next = State::from(next.vec() + sqrt_q * Eigen::Vector3d(rng.gaussian(), rng.gaussian(),
                                                               rng.gaussian()));
    }
    if (!grid.in_bounds(next.px, next.py)) {
      run.truncated = true;
      break;
    }
    current = clamp_depth(next);
    run.states.push_back(current);
    run.measurements.push_back(observe(current));
    if (const auto* u = motion.control()) run.controls.push_back(*u);
  }
  return run;
}

AxisRmse rmse(std::span<const State> truth, std::span<const State> estimates) {
  if (truth.size() != estimates.size()) {
    throw ValueError("rmse: trajectory lengths differ");
  }
  if (truth.empty()) {
    throw ValueError("rmse: empty trajectories");
  }
  double sx = 0.0, sy = 0.0, sz = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double ex = truth[i].px - estimates[i].px;
    const double ey = truth[i].py - estimates[i].py;
    const double ez = truth[i].pz - estimates[i].pz;
    sx += ex * ex;
    sy += ey * ey;
    sz += ez * ez;
  }
  const double n = static_cast<double>(truth.size());
  return {std::sqrt(sx / n), std::sqrt(sy / n), std::sqrt(sz / n)};
}

double horizontal_rmse(const RunReport& r) {
  return std::sqrt(r.rmse_x * r.rmse_x + r.rmse_y * r.rmse_y);
}

namespace {

struct LoopOutcome {
  std::vector<State> estimates;
  std::vector<double> ess;
  std::size_t steps_completed = 0;
  bool errored = false;
};

LoopOutcome gaussian_loop(FilterKind kind, const TruthRun& truth, const BathymetryGrid& grid,
                          const MotionModel& motion, const NoiseConfig& noise,
                          const FilterParams& params) {
  const std::size_t steps = truth.length();
  LoopOutcome out;
  out.estimates.reserve(steps);

  GaussianBelief belief{truth.states[0], noise.initial};
  for (std::size_t t = 0; t < steps; ++t) {
    try {
      if (t > 0) {
        belief = kind == FilterKind::ekf
                     ? ekf_predict(belief, motion, grid, noise.process, truth.dt)
                     : ukf_predict(belief, motion, grid, noise.process, truth.dt, params.ukf);
      }
      belief = kind == FilterKind::ekf
                   ? ekf_correct(belief, truth.measurements[t], grid, noise.measurement,
                                 params.jacobian)
                   : ukf_correct(belief, truth.measurements[t], grid, noise.measurement,
                                 params.ukf);
    } catch (const Error&) {
      out.errored = true;
      break;
    }
    out.estimates.push_back(belief.mean);
    out.steps_completed = t + 1;
  }
  return out;
}

LoopOutcome pf_loop(const TruthRun& truth, const BathymetryGrid& grid,
                    const MotionModel& motion, const NoiseConfig& noise,
                    const FilterParams& params, Rng& rng) {
  const std::size_t steps = truth.length();
  LoopOutcome out;
  out.estimates.reserve(steps);
  out.ess.reserve(steps);

  PfConfig cfg;
  cfg.particles = params.pf_particles;
  cfg.inject_fraction = params.inject_fraction;
  cfg.ess_threshold = params.ess_threshold;
  cfg.estimate_before_resample = params.estimate_before_resample;

  try {
    ParticleSet set = pf_init(grid, cfg.particles, truth.states[0], noise.initial, rng);
    for (std::size_t t = 0; t < steps; ++t) {
      const PfStepResult step =
          t == 0 ? pf_step_measurement_only(set, truth.measurements[t], cfg, grid,
                                            noise.measurement, rng)
                 : pf_step(set, motion, truth.measurements[t], cfg, grid, noise.process,
                           noise.measurement, truth.dt, rng);
      out.estimates.push_back(step.estimate);
      out.ess.push_back(step.ess);
      out.steps_completed = t + 1;
    }
  } catch (const Error&) {
    out.errored = true;
  }
  return out;
}

LoopOutcome mpf_loop(const TruthRun& truth, const BathymetryGrid& grid,
                     const MotionModel& motion, const NoiseConfig& noise,
                     const FilterParams& params, Rng& rng) {
  const std::size_t steps = truth.length();
  LoopOutcome out;
  out.estimates.reserve(steps);
  out.ess.reserve(steps);

  const MpfModel model = MpfModel::from(motion, noise.process, noise.measurement);
  try {
    MpfParticleSet set =
        mpf_init(grid, params.mpf_particles, truth.states[0], noise.initial, rng);
    for (std::size_t t = 0; t < steps; ++t) {
      const MpfStepResult step = mpf_step(set, model, truth.measurements[t], grid, truth.dt,
                                          params.inject_fraction, rng,
                                          /*predict_at_end=*/t + 1 < steps);
      out.estimates.push_back(step.estimate);
      out.ess.push_back(step.ess);
      out.steps_completed = t + 1;
    }
  } catch (const Error&) {
    out.errored = true;
  }
  return out;
}

} // namespace

RunReport run_filter(FilterKind kind, const TruthRun& truth, const BathymetryGrid& grid,
                     const MotionModel& motion, const NoiseConfig& noise,
                     const FilterParams& params, std::uint64_t seed) {
  RunReport report;
  report.filter = kind;
  report.seed = seed;

  Rng rng(seed);
  const auto start = std::chrono::steady_clock::now();
  LoopOutcome out;
  switch (kind) {
    case FilterKind::ekf:
    case FilterKind::ukf:
      out = gaussian_loop(kind, truth, grid, motion, noise, params);
      break;
    case FilterKind::pf:
      out = pf_loop(truth, grid, motion, noise, params, rng);
      break;
    case FilterKind::mpf:
      out = mpf_loop(truth, grid, motion, noise, params, rng);
      break;
  }
  const auto stop = std::chrono::steady_clock::now();
  report.runtime_seconds = std::chrono::duration<double>(stop - start).count();

  report.steps_completed = out.steps_completed;
  report.estimates = std::move(out.estimates);
  report.ess = std::move(out.ess);
  report.diverged = out.errored;

  if (report.steps_completed == 0) {
    // No step produced an estimate; report the starting pose with zero RMSE
    // suppressed by the diverged flag.
    report.estimates.assign(truth.length(), truth.states[0]);
    report.diverged = true;
    return report;
  }

  const std::span<const State> truth_span(truth.states.data(), report.steps_completed);
  const std::span<const State> est_span(report.estimates.data(), report.steps_completed);
  const AxisRmse err = rmse(truth_span, est_span);
  report.rmse_x = err.x;
  report.rmse_y = err.y;
  report.rmse_z = err.z;

  // Threshold divergence: the run finished but ended far from the truth.
  const State& final_truth = truth.states[report.steps_completed - 1];
  const State& final_est = report.estimates[report.steps_completed - 1];
  const double final_err = std::hypot(final_truth.px - final_est.px,
                                      final_truth.py - final_est.py);
  if (final_err > params.divergence_threshold) {
    report.diverged = true;
  }

  // Pad so estimates always align index-for-index with the truth.
  while (report.estimates.size() < truth.length()) {
    report.estimates.push_back(report.estimates.back());
  }
  return report;
}

BathymetryGrid LakeSource::load() const {
  if (file) {
    return load_esri_ascii_file(*file);
  }
  if (synthetic) {
    return generate_synthetic_lake(*synthetic);
  }
  throw ConfigError("lake source has neither file nor synthetic spec");
}

void BenchmarkConfig::validate() const {
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (filters.empty()) throw ConfigError("at least one filter must be selected");
  if (params.pf_particles < 1 || params.mpf_particles < 1) {
    throw ConfigError("particle counts must be >= 1");
  }
  if (params.inject_fraction < 0.0 || params.inject_fraction > 1.0) {
    throw ConfigError("inject_fraction must be in [0,1]");
  }
  if (params.ess_threshold && (*params.ess_threshold <= 0.0 || *params.ess_threshold > 1.0)) {
    throw ConfigError("ess_threshold must be in (0,1]");
  }
  if (!(params.divergence_threshold > 0.0)) {
    throw ConfigError("divergence_threshold must be > 0");
  }
  params.ukf.validate();
  if (const auto* mixed = motion.mixed_params()) {
    mixed->validate();
  }
  noise.validate();
}

Stats compute_stats(std::span<const double> values) {
  Stats s;
  if (values.empty()) return s;
  double sum = 0.0;
  s.min = values[0];
  s.max = values[0];
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double acc = 0.0;
    for (double v : values) acc += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(acc / static_cast<double>(values.size() - 1));
  }
  return s;
}

BenchResult monte_carlo(const BenchmarkConfig& cfg, const BathymetryGrid& grid, int workers) {
  cfg.validate();
  const std::size_t runs = cfg.runs;
  const std::size_t nfilters = cfg.filters.size();

  std::vector<RunReport> reports(runs * nfilters);
  std::vector<char> truncated(runs, 0);

  auto run_replicate = [&](std::size_t rep) {
    const std::uint64_t truth_seed = derive_seed(cfg.master_seed, rep, 0);
    const TruthRun truth = simulate_truth(grid, cfg.motion, cfg.steps, cfg.noise, cfg.dt,
                                          truth_seed, cfg.init_pose,
                                          cfg.process_noise_in_truth);
    truncated[rep] = truth.truncated ? 1 : 0;
    for (std::size_t f = 0; f < nfilters; ++f) {
      const std::uint64_t filter_seed = derive_seed(cfg.master_seed, rep, 1 + f);
      reports[rep * nfilters + f] = run_filter(cfg.filters[f], truth, grid, cfg.motion,
                                               cfg.noise, cfg.params, filter_seed);
    }
  };

  const int usable = std::max(1, std::min<int>(workers, static_cast<int>(runs)));
  if (usable == 1) {
    for (std::size_t rep = 0; rep < runs; ++rep) run_replicate(rep);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(usable);
    for (int w = 0; w < usable; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t rep = next.fetch_add(1);
          if (rep >= runs) break;
          run_replicate(rep);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  BenchResult result;
  result.runs.reserve(runs * nfilters);
  for (std::size_t rep = 0; rep < runs; ++rep) {
    result.truncated_truths += truncated[rep];
    for (std::size_t f = 0; f < nfilters; ++f) {
      RunReport& report = reports[rep * nfilters + f];
      if (!cfg.timing) report.runtime_seconds = 0.0;
      result.runs.push_back(RunRecord{rep, cfg.filters[f], std::move(report)});
    }
  }

  for (std::size_t f = 0; f < nfilters; ++f) {
    FilterAggregate agg;
    agg.filter = cfg.filters[f];
    agg.runs = runs;
    std::vector<double> rx, ry, rz, rh, rt;
    rx.reserve(runs);
    for (std::size_t rep = 0; rep < runs; ++rep) {
      const RunReport& r = result.runs[rep * nfilters + f].report;
      rx.push_back(r.rmse_x);
      ry.push_back(r.rmse_y);
      rz.push_back(r.rmse_z);
      rh.push_back(horizontal_rmse(r));
      rt.push_back(r.runtime_seconds);
      if (r.diverged) ++agg.diverged;
    }
    agg.rmse_x = compute_stats(rx);
    agg.rmse_y = compute_stats(ry);
    agg.rmse_z = compute_stats(rz);
    agg.rmse_horizontal = compute_stats(rh);
    agg.runtime = compute_stats(rt);
    result.aggregates.push_back(agg);
  }
  return result;
}

} // namespace bathyloc
