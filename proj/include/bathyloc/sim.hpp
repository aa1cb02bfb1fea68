#ifndef BATHYLOC_SIM_HPP
#define BATHYLOC_SIM_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bathyloc/gaussian_filter.hpp"
#include "bathyloc/grid.hpp"
#include "bathyloc/models.hpp"
#include "bathyloc/particle_filter.hpp"

namespace bathyloc {

enum class FilterKind { ekf, ukf, pf, mpf };

const char* filter_name(FilterKind k);
FilterKind filter_from_name(const std::string& name);

/// Simulated ground truth. states[0] is the exact initial pose; every later
/// state follows the motion model plus optional process noise, with depth
/// clamped into the local water column. measurements[t] observes states[t].
/// `truncated` marks a run that left the map before reaching the requested
/// length.
struct TruthRun {
  std::vector<State> states;
  std::vector<Measurement> measurements;
  std::vector<ControlInput> controls; // applied control per step; empty for mixed motion
  double dt = 1.0;
  std::uint64_t seed = 0;
  bool truncated = false;

  std::size_t length() const { return states.size(); }
};

TruthRun simulate_truth(const BathymetryGrid& grid, const MotionModel& motion,
                        std::size_t steps, const NoiseConfig& noise, double dt,
                        std::uint64_t seed, const State& init_pose, bool process_noise = true);

/// Per-filter tuning used by run_filter and the benchmark driver.
struct FilterParams {
  std::size_t pf_particles = 5000;
  std::size_t mpf_particles = 300;
  double inject_fraction = 0.05;
  UkfParams ukf;
  std::optional<double> ess_threshold;   // particle filters: resample gate, off = always
  bool estimate_before_resample = false;
  JacobianConvention jacobian = JacobianConvention::analytic;
  /// A run whose final horizontal estimate error exceeds this is reported as
  /// diverged even if no filter step failed outright.
  double divergence_threshold = 10.0;
};

struct RunReport {
  FilterKind filter = FilterKind::ekf;
  std::vector<State> estimates;
  double rmse_x = 0.0;
  double rmse_y = 0.0;
  double rmse_z = 0.0;
  double runtime_seconds = 0.0;  // filter loop only
  bool diverged = false;
  std::size_t steps_completed = 0; // estimates past this index repeat the last valid one
  std::uint64_t seed = 0;
  std::vector<double> ess;       // per-step ESS, particle filters only
};

double horizontal_rmse(const RunReport& r);

/// Runs one filter over a simulated truth. The belief starts at the true
/// initial pose with covariance P0; the first frame applies a
/// measurement-only update, every later frame a full predict/correct (or
/// particle step). Filter failures are recorded as divergence, never thrown.
RunReport run_filter(FilterKind kind, const TruthRun& truth, const BathymetryGrid& grid,
                     const MotionModel& motion, const NoiseConfig& noise,
                     const FilterParams& params, std::uint64_t seed);

struct AxisRmse {
  double x = 0.0, y = 0.0, z = 0.0;
};

/// Per-axis root-mean-square error between equal-length trajectories.
AxisRmse rmse(std::span<const State> truth, std::span<const State> estimates);

/// Source of the benchmark raster: a file path or a synthetic recipe.
struct LakeSource {
  std::string name;  // label used in reports
  std::optional<std::string> file;
  std::optional<SyntheticLakeSpec> synthetic;

  BathymetryGrid load() const;
};

struct BenchmarkConfig {
  LakeSource lake;
  MotionModel motion = MotionModel::linear({});
  NoiseConfig noise;
  std::size_t steps = 50;
  std::size_t runs = 100;
  double dt = 1.0;
  State init_pose;
  std::vector<FilterKind> filters{FilterKind::ekf, FilterKind::ukf, FilterKind::pf,
                                  FilterKind::mpf};
  FilterParams params;
  std::uint64_t master_seed = 0;
  bool process_noise_in_truth = true;
  bool timing = true; // false zeroes all runtime fields, giving byte-stable reports
  std::string note;

  void validate() const;
};

struct Stats {
  double mean = 0.0, stddev = 0.0, min = 0.0, max = 0.0;
};

Stats compute_stats(std::span<const double> values);

struct RunRecord {
  std::size_t replicate = 0;
  FilterKind filter = FilterKind::ekf;
  RunReport report;
};

struct FilterAggregate {
  FilterKind filter = FilterKind::ekf;
  std::size_t runs = 0;
  Stats rmse_x, rmse_y, rmse_z, rmse_horizontal, runtime;
  std::size_t diverged = 0;
};

struct BenchResult {
  std::vector<RunRecord> runs;             // ordered by (replicate, filter)
  std::vector<FilterAggregate> aggregates; // ordered as cfg.filters
  std::size_t truncated_truths = 0;
};

/// Paired Monte Carlo benchmark: one truth per replicate, shared by every
/// filter. Replicate seeds are hash-derived from the master seed, so results
/// are identical for any worker count.
BenchResult monte_carlo(const BenchmarkConfig& cfg, const BathymetryGrid& grid,
                        int workers = 1);

} // namespace bathyloc

#endif
