#include <cmath>
#include <numeric>

#include "bathyloc/errors.hpp"
#include "bathyloc/particle_filter.hpp"
#include "bathyloc/rng.hpp"
#include "doctest.h"
#include "support/helpers.hpp"

using namespace bathyloc;
using testutil::make_constant_grid;

namespace {

Eigen::Matrix2d table_r() {
  return Eigen::Vector2d(0.3048 * 0.3048, 0.3048 * 0.3048).asDiagonal();
}

double weight_sum(const ParticleSet& set) {
  return std::accumulate(set.weights.begin(), set.weights.end(), 0.0);
}

} // namespace

TEST_CASE("pf_init") {
  const BathymetryGrid g = make_constant_grid(100, 100, 12.0);
  SUBCASE("degenerate covariance collapses to the init pose") {
    Rng rng(1);
    const ParticleSet set = pf_init(g, 64, {50, 50, 5}, Eigen::Matrix3d::Zero(), rng);
    for (const State& s : set.positions) {
      CHECK(s.px == 50.0);
      CHECK(s.py == 50.0);
      CHECK(s.pz == 5.0);
    }
    for (double w : set.weights) CHECK(w == doctest::Approx(1.0 / 64).epsilon(1e-15));
  }
  SUBCASE("sample mean approaches the init pose (statistical oracle)") {
    Rng rng(2);
    Eigen::Matrix3d p0 = Eigen::Vector3d(1.0, 1.0, 0.3048 * 0.3048).asDiagonal();
    const std::size_t n = 100000;
    const ParticleSet set = pf_init(g, n, {50, 50, 5}, p0, rng);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const State& s : set.positions) mean += s.vec();
    mean /= static_cast<double>(n);
    const double bound_xy = 3.0 / std::sqrt(static_cast<double>(n));
    const double bound_z = 3.0 * 0.3048 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mean(0) - 50.0) <= bound_xy);
    CHECK(std::abs(mean(1) - 50.0) <= bound_xy);
    CHECK(std::abs(mean(2) - 5.0) <= bound_z);
  }
  SUBCASE("init pose outside the map raises") {
    Rng rng(3);
    CHECK_THROWS_AS(pf_init(g, 10, {-5, 50, 5}, Eigen::Matrix3d::Identity(), rng),
                    BoundsError);
  }
  SUBCASE("hopeless rejection sampling raises after 100N draws") {
    Rng rng(4);
    const BathymetryGrid tiny = make_constant_grid(10, 10, 5.0);
    Eigen::Matrix3d p0 = Eigen::Vector3d(1e12, 1e12, 1.0).asDiagonal();
    CHECK_THROWS_AS(pf_init(tiny, 50, {5, 5, 2}, p0, rng), NumericError);
  }
}

TEST_CASE("pf_motion_update") {
  const BathymetryGrid g = make_constant_grid(100, 100, 12.0);
  SUBCASE("zero noise, linear motion shifts every particle by u*dt") {
    Rng rng(5);
    ParticleSet set = pf_init(g, 32, {50, 50, 5}, Eigen::Matrix3d::Identity(), rng);
    const ParticleSet before = set;
    pf_motion_update(set, MotionModel::linear({1.0, -2.0, 0.25}), g,
                     Eigen::Matrix3d::Zero(), 0.5, rng);
    for (std::size_t i = 0; i < set.size(); ++i) {
      CHECK(set.positions[i].px == doctest::Approx(before.positions[i].px + 0.5));
      CHECK(set.positions[i].py == doctest::Approx(before.positions[i].py - 1.0));
      CHECK(set.positions[i].pz == doctest::Approx(before.positions[i].pz + 0.125));
    }
  }
  SUBCASE("empirical covariance grows by about Q (statistical oracle)") {
    Rng rng(6);
    const std::size_t n = 20000;
    ParticleSet set = pf_init(g, n, {50, 50, 5}, Eigen::Matrix3d::Zero(), rng);
    const Eigen::Matrix3d q = Eigen::Vector3d(0.04, 0.09, 0.01).asDiagonal();
    pf_motion_update(set, MotionModel::linear({0, 0, 0}), g, q, 1.0, rng);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const State& s : set.positions) mean += s.vec();
    mean /= static_cast<double>(n);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const State& s : set.positions) {
      const Eigen::Vector3d d = s.vec() - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(n - 1);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(cov(i, i) - q(i, i)) <= 0.1 * q(i, i));
    }
  }
  SUBCASE("seed determinism") {
    Rng rng_a(7), rng_b(7);
    ParticleSet a = pf_init(g, 200, {50, 50, 5}, Eigen::Matrix3d::Identity(), rng_a);
    ParticleSet b = pf_init(g, 200, {50, 50, 5}, Eigen::Matrix3d::Identity(), rng_b);
    const Eigen::Matrix3d q = 0.1 * Eigen::Matrix3d::Identity();
    pf_motion_update(a, MotionModel::linear({1, 1, 0}), g, q, 1.0, rng_a);
    pf_motion_update(b, MotionModel::linear({1, 1, 0}), g, q, 1.0, rng_b);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.positions[i].px == b.positions[i].px);
      CHECK(a.positions[i].py == b.positions[i].py);
      CHECK(a.positions[i].pz == b.positions[i].pz);
    }
  }
}

TEST_CASE("pf_sensor_update") {
  const BathymetryGrid g = make_constant_grid(100, 100, 12.0);
  SUBCASE("one-foot depth residual weighs exp(-1/2)") {
    ParticleSet set;
    set.positions = {{50, 50, 5}};
    set.weights = {1.0};
    // particle predicts (5, 7); measurement off by 0.3048 in depth only
    const Measurement z{5.0 + 0.3048, 7.0};
    pf_sensor_update(set, z, g, table_r());
    CHECK(set.weights[0] == doctest::Approx(0.606531).epsilon(1e-6));
  }
  SUBCASE("zero residual keeps the weight") {
    ParticleSet set;
    set.positions = {{50, 50, 5}};
    set.weights = {0.25};
    pf_sensor_update(set, Measurement{5.0, 7.0}, g, table_r());
    CHECK(set.weights[0] == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("out-of-map particle is zero-weighted") {
    ParticleSet set;
    set.positions = {{-3, 50, 5}, {50, 50, 5}};
    set.weights = {0.5, 0.5};
    pf_sensor_update(set, Measurement{5.0, 7.0}, g, table_r());
    CHECK(set.weights[0] == 0.0);
    CHECK(set.weights[1] > 0.0);
  }
}

TEST_CASE("pf_normalize") {
  SUBCASE("scales to unit total") {
    ParticleSet set;
    set.positions = {{}, {}, {}};
    set.weights = {2, 2, 4};
    pf_normalize(set);
    CHECK(set.weights[0] == doctest::Approx(0.25));
    CHECK(set.weights[1] == doctest::Approx(0.25));
    CHECK(set.weights[2] == doctest::Approx(0.5));
    CHECK(std::abs(weight_sum(set) - 1.0) <= 1e-12);
    CHECK_FALSE(set.degenerate);
  }
  SUBCASE("all-zero weights reset to uniform and latch the flag") {
    ParticleSet set;
    set.positions = {{}, {}, {}, {}};
    set.weights = {0, 0, 0, 0};
    pf_normalize(set);
    for (double w : set.weights) CHECK(w == doctest::Approx(0.25));
    CHECK(set.degenerate);
  }
}

TEST_CASE("pf_resample") {
  const BathymetryGrid g = make_constant_grid(100, 100, 12.0);
  SUBCASE("all mass on one particle duplicates it everywhere") {
    ParticleSet set;
    for (int i = 0; i < 10; ++i) {
      set.positions.push_back({static_cast<double>(i) + 10, 50, 1});
      set.weights.push_back(i == 7 ? 1.0 : 0.0);
    }
    Rng rng(8);
    pf_resample(set, g, rng, 0.0);
    for (const State& s : set.positions) CHECK(s.px == 17.0);
    for (double w : set.weights) CHECK(w == doctest::Approx(0.1));
  }
  SUBCASE("inject_fraction 0.05 of 100 injects exactly 5") {
    Rng rng(9);
    ParticleSet set = pf_init(g, 100, {50, 50, 5}, Eigen::Matrix3d::Zero(), rng);
    pf_resample(set, g, rng, 0.05);
    int injected = 0;
    for (const State& s : set.positions) {
      if (s.px != 50.0 || s.py != 50.0) ++injected;
    }
    CHECK(injected == 5);
  }
  SUBCASE("injected depths stay inside the water column") {
    Rng rng(10);
    ParticleSet set = pf_init(g, 50, {50, 50, 5}, Eigen::Matrix3d::Zero(), rng);
    pf_resample(set, g, rng, 0.5);
    for (const State& s : set.positions) {
      CHECK(s.pz >= 0.0);
      CHECK(s.pz <= 12.0);
      CHECK(g.in_bounds(s.px, s.py));
    }
  }
  SUBCASE("resampling preserves the weighted mean in expectation (statistical oracle)") {
    ParticleSet base;
    Rng setup(11);
    for (int i = 0; i < 200; ++i) {
      base.positions.push_back(
          {setup.uniform(30, 70), setup.uniform(30, 70), setup.uniform(0, 10)});
      base.weights.push_back(setup.uniform());
    }
    pf_normalize(base);
    const State target = pf_get_pose(base);

    Rng rng(12);
    const int trials = 400;
    std::vector<double> means_x(trials), means_y(trials);
    for (int t = 0; t < trials; ++t) {
      ParticleSet copy = base;
      pf_resample(copy, g, rng, 0.0);
      const State m = pf_get_pose(copy);
      means_x[t] = m.px;
      means_y[t] = m.py;
    }
    auto check_axis = [&](const std::vector<double>& vals, double expected) {
      const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / trials;
      double var = 0.0;
      for (double v : vals) var += (v - mean) * (v - mean);
      var /= (trials - 1);
      const double se = std::sqrt(var / trials);
      CHECK(std::abs(mean - expected) <= 3.0 * se + 1e-9);
    };
    check_axis(means_x, target.px);
    check_axis(means_y, target.py);
  }
}

TEST_CASE("pf_get_pose") {
  ParticleSet set;
  set.positions = {{0, 0, 0}, {2, 2, 2}};
  set.weights = {0.5, 0.5};
  const State mid = pf_get_pose(set);
  CHECK(mid.px == 1.0);
  CHECK(mid.py == 1.0);
  CHECK(mid.pz == 1.0);

  ParticleSet single;
  single.positions = {{4, 5, 6}};
  single.weights = {1.0};
  const State s = pf_get_pose(single);
  CHECK(s.px == 4.0);
  CHECK(s.pz == 6.0);
}

TEST_CASE("effective_sample_size") {
  ParticleSet set;
  set.positions = {{}, {}, {}, {}};
  set.weights = {0.25, 0.25, 0.25, 0.25};
  CHECK(effective_sample_size(set) == doctest::Approx(4.0));
  set.weights = {1.0, 0.0, 0.0, 0.0};
  CHECK(effective_sample_size(set) == doctest::Approx(1.0));
}

TEST_CASE("pf_step") {
  const BathymetryGrid g = make_constant_grid(100, 100, 12.0);
  const NoiseConfig noise = NoiseConfig::defaults(0.5, 0.5, -0.1);
  PfConfig cfg;
  cfg.particles = 400;
  cfg.inject_fraction = 0.05;

  SUBCASE("depth estimate tracks the truth on a flat lake") {
    const ControlInput u{0.2, 0.1, 0.05};
    const MotionModel motion = MotionModel::linear(u);
    Rng rng(13);
    ParticleSet set = pf_init(g, cfg.particles, {40, 40, 2}, noise.initial, rng);
    State truth{40, 40, 2};
    for (int t = 0; t < 30; ++t) {
      truth = step_linear(truth, u, 1.0);
      const Measurement z = measure(g, truth); // noiseless sensors
      const PfStepResult r = pf_step(set, motion, z, cfg, g, noise.process,
                                     noise.measurement, 1.0, rng);
      if (t > 3) {
        CHECK(std::abs(r.estimate.pz - truth.pz) <= 3.0 * 0.3048);
      }
    }
  }
  SUBCASE("identical seeds give identical estimates") {
    auto run_once = [&](std::uint64_t seed) {
      Rng rng(seed);
      ParticleSet set = pf_init(g, 300, {40, 40, 2}, noise.initial, rng);
      std::vector<State> estimates;
      State truth{40, 40, 2};
      const MotionModel motion = MotionModel::linear({0.2, 0.1, 0.0});
      for (int t = 0; t < 10; ++t) {
        truth = step_linear(truth, {0.2, 0.1, 0.0}, 1.0);
        const PfStepResult r = pf_step(set, motion, measure(g, truth), cfg, g, noise.process,
                                       noise.measurement, 1.0, rng);
        estimates.push_back(r.estimate);
      }
      return estimates;
    };
    const auto a = run_once(99);
    const auto b = run_once(99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].px == b[i].px);
      CHECK(a[i].py == b[i].py);
      CHECK(a[i].pz == b[i].pz);
    }
  }
  SUBCASE("weights normalize to one after every step") {
    Rng rng(14);
    ParticleSet set = pf_init(g, 256, {40, 40, 2}, noise.initial, rng);
    const MotionModel motion = MotionModel::linear({0.1, 0.1, 0.0});
    cfg.estimate_before_resample = true; // keep post-update weights observable
    cfg.ess_threshold = 0.0001;          // effectively never resample
    State truth{40, 40, 2};
    for (int t = 0; t < 20; ++t) {
      truth = step_linear(truth, {0.1, 0.1, 0.0}, 1.0);
      pf_step(set, motion, measure(g, truth), cfg, g, noise.process, noise.measurement, 1.0,
              rng);
      CHECK(std::abs(weight_sum(set) - 1.0) <= 1e-12);
    }
  }
  SUBCASE("default configuration uses 5000 particles and 5% injection") {
    const PfConfig defaults;
    CHECK(defaults.particles == 5000);
    CHECK(defaults.inject_fraction == 0.05);
    CHECK_FALSE(defaults.ess_threshold.has_value());
  }
}
