#include <cmath>

#include "bathyloc/errors.hpp"
#include "bathyloc/gaussian_filter.hpp"
#include "bathyloc/rng.hpp"
#include "doctest.h"
#include "support/exact_kf.hpp"
#include "support/helpers.hpp"

using namespace bathyloc;
using testutil::make_affine_grid;
using testutil::make_constant_grid;
using testutil::make_fn_grid;

namespace {

NoiseConfig table_noise() { return NoiseConfig::defaults(1.0, -3.0, -0.1524); }

std::array<std::array<double, 3>, 3> to_array3(const Eigen::Matrix3d& m) {
  std::array<std::array<double, 3>, 3> a{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a[i][j] = m(i, j);
  }
  return a;
}

std::array<std::array<double, 2>, 2> to_array2(const Eigen::Matrix2d& m) {
  return {{{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}}};
}

double min_eigenvalue(const Eigen::Matrix3d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  return es.eigenvalues().minCoeff();
}

} // namespace

TEST_CASE("ekf_predict") {
  const NoiseConfig noise = table_noise();
  SUBCASE("linear model: table values") {
    const BathymetryGrid g = make_constant_grid(10, 10, 5.0);
    const GaussianBelief b{{0, 0, 0}, noise.initial};
    const GaussianBelief out = ekf_predict(b, MotionModel::linear({1.0, -3.0, -0.1524}), g,
                                           noise.process, 1.0);
    CHECK(out.mean.px == doctest::Approx(1.0));
    CHECK(out.mean.py == doctest::Approx(-3.0));
    CHECK(out.mean.pz == doctest::Approx(-0.1524));
    CHECK((out.cov - (noise.initial + noise.process)).norm() == doctest::Approx(0.0));
  }
  SUBCASE("flat lake, zero-gain mixed model, Q=0 leaves cov unchanged") {
    const BathymetryGrid g = make_constant_grid(10, 10, 5.0);
    MixedMotionParams p;
    p.a = 0.0;
    p.b = 0.0;
    p.vz = -0.1;
    const GaussianBelief b{{5, 5, 2}, noise.initial};
    const GaussianBelief out =
        ekf_predict(b, MotionModel::mixed(p), g, Eigen::Matrix3d::Zero(), 1.0);
    CHECK((out.cov - b.cov).norm() == doctest::Approx(0.0));
    CHECK(out.mean.pz == doctest::Approx(1.9));
  }
  SUBCASE("covariance stays symmetric over 100 random predicts") {
    SyntheticLakeSpec spec;
    spec.ncols = 60;
    spec.nrows = 60;
    spec.max_height = 10.0;
    const BathymetryGrid g = generate_synthetic_lake(spec);
    MixedMotionParams p;
    p.a = 0.05;
    p.a_d = 1.0;
    p.a_off = 0.2;
    p.b = -0.04;
    p.b_d = 2.0;
    p.b_off = 0.1;
    const MotionModel motion = MotionModel::mixed(p);
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
      GaussianBelief b;
      b.mean = {rng.uniform(10, 50), rng.uniform(10, 50), rng.uniform(0, 5)};
      Eigen::Matrix3d a;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) a(r, c) = rng.gaussian();
      }
      b.cov = a * a.transpose();
      const GaussianBelief out = ekf_predict(b, motion, g, noise.process, 1.0);
      CHECK((out.cov - out.cov.transpose()).norm() == 0.0);
    }
  }
  SUBCASE("out-of-bounds mean raises divergence carrying the last belief") {
    const BathymetryGrid g = make_constant_grid(10, 10, 5.0);
    MixedMotionParams p;
    p.a = 1.0;
    const GaussianBelief b{{-4, 5, 0}, noise.initial};
    try {
      ekf_predict(b, MotionModel::mixed(p), g, noise.process, 1.0);
      FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
      CHECK(e.last_belief.mean.px == -4.0);
    }
  }
}

TEST_CASE("ekf_correct") {
  const NoiseConfig noise = table_noise();
  const BathymetryGrid g = make_constant_grid(20, 20, 20.0);
  SUBCASE("zero innovation: mean fixed, trace non-increasing") {
    const GaussianBelief b{{10, 10, 4}, noise.initial};
    const Measurement z = measure(g, b.mean);
    const GaussianBelief out = ekf_correct(b, z, g, noise.measurement);
    CHECK(out.mean.px == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(out.mean.py == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(out.mean.pz == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(out.cov.trace() <= b.cov.trace() + 1e-15);
  }
  SUBCASE("huge R ignores the measurement") {
    const GaussianBelief b{{10, 10, 4}, noise.initial};
    const Measurement z{9.0, 2.0}; // wildly inconsistent
    const Eigen::Matrix2d huge_r = 1e12 * Eigen::Matrix2d::Identity();
    const GaussianBelief out = ekf_correct(b, z, g, huge_r);
    CHECK(std::abs(out.mean.px - 10.0) <= 1e-6);
    CHECK(std::abs(out.mean.py - 10.0) <= 1e-6);
    CHECK(std::abs(out.mean.pz - 4.0) <= 1e-6);
  }
  SUBCASE("singular innovation covariance raises") {
    const GaussianBelief b{{10, 10, 4}, Eigen::Matrix3d::Zero()};
    CHECK_THROWS_AS(ekf_correct(b, Measurement{4, 16}, g, Eigen::Matrix2d::Zero()),
                    NumericError);
  }
}

TEST_CASE("ekf matches a hand-rolled exact KF on the fully linear problem") {
  // flat lake: h(x) = (pz, L0 - pz) is affine, linear motion => exact KF
  const double l0 = 20.0;
  const BathymetryGrid g = make_constant_grid(40, 40, l0);
  const NoiseConfig noise = table_noise();
  const ControlInput u{0.25, 0.2, 0.05};
  const MotionModel motion = MotionModel::linear(u);

  GaussianBelief belief{{15, 15, 4}, noise.initial};
  testutil::ExactKf kf;
  kf.mean = {15, 15, 4};
  kf.cov = to_array3(noise.initial);
  kf.l0 = l0;

  Rng rng(31);
  State truth{15, 15, 4};
  for (int t = 0; t < 20; ++t) {
    truth = step_linear(truth, u, 1.0);
    const Measurement z{truth.pz + 0.1 * rng.gaussian(),
                        l0 - truth.pz + 0.1 * rng.gaussian()};

    belief = ekf_predict(belief, motion, g, noise.process, 1.0);
    belief = ekf_correct(belief, z, g, noise.measurement);

    kf.predict({u.vx, u.vy, u.vz}, to_array3(noise.process));
    kf.correct(z.depth, z.altitude, to_array2(noise.measurement));

    CHECK(std::abs(belief.mean.px - kf.mean[0]) <= 1e-9);
    CHECK(std::abs(belief.mean.py - kf.mean[1]) <= 1e-9);
    CHECK(std::abs(belief.mean.pz - kf.mean[2]) <= 1e-9);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(belief.cov(i, j) - kf.cov[i][j]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("ukf_sigma_points") {
  SUBCASE("seven points; recombination reproduces mean and cov") {
    GaussianBelief b;
    b.mean = {3, -2, 5};
    b.cov << 2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 0.8;
    const UkfParams params{0.9, 2.0, 0.1};
    const SigmaPoints sp = ukf_sigma_points(b, params);
    CHECK(sp.points.size() == 7);

    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (int i = 0; i < 7; ++i) mean += sp.mean_weights[i] * sp.points[i];
    CHECK((mean - b.mean.vec()).norm() <= 1e-12);

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 7; ++i) {
      const Eigen::Vector3d d = sp.points[i] - mean;
      cov += sp.cov_weights[i] * d * d.transpose();
    }
    CHECK((cov - b.cov).norm() <= 1e-9 * b.cov.norm());
  }
  SUBCASE("identity cov, alpha=1, kappa=0: points at mean +- sqrt(3) e_i") {
    GaussianBelief b;
    b.mean = {1, 2, 3};
    b.cov = Eigen::Matrix3d::Identity();
    const SigmaPoints sp = ukf_sigma_points(b, UkfParams{1.0, 2.0, 0.0});
    const double s = std::sqrt(3.0);
    CHECK((sp.points[0] - b.mean.vec()).norm() == 0.0);
    CHECK((sp.points[1] - (b.mean.vec() + s * Eigen::Vector3d::UnitX())).norm() <= 1e-12);
    CHECK((sp.points[2] - (b.mean.vec() + s * Eigen::Vector3d::UnitY())).norm() <= 1e-12);
    CHECK((sp.points[3] - (b.mean.vec() + s * Eigen::Vector3d::UnitZ())).norm() <= 1e-12);
    CHECK((sp.points[4] - (b.mean.vec() - s * Eigen::Vector3d::UnitX())).norm() <= 1e-12);
  }
  SUBCASE("cholesky jitter rescues a roundoff-indefinite covariance") {
    GaussianBelief b;
    b.mean = {0, 0, 0};
    b.cov = Eigen::Matrix3d::Identity();
    b.cov(2, 2) = -1e-16; // slightly below zero, as after a marginal update
    CHECK_NOTHROW(ukf_sigma_points(b, UkfParams{}));
    b.cov(2, 2) = -1.0; // genuinely indefinite
    CHECK_THROWS_AS(ukf_sigma_points(b, UkfParams{}), NumericError);
  }
  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(ukf_sigma_points(GaussianBelief{}, UkfParams{0.0, 2.0, 0.0}), ValueError);
    CHECK_THROWS_AS(ukf_sigma_points(GaussianBelief{}, UkfParams{1.0, 2.0, -3.0}), ValueError);
  }
}

TEST_CASE("ukf_predict") {
  const NoiseConfig noise = table_noise();
  const UkfParams params;
  SUBCASE("identical to ekf_predict for the affine motion model") {
    const BathymetryGrid g = make_constant_grid(10, 10, 5.0);
    GaussianBelief b{{4, 4, 1}, noise.initial};
    const MotionModel motion = MotionModel::linear({0.5, -0.25, 0.1});
    const GaussianBelief ekf = ekf_predict(b, motion, g, noise.process, 1.0);
    const GaussianBelief ukf = ukf_predict(b, motion, g, noise.process, 1.0, params);
    CHECK((ekf.mean.vec() - ukf.mean.vec()).norm() <= 1e-12);
    CHECK((ekf.cov - ukf.cov).norm() <= 1e-12);
  }
  SUBCASE("flat lake, zero-gain mixed model shifts pz by vz*dt") {
    const BathymetryGrid g = make_constant_grid(10, 10, 5.0);
    MixedMotionParams p;
    p.a = 0.0;
    p.b = 0.0;
    p.vz = -0.3;
    GaussianBelief b{{5, 5, 2}, 0.01 * Eigen::Matrix3d::Identity()};
    const GaussianBelief out = ukf_predict(b, MotionModel::mixed(p), g, noise.process, 1.0,
                                           params);
    CHECK(out.mean.pz == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(out.mean.px == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("curved lake: UKF mean at least as close as EKF to Monte Carlo propagation") {
    // quadratic basin, gradient zero at the evaluation point so the
    // difference is purely the second-order term
    const BathymetryGrid g = make_fn_grid(101, 101, 1.0, 0.0, 0.0, [](double x, double y) {
      return 30.0 - 0.005 * ((x - 50.5) * (x - 50.5) + (y - 50.5) * (y - 50.5));
    });
    MixedMotionParams p;
    p.a = 1.0;
    p.a_d = 1.0;
    p.a_off = 0.0;
    p.b = 0.0;
    p.vz = 0.0;
    const MotionModel motion = MotionModel::mixed(p);

    GaussianBelief b{{50.5, 50.5, 3.0}, Eigen::Matrix3d::Zero()};
    b.cov.diagonal() << 4.0, 4.0, 0.1;

    const GaussianBelief ekf = ekf_predict(b, motion, g, Eigen::Matrix3d::Zero(), 1.0);
    const GaussianBelief ukf = ukf_predict(b, motion, g, Eigen::Matrix3d::Zero(), 1.0, params);

    // Monte Carlo oracle: 1e6 samples through the same motion model
    Rng rng(2024);
    Eigen::Vector3d mc = Eigen::Vector3d::Zero();
    const int samples = 1000000;
    const Eigen::Vector3d sd = b.cov.diagonal().cwiseSqrt();
    for (int i = 0; i < samples; ++i) {
      State s{b.mean.px + sd(0) * rng.gaussian(), b.mean.py + sd(1) * rng.gaussian(),
              b.mean.pz + sd(2) * rng.gaussian()};
      mc += step_mixed(s, p, g, 1.0).vec();
    }
    mc /= samples;

    const double ekf_err = (ekf.mean.vec() - mc).norm();
    const double ukf_err = (ukf.mean.vec() - mc).norm();
    // EKF misses the curvature correction ~ 0.5*trace(Hess*P) = 0.04
    CHECK(ekf_err >= 0.02);
    CHECK(ukf_err <= ekf_err);
    CHECK(ukf_err <= 0.02);
  }
}

TEST_CASE("ukf_correct") {
  const NoiseConfig noise = table_noise();
  const BathymetryGrid g = make_constant_grid(40, 40, 20.0);
  const UkfParams params;
  SUBCASE("zero innovation keeps the mean") {
    GaussianBelief b{{10, 10, 4}, noise.initial};
    const GaussianBelief out = ukf_correct(b, measure(g, b.mean), g, noise.measurement,
                                           params);
    CHECK((out.mean.vec() - b.mean.vec()).norm() <= 1e-9);
  }
  SUBCASE("exact-KF agreement over 20 steps") {
    const ControlInput u{0.3, 0.15, 0.02};
    const MotionModel motion = MotionModel::linear(u);
    GaussianBelief belief{{15, 15, 4}, noise.initial};
    testutil::ExactKf kf;
    kf.mean = {15, 15, 4};
    kf.cov = to_array3(noise.initial);
    kf.l0 = 20.0;

    Rng rng(77);
    State truth{15, 15, 4};
    for (int t = 0; t < 20; ++t) {
      truth = step_linear(truth, u, 1.0);
      const Measurement z{truth.pz + 0.05 * rng.gaussian(),
                          20.0 - truth.pz + 0.05 * rng.gaussian()};
      belief = ukf_predict(belief, motion, g, noise.process, 1.0, params);
      belief = ukf_correct(belief, z, g, noise.measurement, params);
      kf.predict({u.vx, u.vy, u.vz}, to_array3(noise.process));
      kf.correct(z.depth, z.altitude, to_array2(noise.measurement));
      CHECK(std::abs(belief.mean.px - kf.mean[0]) <= 1e-8);
      CHECK(std::abs(belief.mean.py - kf.mean[1]) <= 1e-8);
      CHECK(std::abs(belief.mean.pz - kf.mean[2]) <= 1e-8);
    }
  }
  SUBCASE("correction never grows the trace on an affine lake") {
    const BathymetryGrid affine = make_affine_grid(40, 40, 10.0, 0.05, -0.03);
    Rng rng(13);
    for (int i = 0; i < 50; ++i) {
      GaussianBelief b{{rng.uniform(5, 35), rng.uniform(5, 35), rng.uniform(0, 5)},
                       Eigen::Matrix3d::Zero()};
      b.cov.diagonal() << rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0), rng.uniform(0.01, 1.0);
      const Measurement z{rng.uniform(0, 10), rng.uniform(0, 10)};
      const GaussianBelief out = ukf_correct(b, z, affine, noise.measurement, params);
      CHECK(out.cov.trace() <= b.cov.trace() + 1e-12);
    }
  }
}

TEST_CASE("linear-Gaussian equivalence of EKF, UKF, and the exact KF over 50 steps") {
  const double l0 = 14.0;
  // affine lake with nonzero slope: H is constant, the problem stays linear
  const BathymetryGrid g = make_affine_grid(120, 120, l0, 0.02, -0.01);
  const NoiseConfig noise = table_noise();
  const ControlInput u{0.4, 0.35, 0.01};
  const MotionModel motion = MotionModel::linear(u);
  const UkfParams params;

  GaussianBelief ekf{{30, 70, 3}, noise.initial};
  GaussianBelief ukf = ekf;
  testutil::ExactKf kf;
  kf.mean = {30, 70, 3};
  kf.cov = to_array3(noise.initial);
  kf.l0 = l0;
  kf.gx = 0.02;
  kf.gy = -0.01;

  Rng rng(404);
  State truth{30, 70, 3};
  for (int t = 0; t < 50; ++t) {
    truth = step_linear(truth, u, 1.0);
    const double height = l0 + 0.02 * truth.px - 0.01 * truth.py;
    const Measurement z{truth.pz + 0.2 * rng.gaussian(),
                        height - truth.pz + 0.2 * rng.gaussian()};

    ekf = ekf_correct(ekf_predict(ekf, motion, g, noise.process, 1.0), z, g,
                      noise.measurement);
    ukf = ukf_correct(ukf_predict(ukf, motion, g, noise.process, 1.0, params), z, g,
                      noise.measurement, params);
    kf.predict({u.vx, u.vy, u.vz}, to_array3(noise.process));
    kf.correct(z.depth, z.altitude, to_array2(noise.measurement));

    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(ekf.mean.vec()(i) - kf.mean[i]) <= 1e-8);
      CHECK(std::abs(ukf.mean.vec()(i) - kf.mean[i]) <= 1e-8);
      for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(ekf.cov(i, j) - kf.cov[i][j]) <= 1e-7);
        CHECK(std::abs(ukf.cov(i, j) - kf.cov[i][j]) <= 1e-7);
      }
    }
  }
}

TEST_CASE("covariances stay PSD through 1000 random predict/correct cycles") {
  SyntheticLakeSpec spec;
  spec.ncols = 80;
  spec.nrows = 80;
  spec.max_height = 18.0;
  spec.noise_amplitude = 0.8;
  spec.seed = 21;
  const BathymetryGrid g = generate_synthetic_lake(spec);
  const NoiseConfig noise = table_noise();
  MixedMotionParams p;
  p.a = 0.03;
  p.a_d = 1.0;
  p.a_off = 0.1;
  p.b = -0.02;
  p.b_d = 1.0;
  p.b_off = 0.1;
  p.vz = -0.02;
  const MotionModel motion = MotionModel::mixed(p);
  const UkfParams params;

  Rng rng(515);
  GaussianBelief ekf{{40, 40, 4}, noise.initial};
  GaussianBelief ukf = ekf;
  int cycles = 0;
  while (cycles < 1000) {
    const State truth{rng.uniform(30, 50), rng.uniform(30, 50), rng.uniform(0, 6)};
    const Measurement z{truth.pz + 0.3 * rng.gaussian(),
                        g.height_at(truth.px, truth.py) - truth.pz + 0.3 * rng.gaussian()};
    // keep beliefs near the map middle so the mixed model stays evaluable
    if (!g.in_bounds(ekf.mean.px, ekf.mean.py) || cycles % 25 == 0) {
      ekf.mean = truth;
      ukf.mean = truth;
    }
    ekf = ekf_correct(ekf_predict(ekf, motion, g, noise.process, 1.0), z, g,
                      noise.measurement);
    ukf = ukf_correct(ukf_predict(ukf, motion, g, noise.process, 1.0, params), z, g,
                      noise.measurement, params);
    for (const GaussianBelief* b : {&ekf, &ukf}) {
      CHECK((b->cov - b->cov.transpose()).norm() == 0.0);
      CHECK(min_eigenvalue(b->cov) >= -1e-9 * b->cov.trace());
    }
    ++cycles;
  }
}
