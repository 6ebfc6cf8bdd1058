// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#include <gtest/gtest.h>

#include <numbers>

#include "test_util.hpp"

namespace starcf {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TEST(Apso, InertiaSchedule) {
  EXPECT_NEAR(inertia_weight(0, 100, 0.9, 0.4), std::tanh(3.0) * 0.5 + 0.4, 1e-15);
  EXPECT_NEAR(inertia_weight(0, 100, 0.9, 0.4), 0.8975, 1e-4);
  EXPECT_DOUBLE_EQ(inertia_weight(100, 100, 0.9, 0.4), 0.4);
  double prev = 1.0;
  for (int t = 0; t <= 100; ++t) {
    const double w = inertia_weight(t, 100, 0.9, 0.4);
    EXPECT_LE(w, prev);
    prev = w;
  }
}

TEST(Apso, RepairClampsAndWraps) {
  RVector x(6);
  x << -0.5, 1.7, -0.1, 7.0, kTwoPi, 3.0;
  repair(x);
  EXPECT_EQ(x(0), 0.0);
  EXPECT_EQ(x(1), 1.0);
  EXPECT_NEAR(x(2), kTwoPi - 0.1, 1e-12);
  EXPECT_NEAR(x(3), 7.0 - kTwoPi, 1e-12);
  EXPECT_EQ(x(4), 0.0);
  EXPECT_EQ(x(5), 3.0);
}

TEST(Apso, EncodeDecodeRoundTrip) {
  Rng rng(1);
  const PassiveBeamforming p = random_beamforming(9, rng);
  const PassiveBeamforming q = decode(encode(p));
  EXPECT_EQ(q.beta_T, p.beta_T);
  EXPECT_EQ(q.theta_T, p.theta_T);
  EXPECT_EQ(q.theta_R, p.theta_R);
  EXPECT_LT((q.beta_R - p.beta_R).norm(), 1e-15);
}

double smooth_fitness(const PassiveBeamforming& p) {
  return -(p.beta_T(0) - 0.3) * (p.beta_T(0) - 0.3) + std::cos(p.theta_T(0) - 1.0) +
         0.5 * std::cos(p.theta_R(0) - 4.0);
}

TEST(Apso, FindsGridOptimumInThreeDimensions) {
  double grid_best = -1e9;
  for (int a = 0; a < 64; ++a)
    for (int b = 0; b < 64; ++b)
      for (int c = 0; c < 64; ++c) {
        PassiveBeamforming p;
        p.beta_T = RVector::Constant(1, a / 63.0);
        p.beta_R = RVector::Constant(1, 1 - a / 63.0);
        p.theta_T = RVector::Constant(1, kTwoPi * b / 64);
        p.theta_R = RVector::Constant(1, kTwoPi * c / 64);
        grid_best = std::max(grid_best, smooth_fitness(p));
      }
  Rng rng(3);
  const ApsoResult r = apso_optimize(smooth_fitness, 1, ApsoOptions{}, rng);
  EXPECT_GE(r.best_fitness, grid_best - 0.01 * std::abs(grid_best));
}

TEST(Apso, SingleElementSingleUeMatchesGrid) {
  SystemConfig c = testing::desk_ris();
  c.N = 1;
  c.K_R = 1;
  c.K_T = 0;
  c.tau_p = 1;
  const Scene s = make_scene(c);
  const PilotAssignment a = assign_pilots(1, 1);
  const RMatrix eta = RMatrix::Constant(c.M, 1, 1e-3);
  auto fitness = [&](const PassiveBeamforming& p) { return evaluate(s, a, p, eta, c.tau_p).min_sinr; };
  double grid_best = 0.0;
  for (int i = 0; i <= 64; ++i) {
    PassiveBeamforming p;
    p.beta_T = RVector::Constant(1, 1.0 - i / 64.0);
    p.beta_R = RVector::Constant(1, i / 64.0);
    p.theta_T = p.theta_R = RVector::Zero(1);
    grid_best = std::max(grid_best, fitness(p));
  }
  Rng rng(4);
  ApsoOptions opt;
  opt.iterations = 30;
  const ApsoResult r = apso_optimize(fitness, 1, opt, rng);
  EXPECT_GE(r.best_fitness, 0.99 * grid_best);
}

TEST(Apso, TraceNeverDecreasesAndIncumbentIsKept) {
  const testing::Instance in = testing::make_instance(testing::desk_ris());
  auto fitness = [&](const PassiveBeamforming& p) {
    return evaluate(in.scene, in.pilots, p, in.power.eta, 2).min_sinr;
  };
  ApsoOptions opt;
  opt.iterations = 20;
  Rng rng(5);
  const ApsoResult r = apso_optimize(fitness, in.scene.N(), opt, rng, in.pbf);
  ASSERT_EQ(r.trace.size(), 21u);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GE(r.trace[i], r.trace[i - 1]);
  EXPECT_GE(r.best_fitness, fitness(in.pbf));
  EXPECT_DOUBLE_EQ(r.best_fitness, fitness(r.best));
  for (int n = 0; n < in.scene.N(); ++n) EXPECT_NEAR(r.best.beta_T(n) + r.best.beta_R(n), 1.0, 1e-15);
}

TEST(Apso, DeterministicAcrossThreads) {
  ApsoOptions opt;
  opt.iterations = 15;
  Rng a(9), b(9);
  const ApsoResult x = apso_optimize(smooth_fitness, 1, opt, a);
  opt.threads = 3;
  const ApsoResult y = apso_optimize(smooth_fitness, 1, opt, b);
  EXPECT_EQ(x.trace, y.trace);
  EXPECT_EQ(encode(x.best), encode(y.best));
}

}  // namespace
}  // namespace starcf
