// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace starcf {
namespace {

using testing::Instance;
using testing::make_instance;

TEST(Baselines, EqualPowerAndSeededSurface) {
  const SystemConfig c = desk_config();
  const Instance in = make_instance(c);
  EXPECT_EQ(baseline_power(in.stats).eta, equal_power(in.stats).eta);
  const PassiveBeamforming a = baseline_beamforming(c), b = baseline_beamforming(c);
  EXPECT_EQ(encode(a), encode(b));
  EXPECT_NE(encode(a), encode(baseline_beamforming(c, 1)));
}

TEST(RepairPower, ScalesOnlyOverBudgetRows) {
  RMatrix tr(2, 2);
  tr << 1.0, 1.0, 2.0, 2.0;
  RMatrix eta(2, 2);
  eta << 1.0, 1.0, 0.1, 0.1;
  const RMatrix r = repair_power(eta, tr);
  EXPECT_NEAR(r.row(0).dot(tr.row(0)), 1.0, 1e-15);
  EXPECT_EQ(r.row(1), eta.row(1));
  EXPECT_NEAR(r(0, 0), 0.5, 1e-15);
}

TEST(Evaluate, MatchesClosedForm) {
  const SystemConfig c = testing::desk_ris();
  const Instance in = make_instance(c);
  const Evaluation ev = evaluate(in.scene, in.pilots, in.pbf, in.power.eta, 7);
  EXPECT_DOUBLE_EQ(ev.min_sinr, min_sinr(sinr_closed_form(7, in.power, in.coeff, in.pilots, c)));
  EXPECT_NEAR(min_se(in.scene, in.pilots, in.pbf, in.power.eta),
              ergodic_se(in.power, in.coeff, in.pilots, c).minCoeff(), 1e-12);
}

void expect_sound(const AoResult& r, const SystemConfig& c) {
  ASSERT_GE(r.trace.size(), 2u);
  EXPECT_LE(static_cast<int>(r.trace.size()) - 1, c.ao_max_iterations);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GE(r.trace[i], r.trace[i - 1]);
  EXPECT_EQ(r.stages.size() + 1, r.trace.size());
}

TEST(Ao, ImprovesOnBaselineAndConvergesQuickly) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SystemConfig c = desk_config();
    c.seed = seed;
    const Instance in = make_instance(c);
    const AoResult r = ao_maxmin(in.scene, in.pilots, in.pbf, in.power.eta);
    expect_sound(r, c);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.trace.size() - 1, 5u);
    const double base = min_se(in.scene, in.pilots, in.pbf, in.power.eta);
    const double opt = min_se(in.scene, in.pilots, r.pbf, r.power.eta);
    EXPECT_GE(opt, base);
    // The reported objective belongs to the returned configuration.
    const Evaluation ev = evaluate(in.scene, in.pilots, r.pbf, r.power.eta, c.target_channel_use());
    EXPECT_NEAR(ev.min_sinr, r.trace.back(), 1e-9 * r.trace.back());
    EXPECT_LE(max_power_use(make_soc_problem(ev.coeff, in.pilots, c, c.target_channel_use()), r.power.eta),
              1 + 1e-8);
  }
}

TEST(Ao, ProgressReportsEveryIteration) {
  const Instance in = make_instance(desk_config());
  AoOptions opt;
  std::vector<int> its;
  opt.on_progress = [&](int it, double best, double lo, double hi) {
    its.push_back(it);
    EXPECT_GT(best, 0.0);
    EXPECT_LE(lo, hi);
  };
  const AoResult r = ao_maxmin(in.scene, in.pilots, in.pbf, in.power.eta, opt);
  ASSERT_FALSE(its.empty());
  EXPECT_EQ(its.back(), static_cast<int>(r.stages.size()));
}

// Without a surface the beamforming is irrelevant; starting from the power
// optimum, the first round cannot move the objective.
TEST(Ao, FixedPointWithoutSurface) {
  SystemConfig c = desk_config();
  c.mode = Mode::kNoRis;
  const Instance in = make_instance(c);
  const SocProblem p = make_soc_problem(in.coeff, in.pilots, c, c.target_channel_use());
  BisectOptions tight;
  tight.eps_rel = 1e-5;
  const PowerResult best = bisect_power(p, 0.0, std::nullopt, tight);
  const AoResult r = ao_maxmin(in.scene, in.pilots, in.pbf, best.power.eta);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.trace.size(), 2u);
  EXPECT_NEAR(r.trace[1], r.trace[0], c.eps_ao * r.trace[0]);
}

}  // namespace
}  // namespace starcf
