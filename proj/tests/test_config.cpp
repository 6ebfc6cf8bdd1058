// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "starcf/config.hpp"

namespace starcf {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

TEST(Config, DefaultsMatchPublishedSimulationTable) {
  const SystemConfig c;
  EXPECT_DOUBLE_EQ(c.f_c, 2e9);
  EXPECT_DOUBLE_EQ(c.bandwidth_hz, 10e6);
  EXPECT_EQ(c.tau_c, 100);
  EXPECT_DOUBLE_EQ(c.p, 0.2);
  EXPECT_DOUBLE_EQ(c.rho, 1.0);
  EXPECT_DOUBLE_EQ(c.T_s, 1e-5);
  EXPECT_DOUBLE_EQ(c.c_phi, 1e-18);
  EXPECT_DOUBLE_EQ(c.c_psi, 1e-18);
  EXPECT_DOUBLE_EQ(c.ue_height, 1.5);
  EXPECT_DOUBLE_EQ(c.ris_height, 30.0);
  EXPECT_DOUBLE_EQ(c.ap_height, 12.5);
  EXPECT_DOUBLE_EQ(c.w_max, 0.9);
  EXPECT_DOUBLE_EQ(c.w_min, 0.4);
  EXPECT_EQ(c.K_R, 3);
  EXPECT_EQ(c.K_T, 3);
  EXPECT_EQ(c.L, 4);
  EXPECT_EQ(c.tau_p, 3);
  EXPECT_DOUBLE_EQ(c.eps_bi, 0.01);
  EXPECT_EQ(c.apso_iterations, 100);
  EXPECT_EQ(c.apso_particles, 10);
  EXPECT_DOUBLE_EQ(c.c1, 1.496);
  EXPECT_DOUBLE_EQ(c.c2, 1.496);
  EXPECT_DOUBLE_EQ(c.element_width(), c.wavelength() / 4);
  EXPECT_DOUBLE_EQ(c.element_height(), c.wavelength() / 4);
}

TEST(Config, ThermalNoiseIsMinus95dBm) {
  // -174 dBm/Hz + 70 dB (10 MHz) + 9 dB
  const SystemConfig c;
  EXPECT_NEAR(10 * std::log10(c.noise_power()) + 30, -95.0, 1e-9);
  SystemConfig d;
  d.sigma2 = 1e-9;
  EXPECT_DOUBLE_EQ(d.noise_power(), 1e-9);
}

TEST(Config, DumpParsesBackToSameText) {
  SystemConfig c = desk_config();
  c.seed = 42;
  c.mode = Mode::kReflectOnlyPair;
  c.gamma_T = 0.7;
  std::istringstream in(dump_config(c));
  const SystemConfig back = parse_config(in);
  EXPECT_EQ(dump_config(back), dump_config(c));
  EXPECT_EQ(back.mode, Mode::kReflectOnlyPair);
  EXPECT_EQ(back.seed, 42u);
}

TEST(Config, CommentsAndBlankLines) {
  std::istringstream in("# header\n\nM = 7   # trailing\n  mode = no-ris\nvartheta = inf\n");
  const SystemConfig c = parse_config(in);
  EXPECT_EQ(c.M, 7);
  EXPECT_EQ(c.mode, Mode::kNoRis);
  EXPECT_TRUE(std::isinf(c.vartheta));
}

TEST(Config, Errors) {
  EXPECT_EQ(code_of([] { std::istringstream in("bogus = 1\n"); parse_config(in); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { std::istringstream in("M 4\n"); parse_config(in); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { std::istringstream in("M = four\n"); parse_config(in); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { std::istringstream in("N = 15\n"); parse_config(in); }), ErrorCode::kNonSquareN);
  EXPECT_EQ(code_of([] { std::istringstream in("gamma_T = 1.5\n"); parse_config(in); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { std::istringstream in("tau_p = 101\n"); parse_config(in); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { std::istringstream in("mode = sideways\n"); parse_config(in); }),
            ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { load_config("/nonexistent/x.cfg"); }), ErrorCode::kIo);
}

TEST(Config, EmptyReflectionSpaceIsValid) {
  SystemConfig c;
  c.K_R = 0;
  EXPECT_NO_THROW(validate(c));
}

}  // namespace
}  // namespace starcf
