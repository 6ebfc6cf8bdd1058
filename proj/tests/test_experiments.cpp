// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_util.hpp"

namespace starcf {
namespace {

ExperimentSpec small_spec(const SystemConfig& base, int draws) {
  ExperimentSpec s;
  s.base = base;
  s.draws = draws;
  s.trials = 2000;
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

TEST(Format, NineSignificantDigits) {
  EXPECT_EQ(fmt9(1.0 / 3), "0.333333333");
  EXPECT_EQ(fmt9(123456789012.0), "1.23456789e+11");
  EXPECT_EQ(round9(2.0 / 3), 0.666666667);
}

TEST(Format, SpotRows) {
  EXPECT_EQ(spot_rows(100), (std::vector<std::size_t>{0, 24, 49, 74, 99}));
  EXPECT_EQ(spot_rows(3), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_TRUE(spot_rows(0).empty());
}

TEST(Format, CsvHasSchemaLineAndHeader) {
  Table t{"starcf-test/1", {"a", "b"}, {{"1", "2"}, {"3", "4"}}};
  EXPECT_EQ(to_csv(t), "# starcf-test/1\na,b\n1,2\n3,4\n");
  EXPECT_EQ(code_of([] { write_text("/nonexistent-dir/x.csv", "x"); }), ErrorCode::kIo);
}

TEST(Spec, Validation) {
  const SystemConfig base = desk_config();
  auto with = [&](auto edit, bool grid) {
    ExperimentSpec s = small_spec(base, 3);
    s.sweep_key = "M";
    s.grid = {"2", "4"};
    edit(s);
    return code_of([&] { validate_spec(s, grid); });
  };
  EXPECT_EQ(with([](ExperimentSpec& s) { s.draws = 0; }, false), ErrorCode::kInvalidConfig);
  EXPECT_EQ(with([](ExperimentSpec& s) { s.trials = 0; }, false), ErrorCode::kInvalidConfig);
  EXPECT_EQ(with([](ExperimentSpec& s) { s.threads = 0; }, false), ErrorCode::kInvalidConfig);
  EXPECT_EQ(with([](ExperimentSpec& s) { s.metric = "max-se"; }, false), ErrorCode::kInvalidConfig);
  EXPECT_EQ(with([](ExperimentSpec& s) { s.beamforming = "magic"; }, false), ErrorCode::kInvalidConfig);
  EXPECT_EQ(with([](ExperimentSpec& s) { s.sweep_key.clear(); }, true), ErrorCode::kInvalidConfig);
  EXPECT_EQ(with([](ExperimentSpec& s) { s.grid.clear(); }, true), ErrorCode::kInvalidConfig);
  EXPECT_EQ(with([](ExperimentSpec& s) { s.sweep_key = "bogus"; }, true), ErrorCode::kInvalidConfig);
  EXPECT_EQ(with([](ExperimentSpec& s) { s.sweep_key = "N"; s.grid = {"16", "15"}; }, true),
            ErrorCode::kNonSquareN);
  ExperimentSpec ok = small_spec(base, 3);
  EXPECT_NO_THROW(validate_spec(ok, false));
}

TEST(Draws, SeedsDifferAndRepeat) {
  const SystemConfig base = desk_config();
  EXPECT_EQ(draw_config(base, 3).seed, draw_config(base, 3).seed);
  EXPECT_NE(draw_config(base, 3).seed, draw_config(base, 4).seed);
  SystemConfig other = base;
  other.gamma_T = 1.0;
  // Arms differing only in hardware share geometry.
  EXPECT_EQ(draw_config(other, 3).seed, draw_config(base, 3).seed);
}

TEST(Cdf, HundredMonotoneRows) {
  ExperimentSpec s = small_spec(desk_config(), 100);
  const CdfResult r = run_cdf(s);
  ASSERT_EQ(r.table.rows.size(), 100u);
  EXPECT_EQ(r.table.columns, (std::vector<std::string>{"value", "cdf", "draw"}));
  double prev_v = -1, prev_c = 0;
  for (const auto& row : r.table.rows) {
    const double v = std::stod(row[0]), c = std::stod(row[1]);
    EXPECT_GE(v, prev_v);
    EXPECT_GT(c, prev_c);
    prev_v = v;
    prev_c = c;
  }
  EXPECT_EQ(r.table.rows.back()[1], "1");
}

TEST(Cdf, IdealHardwareDominatesOnPairedSeeds) {
  ExperimentSpec a = small_spec(desk_config(), 40);
  ExperimentSpec b = a;
  b.base.gamma_T = b.base.gamma_R = 1.0;
  const auto impaired = run_cdf(a).per_draw, ideal = run_cdf(b).per_draw;
  for (int d = 0; d < 40; ++d) EXPECT_GT(ideal[d], impaired[d]) << d;
}

TEST(Cdf, NoSurfaceLiesLeftOfStar) {
  ExperimentSpec star = small_spec(testing::desk_ris(), 40);
  ExperimentSpec none = star;
  none.base.mode = Mode::kNoRis;
  std::vector<double> s = run_cdf(star).per_draw, n = run_cdf(none).per_draw;
  std::sort(s.begin(), s.end());
  std::sort(n.begin(), n.end());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_GE(s[i], n[i]) << i;
  double ms = 0, mn = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    ms += s[i];
    mn += n[i];
  }
  EXPECT_GT(ms, mn);
}

TEST(Sweep, MoreAccessPointsHelp) {
  ExperimentSpec s = small_spec(desk_config(), 20);
  s.sweep_key = "M";
  s.grid = {"2", "4", "8"};
  const SweepResult r = run_sweep(s);
  ASSERT_EQ(r.points.size(), 3u);
  EXPECT_EQ(r.table.columns, (std::vector<std::string>{"M", "mean_sum-se", "stderr"}));
  EXPECT_LT(r.points[0].mean, r.points[1].mean);
  EXPECT_LT(r.points[1].mean, r.points[2].mean);
  for (const auto& p : r.points) EXPECT_GT(p.stderr_, 0.0);
}

TEST(Sweep, MoreUsersLowerPerUserRate) {
  ExperimentSpec s = small_spec(testing::desk_ris(), 20);
  s.metric = "mean-se";
  s.sweep_key = "K_R";
  s.grid = {"1", "2", "4"};
  const SweepResult r = run_sweep(s);
  EXPECT_GT(r.points[0].mean, r.points[1].mean);
  EXPECT_GT(r.points[1].mean, r.points[2].mean);
}

TEST(Sweep, LongerPilotsHelp) {
  ExperimentSpec s = small_spec(testing::desk_ris(), 20);
  s.sweep_key = "tau_p";
  s.grid = {"1", "2", "4"};
  const SweepResult r = run_sweep(s);
  EXPECT_LT(r.points[0].mean, r.points[1].mean);
  EXPECT_LT(r.points[1].mean, r.points[2].mean);
}

TEST(Validation, OneRowPerUeAndTerm) {
  ExperimentSpec s = small_spec(desk_config(), 1);
  const Table t = run_validation(s);
  EXPECT_EQ(t.schema, kValidateSchema);
  EXPECT_EQ(t.rows.size(), 4u * 7u);
  EXPECT_EQ(t.rows[0][2], "ds");
  EXPECT_EQ(t.rows[6][2], "sinr");
}

TEST(Lemmas, RowsAndAccuracy) {
  ExperimentSpec s = small_spec(desk_config(), 1);
  s.trials = 20000;
  const Table t = run_lemmas(s);
  ASSERT_EQ(t.rows.size(), 8u);
  for (const auto& r : t.rows) EXPECT_LT(std::stod(r[4]), 0.05) << r[0] << " " << r[1];
}

TEST(Optimizer, ReproducibleReportAndTiming) {
  const auto dir = std::filesystem::temp_directory_path() / "starcf_opt_test";
  std::filesystem::create_directories(dir);
  ExperimentSpec s = small_spec(desk_config(), 3);
  s.timing = true;
  s.out = (dir / "a.json").string();
  const OptimizerExperiment a = run_optimizer_experiment(s);
  s.out = (dir / "b.json").string();
  s.threads = 2;
  run_optimizer_experiment(s);
  EXPECT_EQ(read_file((dir / "a.json").string()), read_file((dir / "b.json").string()));

  const auto timing = nlohmann::json::parse(read_file((dir / "a.json.timing.json").string()));
  ASSERT_EQ(timing["draws"].size(), 3u);
  for (int d = 0; d < 3; ++d) {
    const auto& draw = a.report["draws"][d];
    EXPECT_EQ(timing["draws"][d]["stages"].size(), draw["iterations"].get<std::size_t>());
    EXPECT_EQ(draw["trace"].size(), draw["iterations"].get<std::size_t>() + 1);
    EXPECT_GE(draw["ao_min_se"].get<double>(), draw["baseline_min_se"].get<double>());
  }
  EXPECT_EQ(a.report["schema"], kOptimizeSchema);
  EXPECT_EQ(a.report["cdf"]["ao"].size(), 3u);
  EXPECT_FALSE(a.draws[0].progress.empty());
  const auto line = nlohmann::json::parse(a.draws[0].progress.front());
  EXPECT_TRUE(line.contains("best_fitness"));
  EXPECT_EQ(line["u_interval"].size(), 2u);
  std::filesystem::remove_all(dir);
}

TEST(Stats, TableCoversEveryMatrix) {
  const ValidationSetup v = validation_setup(desk_config());
  const Table t = stats_table(v.scene, v.stats);
  const std::size_t L = 2, N = 16, M = 4, K = 4;
  EXPECT_EQ(t.rows.size(), N * N + M * L * L + 3 * M * K * L * L);
}

}  // namespace
}  // namespace starcf
