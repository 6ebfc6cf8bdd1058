// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "starcf/starcf.hpp"

namespace {

using namespace starcf;

struct Common {
  std::string config;
  std::vector<std::string> set;
  long long seed = -1;
  long long trials = 0;
  int threads = 1;
  int draws = 0;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value configuration file");
  app->add_option("--set", c.set, "override one field, key=value (repeatable)");
  app->add_option("--seed", c.seed, "override the seed");
  app->add_option("--trials", c.trials, "Monte-Carlo trials / samples");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--draws", c.draws, "geometry draws");
  app->add_option("--out", c.out, "output file");
}

ExperimentSpec make_spec(const Common& c, const std::string& name) {
  ExperimentSpec s;
  s.name = name;
  s.base = c.config.empty() ? SystemConfig{} : load_config(c.config);
  for (const auto& kv : c.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kInvalidConfig, "--set expects key=value, got '" + kv + "'");
    set_config_value(s.base, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
  }
  if (c.seed >= 0) s.base.seed = static_cast<std::uint64_t>(c.seed);
  validate(s.base);
  if (c.trials > 0) s.trials = c.trials;
  if (c.draws > 0) s.draws = c.draws;
  s.threads = c.threads;
  s.out = c.out;
  return s;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) std::cout << text;
}

std::vector<std::string> split_grid(const std::string& g) {
  std::vector<std::string> v;
  std::stringstream ss(g);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!detail::trim(item).empty()) v.push_back(detail::trim(item));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STAR-RIS cell-free massive MIMO: closed-form SE, Monte-Carlo checks and max-min optimization"};
  app.require_subcommand(1);

  Common vc, cc, sc, oc, lc;
  std::string json_out, dump_stats;
  auto* validate_cmd = app.add_subcommand("validate", "closed form against Monte Carlo, per UE and term");
  add_common(validate_cmd, vc);
  validate_cmd->add_option("--json", json_out, "write closed-form and Monte-Carlo breakdowns as JSON");
  validate_cmd->add_option("--dump-stats", dump_stats, "write correlation matrices as CSV");

  std::string metric = "sum-se", beamforming = "random";
  auto* cdf_cmd = app.add_subcommand("cdf", "empirical CDF of an SE metric over geometry draws");
  add_common(cdf_cmd, cc);
  cdf_cmd->add_option("--metric", metric, "sum-se | min-se | mean-se");
  cdf_cmd->add_option("--beamforming", beamforming, "random | apso");

  std::string var, grid;
  auto* sweep_cmd = app.add_subcommand("sweep", "mean SE against one configuration field");
  add_common(sweep_cmd, sc);
  sweep_cmd->add_option("--var", var, "configuration field to sweep")->required();
  sweep_cmd->add_option("--grid", grid, "comma-separated values")->required();
  sweep_cmd->add_option("--metric", metric, "sum-se | min-se | mean-se");
  sweep_cmd->add_option("--beamforming", beamforming, "random | apso");

  bool timing = false, progress = false;
  auto* opt_cmd = app.add_subcommand("optimize", "alternating optimization against the EPC + random surface baseline");
  add_common(opt_cmd, oc);
  opt_cmd->add_flag("--timing", timing, "also write <out>.timing.json with per-stage wall clock");
  opt_cmd->add_flag("--progress", progress, "print optimizer progress as JSON lines");

  auto* lemmas_cmd = app.add_subcommand("lemmas", "sampling checks of the expectation identities");
  add_common(lemmas_cmd, lc);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) {
      ExperimentSpec s = make_spec(vc, "validate");
      emit(s.out, to_csv(run_validation(s)));
      if (!json_out.empty() || !dump_stats.empty()) {
        const ValidationSetup v = validation_setup(s.base);
        if (!dump_stats.empty()) write_text(dump_stats, to_csv(stats_table(v.scene, v.stats)));
        if (!json_out.empty()) {
          const std::vector<int> times = {s.base.target_channel_use()};
          const MonteCarloSetup mc{&v.scene, &v.stats, &v.pilots, &v.pbf, &v.power};
          nlohmann::json j = {{"schema", kValidateSchema},
                              {"closed_form", closed_form_json(v.power, v.stats, v.pilots, s.base, times)},
                              {"monte_carlo", montecarlo_json(empirical_sinr(mc, times, s.trials, s.threads, s.base.seed))}};
          write_text(json_out, j.dump(1) + "\n");
        }
      }
    } else if (cdf_cmd->parsed()) {
      ExperimentSpec s = make_spec(cc, "cdf");
      s.metric = metric;
      s.beamforming = beamforming;
      emit(s.out, to_csv(run_cdf(s).table));
    } else if (sweep_cmd->parsed()) {
      ExperimentSpec s = make_spec(sc, "sweep");
      s.metric = metric;
      s.beamforming = beamforming;
      s.sweep_key = var;
      s.grid = split_grid(grid);
      emit(s.out, to_csv(run_sweep(s).table));
    } else if (opt_cmd->parsed()) {
      ExperimentSpec s = make_spec(oc, "optimize");
      if (oc.draws <= 0) s.draws = 10;
      s.timing = timing;
      const OptimizerExperiment r = run_optimizer_experiment(s);
      if (progress)
        for (const auto& d : r.draws)
          for (const auto& line : d.progress) std::cout << line << '\n';
      emit(s.out, r.report.dump(1) + "\n");
    } else if (lemmas_cmd->parsed()) {
      ExperimentSpec s = make_spec(lc, "lemmas");
      emit(s.out, to_csv(run_lemmas(s)));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
