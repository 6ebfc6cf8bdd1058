// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "starcf/ao.hpp"
#include "starcf/apso.hpp"
#include "starcf/channel.hpp"
#include "starcf/closedform.hpp"
#include "starcf/config.hpp"
#include "starcf/error.hpp"
#include "starcf/estimator.hpp"
#include "starcf/montecarlo.hpp"
#include "starcf/parallel.hpp"
#include "starcf/rng.hpp"

namespace starcf {

inline constexpr const char* kCdfSchema = "starcf-cdf/1";
inline constexpr const char* kSweepSchema = "starcf-sweep/1";
inline constexpr const char* kValidateSchema = "starcf-validate/1";
inline constexpr const char* kLemmasSchema = "starcf-lemmas/1";
inline constexpr const char* kOptimizeSchema = "starcf-optimize/1";

struct ExperimentSpec {
  std::string name = "experiment";
  SystemConfig base;
  std::string sweep_key;  // sweep only
  std::vector<std::string> grid;
  int draws = 100;
  long long trials = 100000;
  int threads = 1;
  std::string metric = "sum-se";       // sum-se | min-se | mean-se
  std::string beamforming = "random";  // random | apso
  std::string out;
  bool timing = false;  // optimizer: also write <out>.timing.json
};

inline void validate_spec(const ExperimentSpec& s, bool needs_grid) {
  validate(s.base);
  if (s.draws < 1) throw Error(ErrorCode::kInvalidConfig, "draws must be >= 1");
  if (s.trials < 1) throw Error(ErrorCode::kInvalidConfig, "trials must be >= 1");
  if (s.threads < 1) throw Error(ErrorCode::kInvalidConfig, "threads must be >= 1");
  if (s.metric != "sum-se" && s.metric != "min-se" && s.metric != "mean-se")
    throw Error(ErrorCode::kInvalidConfig, "unknown metric '" + s.metric + "'");
  if (s.beamforming != "random" && s.beamforming != "apso")
    throw Error(ErrorCode::kInvalidConfig, "unknown beamforming '" + s.beamforming + "'");
  if (needs_grid) {
    if (s.sweep_key.empty()) throw Error(ErrorCode::kInvalidConfig, "sweep variable missing");
    if (s.grid.empty()) throw Error(ErrorCode::kInvalidConfig, "sweep grid is empty");
    for (const auto& g : s.grid) {
      SystemConfig probe = s.base;
      set_config_value(probe, s.sweep_key, g);
      validate(probe);
    }
  }
}

/// 9 significant digits, the precision of every emitted float.
inline std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline double round9(double v) { return std::strtod(fmt9(v).c_str(), nullptr); }

struct Table {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline std::string to_csv(const Table& t) {
  std::ostringstream os;
  os << "# " << t.schema << '\n';
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << r[c];
    os << '\n';
  }
  return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

/// Configuration of geometry draw d; arms that share (base.seed, d) share geometry.
inline SystemConfig draw_config(const SystemConfig& base, int d) {
  SystemConfig c = base;
  Rng r = Rng::substream(base.seed, Stream::kGeometry, 0x9e37u, static_cast<std::uint64_t>(d));
  c.seed = r.engine()() >> 1;
  return c;
}

/// Indices of the rows re-derived after a run.
inline std::vector<std::size_t> spot_rows(std::size_t n, std::size_t count = 5) {
  std::vector<std::size_t> idx;
  if (n == 0) return idx;
  if (n <= count) {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
  }
  for (std::size_t i = 0; i < count; ++i) idx.push_back(i * (n - 1) / (count - 1));
  return idx;
}

inline double reduce_se(const RVector& se, const std::string& metric) {
  if (metric == "min-se") return se.minCoeff();
  if (metric == "mean-se") return se.mean();
  return se.sum();
}

/// Surface configuration for one draw: RBF, or APSO against EPC.
inline PassiveBeamforming draw_beamforming(const Scene& scene, const PilotAssignment& a, const std::string& mode) {
  const SystemConfig& cfg = scene.cfg;
  PassiveBeamforming pbf = baseline_beamforming(cfg);
  if (mode != "apso") return pbf;
  const int t = cfg.target_channel_use();
  auto fitness = [&](const PassiveBeamforming& cand) {
    const ChannelStatistics st = build_statistics(scene, cand, a);
    const TermCoefficients c = term_coefficients(st, a, cfg);
    return min_sinr(sinr_closed_form(t, equal_power(c), c, a, cfg));
  };
  Rng rng = Rng::substream(cfg.seed, Stream::kApso, 1);
  return apso_optimize(fitness, cfg.N, ApsoOptions::from(cfg), rng, pbf).best;
}

/// Closed-form SE metric of one geometry draw under EPC.
inline double evaluate_draw(const SystemConfig& cfg, const std::string& metric, const std::string& beamforming) {
  const Scene scene = make_scene(cfg);
  const PilotAssignment a = assign_pilots(cfg.K(), cfg.tau_p);
  const PassiveBeamforming pbf = draw_beamforming(scene, a, beamforming);
  const ChannelStatistics st = build_statistics(scene, pbf, a);
  const TermCoefficients c = term_coefficients(st, a, cfg);
  return reduce_se(ergodic_se(equal_power(c), c, a, cfg), metric);
}

struct CdfResult {
  Table table;
  std::vector<double> per_draw;  // unsorted, by draw index
};

inline CdfResult run_cdf(const ExperimentSpec& spec) {
  validate_spec(spec, false);
  CdfResult res;
  res.per_draw.assign(spec.draws, 0.0);
  parallel_for(spec.draws, spec.threads, [&](int d) {
    res.per_draw[d] = evaluate_draw(draw_config(spec.base, d), spec.metric, spec.beamforming);
  });

  std::vector<int> order(spec.draws);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return res.per_draw[x] < res.per_draw[y]; });
  res.table.schema = kCdfSchema;
  res.table.columns = {"value", "cdf", "draw"};
  for (int r = 0; r < spec.draws; ++r)
    res.table.rows.push_back({fmt9(res.per_draw[order[r]]), fmt9(static_cast<double>(r + 1) / spec.draws),
                              std::to_string(order[r])});

  for (std::size_t r : spot_rows(res.table.rows.size())) {
    const int d = order[r];
    const double again = evaluate_draw(draw_config(spec.base, d), spec.metric, spec.beamforming);
    if (fmt9(again) != res.table.rows[r][0])
      throw Error(ErrorCode::kVerification, "cdf row " + std::to_string(r) + " does not reproduce");
  }
  if (!spec.out.empty()) write_text(spec.out, to_csv(res.table));
  return res;
}

struct SweepPoint {
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline SweepPoint sweep_point(const ExperimentSpec& spec, const std::string& value) {
  SystemConfig cfg = spec.base;
  set_config_value(cfg, spec.sweep_key, value);
  std::vector<double> v(spec.draws);
  parallel_for(spec.draws, spec.threads,
               [&](int d) { v[d] = evaluate_draw(draw_config(cfg, d), spec.metric, spec.beamforming); });
  SweepPoint p;
  for (double x : v) p.mean += x;
  p.mean /= spec.draws;
  if (spec.draws > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - p.mean) * (x - p.mean);
    p.stderr_ = std::sqrt(ss / (spec.draws - 1) / spec.draws);
  }
  return p;
}

struct SweepResult {
  Table table;
  std::vector<SweepPoint> points;
};

inline SweepResult run_sweep(const ExperimentSpec& spec) {
  validate_spec(spec, true);
  SweepResult res;
  res.table.schema = kSweepSchema;
  res.table.columns = {spec.sweep_key, "mean_" + spec.metric, "stderr"};
  for (const auto& g : spec.grid) {
    const SweepPoint p = sweep_point(spec, g);
    res.points.push_back(p);
    res.table.rows.push_back({g, fmt9(p.mean), fmt9(p.stderr_)});
  }
  for (std::size_t r : spot_rows(res.table.rows.size())) {
    const SweepPoint p = sweep_point(spec, spec.grid[r]);
    if (fmt9(p.mean) != res.table.rows[r][1] || fmt9(p.stderr_) != res.table.rows[r][2])
      throw Error(ErrorCode::kVerification, "sweep row " + std::to_string(r) + " does not reproduce");
  }
  if (!spec.out.empty()) write_text(spec.out, to_csv(res.table));
  return res;
}

/// Closed form against Monte Carlo, per UE and term, on draw 0 of the spec
/// (RBF surface, EPC power).
struct ValidationSetup {
  Scene scene;
  PilotAssignment pilots;
  PassiveBeamforming pbf;
  ChannelStatistics stats;
  PowerControl power;
};

inline ValidationSetup validation_setup(const SystemConfig& cfg) {
  ValidationSetup v{make_scene(cfg), assign_pilots(cfg.K(), cfg.tau_p), baseline_beamforming(cfg), {}, {}};
  v.stats = build_statistics(v.scene, v.pbf, v.pilots);
  v.power = equal_power(v.stats);
  return v;
}

inline Table run_validation(const ExperimentSpec& spec) {
  validate_spec(spec, false);
  const SystemConfig& cfg = spec.base;
  const ValidationSetup v = validation_setup(cfg);
  const MonteCarloSetup mc{&v.scene, &v.stats, &v.pilots, &v.pbf, &v.power};
  const std::vector<int> times = {cfg.target_channel_use()};
  const MonteCarloResult emp = empirical_sinr(mc, times, spec.trials, spec.threads, cfg.seed);

  Table t;
  t.schema = kValidateSchema;
  t.columns = {"t", "ue", "term", "closed_form", "monte_carlo", "stderr", "rel_error"};
  const auto cf = sinr_closed_form(times[0], v.power, v.stats, v.pilots, cfg);
  for (int k = 0; k < cfg.K(); ++k) {
    const SinrBreakdown& c = cf[k];
    const EmpiricalBreakdown& e = emp.terms[0][k];
    auto row = [&](const char* name, double a, double b, double se) {
      const double rel = a != 0.0 ? std::abs(b - a) / std::abs(a) : std::abs(b);
      t.rows.push_back({std::to_string(times[0]), std::to_string(k), name, fmt9(a), fmt9(b), fmt9(se), fmt9(rel)});
    };
    row("ds", c.ds, e.mean.ds, e.stderr_.ds);
    row("bu", c.bu, e.mean.bu, e.stderr_.bu);
    row("ui_coherent", c.ui_coherent, e.mean.ui_coherent, e.stderr_.ui_coherent);
    row("ui_noncoherent", c.ui_noncoherent, e.mean.ui_noncoherent, e.stderr_.ui_noncoherent);
    row("hwi_ap", c.hwi_ap, e.mean.hwi_ap, e.stderr_.hwi_ap);
    row("hwi_ue", c.hwi_ue, e.mean.hwi_ue, e.stderr_.hwi_ue);
    row("sinr", c.sinr(), e.sinr, 0.0);
  }
  if (!spec.out.empty()) write_text(spec.out, to_csv(t));
  return t;
}

/// Sampling checks of the statistical identities the closed form rests on.
inline Table run_lemmas(const ExperimentSpec& spec) {
  validate_spec(spec, false);
  const long long n = spec.trials;
  const SystemConfig& cfg = spec.base;
  Table t;
  t.schema = kLemmasSchema;
  t.columns = {"identity", "parameter", "sampled", "exact", "rel_error"};
  auto row = [&](const std::string& id, const std::string& par, double s, double e) {
    const double rel = e != 0.0 ? std::abs(s - e) / std::abs(e) : std::abs(s);
    t.rows.push_back({id, par, fmt9(s), fmt9(e), fmt9(rel)});
  };

  {
    Rng rng = Rng::substream(cfg.seed, Stream::kOracle, 1);
    const CMatrix X = rng.complex_normal_matrix(4, 4);
    const CMatrix Z = X * X.adjoint();
    const double err = lemma1_oracle(4, 4, 1.0, Z, n, rng);
    row("lemma1", "L=4,N=4", err / Z.trace().real(), 0.0);
  }
  {
    Rng rng = Rng::substream(cfg.seed, Stream::kOracle, 2);
    const CMatrix A = rng.complex_normal_matrix(4, 4);
    const CMatrix Y = rng.complex_normal_matrix(4, 4);
    const CMatrix C = Y * Y.adjoint();
    const double exact = lemma2_closed_form(A, C);
    const double rel = lemma2_oracle(A, C, n, rng);
    row("lemma2", "K=4", exact * (1.0 + rel), exact);
  }
  {
    const double d2 = phase_noise_variance(cfg.f_c, cfg.c_phi, cfg.T_s) +
                      phase_noise_variance(cfg.f_c, cfg.c_psi, cfg.T_s);
    // Whole Wiener paths of one AP and one UE oscillator.
    SystemConfig pair = cfg;
    pair.M = 1;
    pair.K_R = 1;
    pair.K_T = 0;
    pair.tau_p = 1;
    const std::vector<int> ts = {1, 10, 50};
    std::vector<cplx> acc(ts.size());
    Rng rng = Rng::substream(cfg.seed, Stream::kOracle, 3);
    for (long long i = 0; i < n; ++i) {
      const PhaseNoisePath path = sample_phase_noise(pair, rng);
      for (std::size_t j = 0; j < ts.size(); ++j) acc[j] += std::polar(1.0, path.combined(0, 0, ts[j]));
    }
    for (std::size_t j = 0; j < ts.size(); ++j)
      row("phase_noise_mean", "t=" + std::to_string(ts[j]), (acc[j] / static_cast<double>(n)).real(),
          std::exp(-d2 * ts[j] / 2.0));
  }
  for (double kappa : {0.5, 1.0, 3.0}) {
    Rng rng = Rng::substream(cfg.seed, Stream::kOracle, 4, static_cast<std::uint64_t>(kappa * 10));
    double acc = 0.0;
    for (long long i = 0; i < n; ++i) acc += std::cos(sample_von_mises(rng, kappa));
    row("phase_error_cf", "vartheta=" + fmt9(kappa), acc / static_cast<double>(n), phase_error_cf(kappa));
  }
  if (!spec.out.empty()) write_text(spec.out, to_csv(t));
  return t;
}

struct OptimizerDraw {
  std::uint64_t seed = 0;
  std::vector<std::string> progress;  // JSON lines
  double baseline_min_se = 0.0;
  double ao_min_se = 0.0;
  AoResult ao;
};

inline std::string progress_line(int draw, int iteration, double best, double lo, double hi);

inline OptimizerDraw optimize_draw(const SystemConfig& cfg, int draw = 0) {
  OptimizerDraw d;
  d.seed = cfg.seed;
  const Scene scene = make_scene(cfg);
  const PilotAssignment a = assign_pilots(cfg.K(), cfg.tau_p);
  const PassiveBeamforming pbf0 = baseline_beamforming(cfg);
  const RMatrix eta0 = equal_power(build_statistics(scene, pbf0, a)).eta;
  d.baseline_min_se = min_se(scene, a, pbf0, eta0);
  AoOptions opt;
  opt.on_progress = [&](int it, double best, double lo, double hi) {
    d.progress.push_back(progress_line(draw, it, best, lo, hi));
  };
  d.ao = ao_maxmin(scene, a, pbf0, eta0, opt);
  d.ao_min_se = min_se(scene, a, d.ao.pbf, d.ao.power.eta);
  return d;
}

inline nlohmann::json cdf_json(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back({round9(v[i]), round9(static_cast<double>(i + 1) / v.size())});
  return out;
}

struct OptimizerExperiment {
  std::vector<OptimizerDraw> draws;
  nlohmann::json report;
  nlohmann::json timing;
};

/// Paired AO-versus-baseline comparison over geometry draws. Timings go to a
/// separate document so the main report is reproducible byte for byte.
inline OptimizerExperiment run_optimizer_experiment(const ExperimentSpec& spec) {
  validate_spec(spec, false);
  OptimizerExperiment res;
  res.draws.resize(spec.draws);
  parallel_for(spec.draws, spec.threads, [&](int d) { res.draws[d] = optimize_draw(draw_config(spec.base, d), d); });

  nlohmann::json draws = nlohmann::json::array(), times = nlohmann::json::array();
  std::vector<double> base, opt;
  for (int d = 0; d < spec.draws; ++d) {
    const OptimizerDraw& r = res.draws[d];
    nlohmann::json trace = nlohmann::json::array(), stages = nlohmann::json::array();
    for (double f : r.ao.trace) trace.push_back(round9(f));
    for (const AoStage& s : r.ao.stages)
      stages.push_back({{"apso_seconds", s.apso_seconds}, {"bisection_seconds", s.bisection_seconds}});
    draws.push_back({{"draw", d},
                     {"seed", r.seed},
                     {"baseline_min_se", round9(r.baseline_min_se)},
                     {"ao_min_se", round9(r.ao_min_se)},
                     {"trace", trace},
                     {"iterations", r.ao.stages.size()},
                     {"converged", r.ao.converged}});
    times.push_back({{"draw", d}, {"stages", stages}});
    base.push_back(r.baseline_min_se);
    opt.push_back(r.ao_min_se);
  }
  res.report = {{"schema", kOptimizeSchema},
                {"name", spec.name},
                {"seed", spec.base.seed},
                {"draws", draws},
                {"cdf", {{"baseline", cdf_json(base)}, {"ao", cdf_json(opt)}}}};
  res.timing = {{"schema", kOptimizeSchema}, {"draws", times}};

  for (std::size_t r : spot_rows(res.draws.size())) {
    const OptimizerDraw again = optimize_draw(draw_config(spec.base, static_cast<int>(r)), static_cast<int>(r));
    if (fmt9(again.ao_min_se) != fmt9(res.draws[r].ao_min_se) ||
        fmt9(again.baseline_min_se) != fmt9(res.draws[r].baseline_min_se))
      throw Error(ErrorCode::kVerification, "optimizer draw " + std::to_string(r) + " does not reproduce");
  }
  if (!spec.out.empty()) {
    write_text(spec.out, res.report.dump(1) + "\n");
    if (spec.timing) write_text(spec.out + ".timing.json", res.timing.dump(1) + "\n");
  }
  return res;
}

/// Correlation matrices as long-format rows: matrix,m,k,row,col,re,im.
inline Table stats_table(const Scene& scene, const ChannelStatistics& st) {
  Table t;
  t.schema = "starcf-stats/1";
  t.columns = {"matrix", "m", "k", "row", "col", "re", "im"};
  auto put = [&](const char* name, int m, int k, const CMatrix& A) {
    for (Eigen::Index r = 0; r < A.rows(); ++r)
      for (Eigen::Index c = 0; c < A.cols(); ++c)
        t.rows.push_back({name, std::to_string(m), std::to_string(k), std::to_string(r), std::to_string(c),
                          fmt9(A(r, c).real()), fmt9(A(r, c).imag())});
  };
  put("R_S", -1, -1, scene.corr.R_S);
  for (int m = 0; m < st.M; ++m) put("R_A", m, -1, scene.corr.R_A[m]);
  for (int m = 0; m < st.M; ++m)
    for (int k = 0; k < st.K; ++k) {
      put("R_d", m, k, scene.corr.R_d(m, k));
      put("R", m, k, st.R(m, k));
      put("Omega", m, k, st.Omega(m, k));
    }
  return t;
}

inline nlohmann::json breakdown_json(const SinrBreakdown& b, bool with_sinr = true) {
  nlohmann::json j = {{"ds", round9(b.ds)},
                      {"bu", round9(b.bu)},
                      {"ui_coherent", round9(b.ui_coherent)},
                      {"ui_noncoherent", round9(b.ui_noncoherent)},
                      {"hwi_ap", round9(b.hwi_ap)},
                      {"hwi_ue", round9(b.hwi_ue)},
                      {"noise", round9(b.noise)}};
  if (with_sinr) j["sinr"] = round9(b.sinr());
  return j;
}

/// Per-UE closed-form breakdown and SE, one row per (k, t).
inline nlohmann::json closed_form_json(const PowerControl& power, const ChannelStatistics& st,
                                       const PilotAssignment& a, const SystemConfig& cfg, const std::vector<int>& times) {
  const TermCoefficients c = term_coefficients(st, a, cfg);
  const RVector se = ergodic_se(power, c, a, cfg);
  nlohmann::json rows = nlohmann::json::array();
  for (int t : times) {
    const auto b = sinr_closed_form(t, power, c, a, cfg);
    for (int k = 0; k < c.K; ++k)
      rows.push_back({{"k", k}, {"t", t}, {"se", round9(se(k))}, {"terms", breakdown_json(b[k])}});
  }
  return rows;
}

inline nlohmann::json montecarlo_json(const MonteCarloResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t ti = 0; ti < r.times.size(); ++ti)
    for (std::size_t k = 0; k < r.terms[ti].size(); ++k) {
      const EmpiricalBreakdown& e = r.terms[ti][k];
      nlohmann::json ui = nlohmann::json::array();
      for (double v : e.ui_per_interferer) ui.push_back(round9(v));
      rows.push_back({{"k", k},
                      {"t", r.times[ti]},
                      {"mean", breakdown_json(e.mean)},
                      {"sinr", round9(e.sinr)},
                      {"stderr", breakdown_json(e.stderr_, false)},
                      {"ui_per_interferer", ui}});
    }
  return {{"trials", r.trials}, {"rows", rows}};
}

/// One progress line of the optimizer.
inline std::string progress_line(int draw, int iteration, double best, double lo, double hi) {
  nlohmann::json j = {{"draw", draw},
                      {"iteration", iteration},
                      {"best_fitness", round9(best)},
                      {"u_interval", {round9(lo), round9(hi)}}};
  return j.dump();
}

}  // namespace starcf
