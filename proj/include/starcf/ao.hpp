// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <vector>

#include "starcf/apso.hpp"
#include "starcf/bisection.hpp"
#include "starcf/channel.hpp"
#include "starcf/closedform.hpp"
#include "starcf/estimator.hpp"
#include "starcf/rng.hpp"
#include "starcf/soc.hpp"

namespace starcf {

/// Equal power control (EPC) baseline.
inline PowerControl baseline_power(const ChannelStatistics& st) { return equal_power(st); }

/// Random passive beamforming (RBF) baseline, from its own substream.
inline PassiveBeamforming baseline_beamforming(const SystemConfig& cfg, std::uint64_t draw = 0) {
  Rng rng = Rng::substream(cfg.seed, Stream::kBaseline, draw);
  return random_beamforming(cfg.N, rng);
}

/// Scales AP rows down until every per-AP budget holds.
inline RMatrix repair_power(const RMatrix& eta, const RMatrix& tr_omega, double budget = 1.0) {
  RMatrix out = eta;
  for (Eigen::Index m = 0; m < eta.rows(); ++m) {
    const double use = eta.row(m).dot(tr_omega.row(m)) / budget;
    if (use > 1.0) out.row(m) /= use;
  }
  return out;
}

/// Closed-form objective for fixed surface and power: min_k SINR_k at channel use t.
struct Evaluation {
  ChannelStatistics stats;
  TermCoefficients coeff;
  RMatrix eta;  // repaired
  double min_sinr = 0.0;
};

inline Evaluation evaluate(const Scene& scene, const PilotAssignment& a, const PassiveBeamforming& pbf,
                           const RMatrix& eta, int t) {
  Evaluation ev;
  ev.stats = build_statistics(scene, pbf, a);
  ev.coeff = term_coefficients(ev.stats, a, scene.cfg);
  ev.eta = repair_power(eta, ev.coeff.tr_omega);
  const TimeFactors tf = time_factors(scene.cfg, t);
  ev.min_sinr = std::numeric_limits<double>::infinity();
  for (int k = 0; k < ev.coeff.K; ++k)
    ev.min_sinr = std::min(ev.min_sinr, sinr_breakdown(ev.coeff, a, ev.eta, scene.cfg, tf, k).sinr());
  return ev;
}

/// Minimum over UEs of the ergodic SE.
inline double min_se(const Scene& scene, const PilotAssignment& a, const PassiveBeamforming& pbf,
                     const RMatrix& eta) {
  const ChannelStatistics st = build_statistics(scene, pbf, a);
  return ergodic_se(PowerControl{eta}, st, a, scene.cfg).minCoeff();
}

struct AoStage {
  double apso_fitness = 0.0;  // after APSO, before power control
  double objective = 0.0;     // after power control
  double apso_seconds = 0.0;
  double bisection_seconds = 0.0;
  int probes = 0;
};

struct AoResult {
  PowerControl power;
  PassiveBeamforming pbf;
  std::vector<double> trace;  // trace[0] is the initializer's objective
  std::vector<AoStage> stages;
  bool converged = false;
};

struct AoOptions {
  int threads = 1;
  // JSON-lines style progress: outer iteration, best objective, bisection interval.
  std::function<void(int iteration, double best, double lo, double hi)> on_progress;
};

/// Alternating optimization: APSO on the surface with power fixed, then
/// bisection on power with the surface fixed, until the objective settles.
inline AoResult ao_maxmin(const Scene& scene, const PilotAssignment& a, const PassiveBeamforming& init_pbf,
                          const RMatrix& init_eta, const AoOptions& opt = {}) {
  using clock = std::chrono::steady_clock;
  const SystemConfig& cfg = scene.cfg;
  const int t = cfg.target_channel_use();

  AoResult res;
  res.pbf = init_pbf;
  Evaluation cur = evaluate(scene, a, init_pbf, init_eta, t);
  res.power.eta = cur.eta;
  double F = cur.min_sinr;
  res.trace.push_back(F);

  Rng rng = Rng::substream(cfg.seed, Stream::kApso, 0);
  const ApsoOptions apso = ApsoOptions::from(cfg, opt.threads);
  BisectOptions bopt;
  bopt.eps_rel = cfg.eps_bi;
  bopt.soc.max_iterations = cfg.soc_max_iterations;

  for (int it = 1; it <= cfg.ao_max_iterations; ++it) {
    AoStage st;
    const auto t0 = clock::now();
    const RMatrix eta_fixed = res.power.eta;
    auto fitness = [&](const PassiveBeamforming& pbf) { return evaluate(scene, a, pbf, eta_fixed, t).min_sinr; };
    const ApsoResult ap = apso_optimize(fitness, cfg.N, apso, rng, res.pbf);
    const auto t1 = clock::now();

    Evaluation ev = evaluate(scene, a, ap.best, eta_fixed, t);
    st.apso_fitness = ev.min_sinr;
    const SocProblem prob = make_soc_problem(ev.coeff, a, cfg, t);
    bopt.on_probe = [&](double lo, double hi) {
      if (opt.on_progress) opt.on_progress(it, std::max(F, lo), lo, hi);
    };
    const PowerResult pr = bisect_power(prob, std::min(ev.min_sinr, u_max_bound(prob)), ev.eta, bopt);
    const auto t2 = clock::now();

    st.probes = pr.probes;
    st.apso_seconds = std::chrono::duration<double>(t1 - t0).count();
    st.bisection_seconds = std::chrono::duration<double>(t2 - t1).count();

    const double F_new = pr.value;
    st.objective = F_new;
    res.stages.push_back(st);
    if (F_new >= F) {
      res.pbf = ap.best;
      res.power = pr.power;
    }
    const double F_prev = F;
    F = std::max(F, F_new);
    res.trace.push_back(F);
    if (opt.on_progress) opt.on_progress(it, F, pr.lo, pr.hi);
    if (std::abs(F - F_prev) <= cfg.eps_ao * std::abs(F_prev)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace starcf
