// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "starcf/channel.hpp"
#include "starcf/config.hpp"
#include "starcf/parallel.hpp"
#include "starcf/rng.hpp"

namespace starcf {

struct ApsoOptions {
  int iterations = 100;
  int particles = 10;
  double c1 = 1.496;
  double c2 = 1.496;
  double w_max = 0.9;
  double w_min = 0.4;
  int threads = 1;

  static ApsoOptions from(const SystemConfig& cfg, int threads = 1) {
    return {cfg.apso_iterations, cfg.apso_particles, cfg.c1, cfg.c2, cfg.w_max, cfg.w_min, threads};
  }
};

struct Particle {
  RVector position;  // [beta_T (N), theta_T (N), theta_R (N)]
  RVector velocity;
  RVector best_position;
  double best_fitness = -std::numeric_limits<double>::infinity();
};

struct SwarmState {
  std::vector<Particle> particles;
  RVector global_best;
  double global_best_fitness = -std::numeric_limits<double>::infinity();
  int iteration = 0;
};

struct ApsoResult {
  PassiveBeamforming best;
  double best_fitness = 0.0;
  std::vector<double> trace;  // global best after each evaluation round
};

/// tanh(3 kappa) (w_max - w_min) + w_min with kappa = (T - t) / T.
inline double inertia_weight(int t, int T, double w_max, double w_min) {
  const double kappa = T > 0 ? static_cast<double>(T - t) / T : 0.0;
  return std::tanh(3.0 * kappa) * (w_max - w_min) + w_min;
}

inline RVector encode(const PassiveBeamforming& p) {
  const int N = p.size();
  RVector x(3 * N);
  x << p.beta_T, p.theta_T, p.theta_R;
  return x;
}

inline PassiveBeamforming decode(const RVector& x) {
  const auto N = x.size() / 3;
  PassiveBeamforming p;
  p.beta_T = x.head(N);
  p.theta_T = x.segment(N, N);
  p.theta_R = x.tail(N);
  p.beta_R = RVector::Ones(N) - p.beta_T;
  return p;
}

/// Clamp amplitudes to [0, 1], wrap phases into [0, 2pi).
inline void repair(RVector& x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const auto N = x.size() / 3;
  for (Eigen::Index i = 0; i < N; ++i) x(i) = std::clamp(x(i), 0.0, 1.0);
  for (Eigen::Index i = N; i < 3 * N; ++i) {
    double th = std::fmod(x(i), two_pi);
    if (th < 0) th += two_pi;
    if (th >= two_pi) th = 0.0;
    x(i) = th;
  }
}

using FitnessFn = std::function<double(const PassiveBeamforming&)>;

/// Adaptive-inertia particle swarm over the 3N surface parameters.
/// `incumbent`, when given, seeds particle 0 so the result is never worse.
inline ApsoResult apso_optimize(const FitnessFn& fitness, int N, const ApsoOptions& opt, Rng& rng,
                                const std::optional<PassiveBeamforming>& incumbent = std::nullopt) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const int D = 3 * N;
  RVector vmax(D);
  vmax.head(N).setConstant(0.2);
  vmax.tail(2 * N).setConstant(0.2 * two_pi);

  SwarmState swarm;
  swarm.particles.resize(std::max(1, opt.particles));
  for (std::size_t l = 0; l < swarm.particles.size(); ++l) {
    Particle& pt = swarm.particles[l];
    if (l == 0 && incumbent) {
      pt.position = encode(*incumbent);
      repair(pt.position);
    } else {
      pt.position = encode(random_beamforming(N, rng));
    }
    pt.velocity.resize(D);
    for (int d = 0; d < D; ++d) pt.velocity(d) = rng.uniform(-vmax(d), vmax(d));
  }

  ApsoResult res;
  std::vector<double> fit(swarm.particles.size());
  for (int t = 0; t <= opt.iterations; ++t) {
    parallel_for(static_cast<int>(swarm.particles.size()), opt.threads,
                 [&](int l) { fit[l] = fitness(decode(swarm.particles[l].position)); });
    for (std::size_t l = 0; l < swarm.particles.size(); ++l) {
      Particle& pt = swarm.particles[l];
      if (fit[l] > pt.best_fitness) {
        pt.best_fitness = fit[l];
        pt.best_position = pt.position;
      }
      if (fit[l] > swarm.global_best_fitness) {
        swarm.global_best_fitness = fit[l];
        swarm.global_best = pt.position;
      }
    }
    res.trace.push_back(swarm.global_best_fitness);
    swarm.iteration = t;
    if (t == opt.iterations) break;

    const double w = inertia_weight(t, opt.iterations, opt.w_max, opt.w_min);
    for (Particle& pt : swarm.particles) {
      for (int d = 0; d < D; ++d) {
        const double r1 = rng.uniform(), r2 = rng.uniform();
        double v = w * pt.velocity(d) + opt.c1 * r1 * (pt.best_position(d) - pt.position(d)) +
                   opt.c2 * r2 * (swarm.global_best(d) - pt.position(d));
        pt.velocity(d) = std::clamp(v, -vmax(d), vmax(d));
      }
      pt.position += pt.velocity;
      repair(pt.position);
    }
  }
  res.best = decode(swarm.global_best);
  res.best_fitness = swarm.global_best_fitness;
  return res;
}

}  // namespace starcf
