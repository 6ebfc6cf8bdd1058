// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "starcf/config.hpp"
#include "starcf/error.hpp"
#include "starcf/rng.hpp"

namespace starcf {

using Point3 = std::array<double, 3>;

enum class Side { kReflection, kTransmission };

struct Geometry {
  std::vector<Point3> ap_positions;
  std::vector<Point3> ue_positions;
  std::vector<Side> ue_side;
  Point3 ris_position{0.0, 0.0, 30.0};
};

/// Linear gains. beta_d and xi are divided by the receiver noise power so
/// that every downstream noise variance is 1; alpha stays dimensionless.
struct LargeScale {
  RMatrix beta_d;  // M x K
  RVector xi;      // M
  RVector alpha;   // K
  RVector iota;    // K
};

inline double distance(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Reflection-space UEs come first (indices 0..K_R-1), then transmission-space UEs.
inline Geometry place_entities(const SystemConfig& cfg, Rng& rng) {
  Geometry g;
  g.ris_position = {0.0, 0.0, cfg.ris_height};
  g.ap_positions.reserve(cfg.M);
  for (int m = 0; m < cfg.M; ++m) {
    const double x = rng.uniform(-500.0, -250.0);
    const double y = rng.uniform(250.0, 500.0);
    g.ap_positions.push_back({x, y, cfg.ap_height});
  }
  for (int k = 0; k < cfg.K_R; ++k) {
    const double x = rng.uniform(-325.0, -125.0);
    const double y = rng.uniform(-325.0, -125.0);
    g.ue_positions.push_back({x, y, cfg.ue_height});
    g.ue_side.push_back(Side::kReflection);
  }
  for (int k = 0; k < cfg.K_T; ++k) {
    const double x = rng.uniform(125.0, 325.0);
    const double y = rng.uniform(-325.0, -125.0);
    g.ue_positions.push_back({x, y, cfg.ue_height});
    g.ue_side.push_back(Side::kTransmission);
  }
  return g;
}

inline Geometry place_entities(const SystemConfig& cfg) {
  Rng rng = Rng::substream(cfg.seed, Stream::kGeometry, 0);
  return place_entities(cfg, rng);
}

/// Log-distance gain in dB at distance d (m).
inline double pathloss_db(double d, const SystemConfig& cfg) {
  if (!(d > 0)) throw Error(ErrorCode::kZeroDistance, "coincident entities");
  return cfg.pathloss_intercept_db - cfg.pathloss_slope_db * std::log10(d);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline LargeScale large_scale_fading(const Geometry& g, const SystemConfig& cfg) {
  const int M = static_cast<int>(g.ap_positions.size());
  const int K = static_cast<int>(g.ue_positions.size());
  const double noise = cfg.noise_power();
  Rng shadow = Rng::substream(cfg.seed, Stream::kShadowing, 0);
  auto shadow_db = [&]() { return cfg.shadowing_std_db > 0 ? cfg.shadowing_std_db * shadow.normal() : 0.0; };

  LargeScale ls;
  ls.beta_d.resize(M, K);
  ls.xi.resize(M);
  ls.alpha.resize(K);
  ls.iota = RVector::Constant(K, cfg.rician_factor());
  for (int m = 0; m < M; ++m) {
    for (int k = 0; k < K; ++k) {
      const double db = pathloss_db(distance(g.ap_positions[m], g.ue_positions[k]), cfg) -
                        cfg.direct_loss_db + shadow_db();
      ls.beta_d(m, k) = db_to_linear(db) / noise;
    }
  }
  for (int m = 0; m < M; ++m) {
    const double db = pathloss_db(distance(g.ap_positions[m], g.ris_position), cfg) +
                      cfg.cascade_gain_db + shadow_db();
    ls.xi(m) = db_to_linear(db) / noise;
  }
  for (int k = 0; k < K; ++k) {
    ls.alpha(k) = db_to_linear(pathloss_db(distance(g.ris_position, g.ue_positions[k]), cfg));
  }
  return ls;
}

/// Azimuth of `to` seen from `from`, measured from the y axis.
inline double nominal_angle(const Point3& from, const Point3& to) {
  return std::atan2(to[0] - from[0], to[1] - from[1]);
}

}  // namespace starcf
