// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "starcf/linalg.hpp"

namespace starcf {

/// Stream tags keep independent consumers of one master seed apart.
enum class Stream : std::uint64_t {
  kGeometry = 1,
  kTrial = 2,
  kApso = 3,
  kBaseline = 4,
  kOracle = 5,
  kShadowing = 6,
};

/// A seedable random stream. Substreams are keyed by counters, so the draw
/// sequence of trial i never depends on which thread ran it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : Rng(seed, {}) {}

  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) {
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * counters.size());
    auto push = [&words](std::uint64_t v) {
      words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
      words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    for (auto c : counters) push(c);
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
  }

  static Rng substream(std::uint64_t seed, Stream tag, std::uint64_t index) {
    return Rng(seed, {static_cast<std::uint64_t>(tag), index});
  }
  static Rng substream(std::uint64_t seed, Stream tag, std::uint64_t a, std::uint64_t b) {
    return Rng(seed, {static_cast<std::uint64_t>(tag), a, b});
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return normal_(engine_); }

  /// CN(0, variance).
  cplx complex_normal(double variance = 1.0) {
    const double s = std::sqrt(0.5 * variance);
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {s * re, s * im};
  }

  CVector complex_normal_vector(Eigen::Index n, double variance = 1.0) {
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_normal(variance);
    return v;
  }

  CMatrix complex_normal_matrix(Eigen::Index rows, Eigen::Index cols, double variance = 1.0) {
    CMatrix a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = complex_normal(variance);
    return a;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Zero-mean Von Mises draw on [-pi, pi) with concentration kappa
/// (Best-Fisher rejection). kappa = +inf returns 0.
inline double sample_von_mises(Rng& rng, double kappa) {
  constexpr double pi = std::numbers::pi;
  if (std::isinf(kappa)) return 0.0;
  if (kappa < 1e-8) return pi * (2.0 * rng.uniform() - 1.0);
  if (kappa > 1e6) {
    double x = rng.normal() / std::sqrt(kappa);
    x = std::fmod(x + pi, 2.0 * pi);
    if (x < 0) x += 2.0 * pi;
    return x - pi;
  }
  double s;
  if (kappa < 1e-5) {
    s = 1.0 / kappa + kappa;
  } else {
    const double r = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (r - std::sqrt(2.0 * r)) / (2.0 * kappa);
    s = (1.0 + rho * rho) / (2.0 * rho);
  }
  double w;
  for (;;) {
    const double u = rng.uniform();
    const double z = std::cos(pi * u);
    w = (1.0 + s * z) / (s + z);
    const double y = kappa * (s - w);
    const double v = rng.uniform();
    if (y * (2.0 - y) - v >= 0.0) break;
    if (v > 0.0 && std::log(y / v) + 1.0 - y >= 0.0) break;
  }
  double angle = std::acos(std::clamp(w, -1.0, 1.0));
  if (rng.uniform() < 0.5) angle = -angle;
  return angle;
}

}  // namespace starcf
