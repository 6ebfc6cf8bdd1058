// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "starcf/config.hpp"
#include "starcf/linalg.hpp"
#include "starcf/rng.hpp"
#include "starcf/scenario.hpp"

namespace starcf {

struct CorrelationSet {
  Grid2<CMatrix> R_d;        // M x K, each L x L
  std::vector<CMatrix> R_A;  // M, each L x L
  CMatrix R_S;               // N x N
};

/// Amplitude/phase configuration of the surface. beta_T + beta_R = 1.
struct PassiveBeamforming {
  RVector beta_T, beta_R, theta_T, theta_R;

  int size() const { return static_cast<int>(beta_T.size()); }
};

struct ChannelRealization {
  Grid2<CVector> f;  // M x K cascaded channel
  Grid2<CVector> d;  // M x K direct part
  std::vector<CMatrix> Q;
  std::vector<CVector> g;
  std::vector<RVector> phase_err;  // per UE, per element
};

/// Position of element l (0-based) on the square planar array in the x = 0 plane.
inline std::array<double, 3> element_position(int l, int side, double d_H, double d_V) {
  return {0.0, static_cast<double>(l % side) * d_H, static_cast<double>(l / side) * d_V};
}

inline int checked_side(int N) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(N))));
  if (N < 1 || side * side != N) throw Error(ErrorCode::kNonSquareN, "N = " + std::to_string(N));
  return side;
}

inline CMatrix ris_correlation(int N, double d_H, double d_V, double wavelength) {
  const int side = checked_side(N);
  CMatrix R(N, N);
  for (int a = 0; a < N; ++a) {
    const auto ua = element_position(a, side, d_H, d_V);
    for (int b = 0; b < N; ++b) {
      const auto ub = element_position(b, side, d_H, d_V);
      const double dist = std::hypot(ua[1] - ub[1], ua[2] - ub[2]);
      R(a, b) = d_H * d_V * sinc(2.0 * dist / wavelength);
    }
  }
  return R;
}

/// Gaussian local scattering around `angle` (rad) on a half-wavelength ULA.
inline CMatrix ap_correlation(int L, double angle, double angular_std) {
  constexpr double pi = std::numbers::pi;
  CMatrix R(L, L);
  for (int a = 0; a < L; ++a) {
    for (int b = 0; b < L; ++b) {
      const double delta = static_cast<double>(a - b);
      const double spread = pi * delta * std::cos(angle) * angular_std;
      R(a, b) = std::polar(std::exp(-0.5 * spread * spread), pi * delta * std::sin(angle));
    }
  }
  return R;
}

/// I1(x)/I0(x). The ratio of exponentially scaled Bessel functions would
/// overflow past ~700, where the asymptotic series is already exact to double.
inline double phase_error_cf(double vartheta) {
  if (std::isinf(vartheta)) return 1.0;
  if (vartheta <= 0.0) return 0.0;
  if (vartheta > 700.0) {
    const double x = vartheta;
    return 1.0 - 1.0 / (2.0 * x) - 1.0 / (8.0 * x * x) - 1.0 / (8.0 * x * x * x) -
           25.0 / (128.0 * x * x * x * x);
  }
  return std::cyl_bessel_i(1.0, vartheta) / std::cyl_bessel_i(0.0, vartheta);
}

/// varsigma^2 * A + (1 - varsigma^2) * diag(A)
inline CMatrix phase_error_average(const CMatrix& A, double varsigma) {
  const double s2 = varsigma * varsigma;
  CMatrix out = s2 * A;
  out.diagonal() = A.diagonal();
  return out;
}

struct EffectiveRis {
  CMatrix G_tilde;
  CMatrix R_S_tilde;
};

inline EffectiveRis effective_ris_matrices(const CMatrix& R_S, const CMatrix& G, double varsigma) {
  return {phase_error_average(G, varsigma), phase_error_average(R_S, varsigma)};
}

/// exp(j 2pi/lambda <u_n, direction>) for every element.
inline CVector los_steering(const std::array<double, 3>& direction, int N, double d_H, double d_V,
                            double wavelength) {
  const int side = checked_side(N);
  const double k0 = 2.0 * std::numbers::pi / wavelength;
  CVector g(N);
  for (int n = 0; n < N; ++n) {
    const auto u = element_position(n, side, d_H, d_V);
    g(n) = std::polar(1.0, k0 * (u[0] * direction[0] + u[1] * direction[1] + u[2] * direction[2]));
  }
  return g;
}

inline std::array<double, 3> unit_direction(const Point3& from, const Point3& to) {
  const double d = distance(from, to);
  if (!(d > 0)) throw Error(ErrorCode::kZeroDistance, "coincident entities");
  return {(to[0] - from[0]) / d, (to[1] - from[1]) / d, (to[2] - from[2]) / d};
}

inline PassiveBeamforming random_beamforming(int N, Rng& rng) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  PassiveBeamforming p;
  p.beta_T.resize(N);
  p.theta_T.resize(N);
  p.theta_R.resize(N);
  for (int n = 0; n < N; ++n) p.beta_T(n) = rng.uniform();
  for (int n = 0; n < N; ++n) p.theta_T(n) = rng.uniform(0.0, two_pi);
  for (int n = 0; n < N; ++n) p.theta_R(n) = rng.uniform(0.0, two_pi);
  p.beta_R = RVector::Ones(N) - p.beta_T;
  return p;
}

/// Everything about one deployment that does not depend on the surface
/// configuration. R_mk for any beamforming costs one N x N quadratic form per UE.
struct Scene {
  SystemConfig cfg;
  Geometry geometry;
  LargeScale ls;
  CorrelationSet corr;
  double varsigma = 0.0;
  std::vector<CVector> g_bar;  // LoS steering per UE
  std::vector<CMatrix> H;      // per UE: s_k = v_k^H H_k v_k

  // Square-root factors for sampling.
  Grid2<CMatrix> chol_R_d;
  std::vector<CMatrix> chol_R_A;
  CMatrix chol_R_S;

  int M() const { return cfg.M; }
  int K() const { return cfg.K(); }
  int L() const { return cfg.L; }
  int N() const { return cfg.N; }
};

inline Scene make_scene(const SystemConfig& cfg, const Geometry& geometry) {
  validate(cfg);
  Scene s;
  s.cfg = cfg;
  s.geometry = geometry;
  s.ls = large_scale_fading(geometry, cfg);
  const int M = cfg.M, K = cfg.K(), L = cfg.L, N = cfg.N;
  if (static_cast<int>(geometry.ap_positions.size()) != M ||
      static_cast<int>(geometry.ue_positions.size()) != K ||
      static_cast<int>(geometry.ue_side.size()) != K) {
    throw Error(ErrorCode::kInvalidConfig, "geometry does not match the configuration");
  }
  const double sigma = cfg.ap_angle_std_deg * std::numbers::pi / 180.0;
  const double lambda = cfg.wavelength();
  const double dH = cfg.element_width(), dV = cfg.element_height();

  s.corr.R_S = ris_correlation(N, dH, dV, lambda);
  s.corr.R_A.resize(M);
  s.corr.R_d = Grid2<CMatrix>(M, K);
  for (int m = 0; m < M; ++m) {
    const auto& ap = geometry.ap_positions[m];
    s.corr.R_A[m] = ap_correlation(L, nominal_angle(ap, geometry.ris_position), sigma);
    for (int k = 0; k < K; ++k) {
      s.corr.R_d(m, k) =
          s.ls.beta_d(m, k) * ap_correlation(L, nominal_angle(ap, geometry.ue_positions[k]), sigma);
    }
  }

  s.varsigma = phase_error_cf(cfg.vartheta);
  const CMatrix R_S_tilde = phase_error_average(s.corr.R_S, s.varsigma);
  s.g_bar.resize(K);
  s.H.resize(K);
  for (int k = 0; k < K; ++k) {
    s.g_bar[k] = los_steering(unit_direction(geometry.ris_position, geometry.ue_positions[k]), N, dH,
                              dV, lambda);
    const CMatrix G = s.g_bar[k] * s.g_bar[k].adjoint();
    const CMatrix G_tilde = phase_error_average(G, s.varsigma);
    const double iota = s.ls.iota(k), alpha = s.ls.alpha(k);
    const double w_los = alpha * iota / (iota + 1.0);
    const double w_nlos = alpha / (iota + 1.0);
    s.H[k] = w_los * s.corr.R_S.cwiseProduct(G_tilde.conjugate()) +
             w_nlos * s.corr.R_S.cwiseProduct(R_S_tilde.conjugate());
  }

  s.chol_R_S = cholesky_factor(s.corr.R_S);
  s.chol_R_A.resize(M);
  s.chol_R_d = Grid2<CMatrix>(M, K);
  for (int m = 0; m < M; ++m) {
    s.chol_R_A[m] = cholesky_factor(s.corr.R_A[m]);
    for (int k = 0; k < K; ++k) s.chol_R_d(m, k) = cholesky_factor(s.corr.R_d(m, k));
  }
  return s;
}

inline Scene make_scene(const SystemConfig& cfg) { return make_scene(cfg, place_entities(cfg)); }

inline Side ue_side(const Scene& s, int k) {
  if (k < 0 || k >= static_cast<int>(s.geometry.ue_side.size())) {
    throw Error(ErrorCode::kSideMismatch, "UE " + std::to_string(k) + " has no side");
  }
  return s.geometry.ue_side[k];
}

/// Diagonal of Phi_k as a vector; zero when UE k has no surface path.
inline CVector effective_phases(const Scene& s, const PassiveBeamforming& pbf, int k) {
  const int N = s.N();
  if (pbf.size() != N) throw Error(ErrorCode::kInvalidConfig, "beamforming has the wrong length");
  const Side side = ue_side(s, k);
  CVector v = CVector::Zero(N);
  switch (s.cfg.mode) {
    case Mode::kNoRis:
      return v;
    case Mode::kReflectOnlyPair:
      if (side == Side::kTransmission) return v;
      for (int n = 0; n < N; ++n) v(n) = std::polar(1.0, pbf.theta_R(n));
      return v;
    case Mode::kStar:
      for (int n = 0; n < N; ++n) {
        v(n) = side == Side::kReflection ? std::polar(std::sqrt(pbf.beta_R(n)), pbf.theta_R(n))
                                         : std::polar(std::sqrt(pbf.beta_T(n)), pbf.theta_T(n));
      }
      return v;
  }
  return v;
}

/// tr(R^f_mk) / xi_m for UE k: the surface-path power before the AP-surface gain.
inline double cascade_power(const Scene& s, const PassiveBeamforming& pbf, int k) {
  const CVector v = effective_phases(s, pbf, k);
  return std::max(0.0, v.dot(s.H[k] * v).real());
}

inline CMatrix cascaded_covariance(const Scene& s, const PassiveBeamforming& pbf, int k, int m) {
  return s.corr.R_d(m, k) + s.corr.R_A[m] * (s.ls.xi(m) * cascade_power(s, pbf, k));
}

/// R_mk for every AP/UE pair.
inline Grid2<CMatrix> channel_covariances(const Scene& s, const PassiveBeamforming& pbf) {
  Grid2<CMatrix> R(s.M(), s.K());
  for (int k = 0; k < s.K(); ++k) {
    const double pk = cascade_power(s, pbf, k);
    for (int m = 0; m < s.M(); ++m) R(m, k) = s.corr.R_d(m, k) + s.corr.R_A[m] * (s.ls.xi(m) * pk);
  }
  return R;
}

inline ChannelRealization sample_channel(const Scene& s, const PassiveBeamforming& pbf, Rng& rng) {
  const int M = s.M(), K = s.K(), L = s.L(), N = s.N();
  ChannelRealization r;
  r.f = Grid2<CVector>(M, K);
  r.d = Grid2<CVector>(M, K);
  r.Q.resize(M);
  r.g.resize(K);
  r.phase_err.resize(K);

  for (int m = 0; m < M; ++m) {
    const CMatrix V = rng.complex_normal_matrix(L, N);
    r.Q[m] = std::sqrt(s.ls.xi(m)) * (s.chol_R_A[m] * V * s.chol_R_S.adjoint());
  }
  std::vector<CVector> cascade_in(K);
  for (int k = 0; k < K; ++k) {
    const double iota = s.ls.iota(k);
    const CVector c = rng.complex_normal_vector(N);
    r.g[k] = std::sqrt(s.ls.alpha(k) / (iota + 1.0)) * (std::sqrt(iota) * s.g_bar[k] + s.chol_R_S * c);
    r.phase_err[k].resize(N);
    for (int n = 0; n < N; ++n) r.phase_err[k](n) = sample_von_mises(rng, s.cfg.vartheta);
    const CVector v = effective_phases(s, pbf, k);
    cascade_in[k].resize(N);
    for (int n = 0; n < N; ++n) cascade_in[k](n) = v(n) * std::polar(1.0, r.phase_err[k](n)) * r.g[k](n);
  }
  for (int m = 0; m < M; ++m) {
    for (int k = 0; k < K; ++k) {
      r.d(m, k) = s.chol_R_d(m, k) * rng.complex_normal_vector(L);
      r.f(m, k) = r.d(m, k) + r.Q[m] * cascade_in[k];
    }
  }
  return r;
}

}  // namespace starcf
