// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "starcf/config.hpp"
#include "starcf/linalg.hpp"
#include "starcf/rng.hpp"

namespace starcf {

/// Wiener increment variance 4 pi^2 f_c^2 c T_s (rad^2).
inline double phase_noise_variance(double f_c, double c, double T_s) {
  constexpr double pi = std::numbers::pi;
  return 4.0 * pi * pi * f_c * f_c * c * T_s;
}

struct PhaseNoisePath {
  RMatrix phi;  // M x tau_c
  RMatrix psi;  // K x tau_c
  double var_phi = 0.0;
  double var_psi = 0.0;

  double combined(int m, int k, int t) const { return phi(m, t) + psi(k, t); }
};

inline PhaseNoisePath sample_phase_noise(const SystemConfig& cfg, Rng& rng) {
  PhaseNoisePath p;
  p.var_phi = phase_noise_variance(cfg.f_c, cfg.c_phi, cfg.T_s);
  p.var_psi = phase_noise_variance(cfg.f_c, cfg.c_psi, cfg.T_s);
  auto walk = [&](RMatrix& out, int rows, double var) {
    out = RMatrix::Zero(rows, cfg.tau_c);
    const double sd = std::sqrt(var);
    for (int r = 0; r < rows; ++r)
      for (int t = 1; t < cfg.tau_c; ++t) out(r, t) = out(r, t - 1) + sd * rng.normal();
  };
  walk(p.phi, cfg.M, p.var_phi);
  walk(p.psi, cfg.K(), p.var_psi);
  return p;
}

/// UE transmit distortion over the pilot slots, CN(0, (1 - gamma_R) p).
inline CVector sample_ue_tx_distortion(double p, double gamma_R, int tau_p, Rng& rng) {
  if (gamma_R >= 1.0) return CVector::Zero(tau_p);
  return rng.complex_normal_vector(tau_p, (1.0 - gamma_R) * p);
}

/// AP receive distortion given the true channels of every UE at that AP.
inline CVector sample_ap_rx_distortion(const std::vector<CVector>& f, int L, double p, double gamma_T,
                                       Rng& rng) {
  CVector out = CVector::Zero(L);
  if (gamma_T >= 1.0) return out;
  RVector var = RVector::Zero(L);
  for (const auto& fi : f) var += fi.cwiseAbs2();
  for (int l = 0; l < L; ++l) out(l) = rng.complex_normal((1.0 - gamma_T) * p * var(l));
  return out;
}

/// AP transmit distortion CN(0, D_m), D_m = (1 - gamma_T) rho sum_k eta_mk diag(Omega_mk).
inline CVector sample_ap_tx_distortion(const std::vector<double>& eta, const std::vector<CMatrix>& Omega,
                                       double gamma_T, double rho, Rng& rng) {
  const auto L = Omega.empty() ? 0 : Omega.front().rows();
  CVector out = CVector::Zero(L);
  if (gamma_T >= 1.0) return out;
  RVector var = RVector::Zero(L);
  for (std::size_t k = 0; k < Omega.size(); ++k) var += eta[k] * Omega[k].diagonal().real();
  for (Eigen::Index l = 0; l < L; ++l) out(l) = rng.complex_normal((1.0 - gamma_T) * rho * var(l));
  return out;
}

/// UE receive distortion CN(0, (1 - gamma_R) nu).
inline cplx sample_ue_rx_distortion(double nu, double gamma_R, Rng& rng) {
  if (gamma_R >= 1.0 || nu <= 0.0) return {0.0, 0.0};
  return rng.complex_normal((1.0 - gamma_R) * nu);
}

}  // namespace starcf
