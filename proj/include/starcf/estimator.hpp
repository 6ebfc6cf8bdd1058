// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "starcf/channel.hpp"
#include "starcf/config.hpp"
#include "starcf/impairments.hpp"
#include "starcf/linalg.hpp"

namespace starcf {

struct PilotAssignment {
  std::vector<int> pilot_of;            // 0-based pilot index per UE
  std::vector<std::vector<int>> coset;  // UEs sharing UE k's pilot, k included, ascending
  int tau_p = 0;

  bool shares_pilot(int i, int k) const { return pilot_of[i] == pilot_of[k]; }
};

/// Round robin: UE k uses pilot k mod tau_p.
inline PilotAssignment assign_pilots(int K, int tau_p) {
  if (tau_p < 1) throw Error(ErrorCode::kInvalidConfig, "tau_p must be >= 1");
  PilotAssignment a;
  a.tau_p = tau_p;
  a.pilot_of.resize(K);
  for (int k = 0; k < K; ++k) a.pilot_of[k] = k % tau_p;
  a.coset.resize(K);
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < K; ++i)
      if (a.pilot_of[i] == a.pilot_of[k]) a.coset[k].push_back(i);
  return a;
}

/// Column u of the tau_p-point DFT matrix; squared norm tau_p.
inline CVector pilot_sequence(int u, int tau_p) {
  CVector phi(tau_p);
  for (int t = 0; t < tau_p; ++t)
    phi(t) = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(u) * t / tau_p);
  return phi;
}

struct ChannelStatistics {
  Grid2<CMatrix> R, Psi, Psi_inv, Omega, C;
  Grid2<CMatrix> W;  // LMMSE filter sqrt(gT gR p tau_p) R Psi^{-1}
  int M = 0, K = 0, L = 0;
};

/// Receiver noise variance is 1 in the normalized units used throughout;
/// pass another value only for stand-alone checks.
inline CMatrix psi_matrix(const Grid2<CMatrix>& R, const PilotAssignment& a, int m, int k,
                          const SystemConfig& cfg, double noise_var = 1.0) {
  const int K = static_cast<int>(R.cols());
  const auto L = R(m, 0).rows();
  const double gT = cfg.gamma_T, gR = cfg.gamma_R, p = cfg.p;
  CMatrix psi = CMatrix::Zero(L, L);
  for (int i : a.coset[k]) psi += (gT * gR * p * a.tau_p) * R(m, i);
  for (int i = 0; i < K; ++i) {
    psi += ((1.0 - gR) * gT * p) * R(m, i);
    psi.diagonal() += ((1.0 - gT) * p) * R(m, i).diagonal();
  }
  psi.diagonal().array() += noise_var;
  return psi;
}

inline CMatrix hermitian_inverse(const CMatrix& a) {
  const CMatrix h = hermitian_part(a);
  Eigen::LLT<CMatrix> llt(h);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::kSingularPsi, "Psi is not positive definite");
  const double scale = std::max(std::abs(real_trace(h)) / static_cast<double>(h.rows()), 1e-300);
  const double min_pivot = llt.matrixLLT().diagonal().real().cwiseAbs2().minCoeff();
  if (min_pivot < 1e-12 * scale) throw Error(ErrorCode::kSingularPsi, "Psi is numerically singular");
  return llt.solve(CMatrix::Identity(h.rows(), h.cols()));
}

inline ChannelStatistics lmmse_statistics(const Grid2<CMatrix>& R, const PilotAssignment& a,
                                          const SystemConfig& cfg, double noise_var = 1.0) {
  ChannelStatistics s;
  s.M = static_cast<int>(R.rows());
  s.K = static_cast<int>(R.cols());
  s.L = static_cast<int>(R(0, 0).rows());
  s.R = R;
  s.Psi = s.Psi_inv = s.Omega = s.C = s.W = Grid2<CMatrix>(s.M, s.K);
  const double gain = cfg.gamma_T * cfg.gamma_R * cfg.p * a.tau_p;
  for (int m = 0; m < s.M; ++m) {
    for (int k = 0; k < s.K; ++k) {
      // Psi depends on k only through its pilot; reuse the first coset member's.
      const int lead = a.coset[k].front();
      if (lead < k) {
        s.Psi(m, k) = s.Psi(m, lead);
        s.Psi_inv(m, k) = s.Psi_inv(m, lead);
      } else {
        s.Psi(m, k) = psi_matrix(R, a, m, k, cfg, noise_var);
        s.Psi_inv(m, k) = hermitian_inverse(s.Psi(m, k));
      }
      const CMatrix RPi = R(m, k) * s.Psi_inv(m, k);
      s.W(m, k) = std::sqrt(gain) * RPi;
      s.Omega(m, k) = hermitian_part(gain * RPi * R(m, k));
      s.C(m, k) = R(m, k) - s.Omega(m, k);
    }
  }
  return s;
}

inline ChannelStatistics build_statistics(const Scene& scene, const PassiveBeamforming& pbf,
                                          const PilotAssignment& a) {
  return lmmse_statistics(channel_covariances(scene, pbf), a, scene.cfg);
}

/// Pilot-slot observations y_mk(0) (phase noise frozen at its t = 0 value of zero).
inline Grid2<CVector> receive_pilots(const Grid2<CVector>& f, const PilotAssignment& a,
                                     const SystemConfig& cfg, Rng& rng, double noise_var = 1.0) {
  const int M = static_cast<int>(f.rows());
  const int K = static_cast<int>(f.cols());
  const auto L = f(0, 0).size();
  const int tp = a.tau_p;
  std::vector<CVector> phis(tp);
  for (int u = 0; u < tp; ++u) phis[u] = pilot_sequence(u, tp);

  // Row vectors x_i = sqrt(p gR) phi^H + w^H.
  std::vector<Eigen::RowVectorXcd> x(K);
  for (int i = 0; i < K; ++i) {
    const CVector w = sample_ue_tx_distortion(cfg.p, cfg.gamma_R, tp, rng);
    x[i] = std::sqrt(cfg.p * cfg.gamma_R) * phis[a.pilot_of[i]].adjoint() + w.adjoint();
  }

  Grid2<CVector> y(M, K);
  std::vector<CVector> fm(K);
  for (int m = 0; m < M; ++m) {
    CMatrix Y = CMatrix::Zero(L, tp);
    for (int i = 0; i < K; ++i) {
      fm[i] = f(m, i);
      Y += std::sqrt(cfg.gamma_T) * f(m, i) * x[i];
    }
    for (int t = 0; t < tp; ++t) Y.col(t) += sample_ap_rx_distortion(fm, static_cast<int>(L), cfg.p, cfg.gamma_T, rng);
    Y += rng.complex_normal_matrix(L, tp, noise_var);
    for (int u = 0; u < tp; ++u) {
      const CVector yu = Y * phis[u] / std::sqrt(static_cast<double>(tp));
      for (int k = 0; k < K; ++k)
        if (a.pilot_of[k] == u) y(m, k) = yu;
    }
  }
  return y;
}

inline CVector estimate_channel(const CVector& observation, const ChannelStatistics& stats, int m, int k) {
  return stats.W(m, k) * observation;
}

}  // namespace starcf
