// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "starcf/config.hpp"
#include "starcf/estimator.hpp"
#include "starcf/impairments.hpp"
#include "starcf/linalg.hpp"

namespace starcf {

/// eta(m, k) >= 0 with sum_k eta(m, k) tr(Omega_mk) <= 1 per AP.
struct PowerControl {
  RMatrix eta;
};

struct SinrBreakdown {
  double ds = 0.0;
  double bu = 0.0;
  double ui_coherent = 0.0;     // UEs sharing the pilot
  double ui_noncoherent = 0.0;  // everyone else
  double hwi_ap = 0.0;          // AP transmit distortion
  double hwi_ue = 0.0;          // UE receive distortion
  double noise = 1.0;

  double denominator() const { return bu + ui_coherent + ui_noncoherent + hwi_ap + hwi_ue + noise; }
  double sinr() const { return ds / denominator(); }
};

/// Per-pair scalars every closed-form term is built from.
struct TermCoefficients {
  int M = 0, K = 0;
  RMatrix tr_omega;       // (m, k) tr(Omega_mk)
  RMatrix omega_diag_sq;  // (m, k) sum_l Omega_mk,ll^2
  // Indexed [(m * K + k) * K + i].
  std::vector<double> tr_r_omega;       // tr(R_mk Omega_mi)
  std::vector<double> tr_diag_r_omega;  // tr(diag(Omega_mi) diag(R_mk))
  std::vector<cplx> cross;              // gT gR p tau_p tr(R_mi Psi_mk^{-1} R_mk), filled for i in P_k

  std::size_t idx(int m, int k, int i) const {
    return (static_cast<std::size_t>(m) * K + k) * K + i;
  }
};

inline TermCoefficients term_coefficients(const ChannelStatistics& st, const PilotAssignment& a,
                                          const SystemConfig& cfg) {
  TermCoefficients c;
  c.M = st.M;
  c.K = st.K;
  const int M = st.M, K = st.K;
  c.tr_omega.resize(M, K);
  c.omega_diag_sq.resize(M, K);
  c.tr_r_omega.assign(static_cast<std::size_t>(M) * K * K, 0.0);
  c.tr_diag_r_omega.assign(c.tr_r_omega.size(), 0.0);
  c.cross.assign(c.tr_r_omega.size(), cplx{});
  const double gain = cfg.gamma_T * cfg.gamma_R * cfg.p * a.tau_p;
  for (int m = 0; m < M; ++m) {
    for (int k = 0; k < K; ++k) {
      const CMatrix& Om = st.Omega(m, k);
      c.tr_omega(m, k) = real_trace(Om);
      c.omega_diag_sq(m, k) = Om.diagonal().real().squaredNorm();
      for (int i = 0; i < K; ++i) {
        const CMatrix& Oi = st.Omega(m, i);
        const auto j = c.idx(m, k, i);
        c.tr_r_omega[j] = trace_of_product(st.R(m, k), Oi).real();
        c.tr_diag_r_omega[j] = (Oi.diagonal().real().cwiseProduct(st.R(m, k).diagonal().real())).sum();
      }
      for (int i : a.coset[k]) {
        c.cross[c.idx(m, k, i)] = gain * trace_of_product(st.R(m, i) * st.Psi_inv(m, k), st.R(m, k));
      }
    }
  }
  return c;
}

struct TimeFactors {
  double e_phi = 1.0;    // exp(-varrho_phi^2 t)
  double e_psi = 1.0;    // exp(-varrho_psi^2 t)
  double e_delta = 1.0;  // exp(-delta^2 t)
};

inline TimeFactors time_factors(const SystemConfig& cfg, int t) {
  const double vphi = phase_noise_variance(cfg.f_c, cfg.c_phi, cfg.T_s);
  const double vpsi = phase_noise_variance(cfg.f_c, cfg.c_psi, cfg.T_s);
  return {std::exp(-vphi * t), std::exp(-vpsi * t), std::exp(-(vphi + vpsi) * t)};
}

/// Closed-form breakdown of UE k's SINR at channel use t.
inline SinrBreakdown sinr_breakdown(const TermCoefficients& c, const PilotAssignment& a, const RMatrix& eta,
                                    const SystemConfig& cfg, const TimeFactors& tf, int k) {
  const int M = c.M, K = c.K;
  const double gT = cfg.gamma_T, gR = cfg.gamma_R, rho = cfg.rho;
  const double ggr = gT * gR * rho;
  const double ephi = tf.e_phi;

  double S = 0.0, own_a = 0.0, own_ro = 0.0, own_dsq = 0.0;
  for (int m = 0; m < M; ++m) {
    const double e = eta(m, k);
    S += std::sqrt(e) * c.tr_omega(m, k);
    own_a += e * c.tr_omega(m, k) * c.tr_omega(m, k);
    own_ro += e * c.tr_r_omega[c.idx(m, k, k)];
    own_dsq += e * c.omega_diag_sq(m, k);
  }

  double coh_ro = 0.0, coh_b = 0.0, coh_mean = 0.0, non_ro = 0.0, all_ro = 0.0, all_dro = 0.0;
  for (int i = 0; i < K; ++i) {
    double ro = 0.0, dro = 0.0;
    for (int m = 0; m < M; ++m) {
      ro += eta(m, i) * c.tr_r_omega[c.idx(m, k, i)];
      dro += eta(m, i) * c.tr_diag_r_omega[c.idx(m, k, i)];
    }
    all_ro += ro;
    all_dro += dro;
    if (i == k) continue;
    if (a.shares_pilot(i, k)) {
      cplx mean{};
      for (int m = 0; m < M; ++m) {
        const cplx s = c.cross[c.idx(m, k, i)];
        coh_b += eta(m, i) * std::norm(s);
        mean += std::sqrt(eta(m, i)) * s;
      }
      coh_ro += ro;
      coh_mean += std::norm(mean);
    } else {
      non_ro += ro;
    }
  }

  SinrBreakdown b;
  b.ds = ggr * tf.e_delta * S * S;
  b.bu = ggr * (ephi * (1.0 - tf.e_psi) * S * S + (1.0 - ephi) * own_a + own_ro);
  b.ui_coherent = ggr * (coh_ro + (1.0 - ephi) * coh_b + ephi * coh_mean);
  b.ui_noncoherent = ggr * non_ro;
  b.hwi_ap = gR * (1.0 - gT) * rho * all_dro;
  b.hwi_ue = (1.0 - gR) * gT * rho * (all_ro + own_a + coh_b) +
             (1.0 - gR) * (1.0 - gT) * rho * (all_dro + own_dsq);
  b.noise = 1.0;
  return b;
}

inline std::vector<SinrBreakdown> sinr_closed_form(int t, const PowerControl& power, const TermCoefficients& c,
                                                   const PilotAssignment& a, const SystemConfig& cfg) {
  const TimeFactors tf = time_factors(cfg, t);
  std::vector<SinrBreakdown> out(c.K);
  for (int k = 0; k < c.K; ++k) out[k] = sinr_breakdown(c, a, power.eta, cfg, tf, k);
  return out;
}

inline std::vector<SinrBreakdown> sinr_closed_form(int t, const PowerControl& power, const ChannelStatistics& st,
                                                   const PilotAssignment& a, const SystemConfig& cfg) {
  return sinr_closed_form(t, power, term_coefficients(st, a, cfg), a, cfg);
}

inline double min_sinr(const std::vector<SinrBreakdown>& b) {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& x : b) v = std::min(v, x.sinr());
  return v;
}

/// Per-UE SE (bit/s/Hz), averaged over the data channel uses of one block.
inline RVector ergodic_se(const PowerControl& power, const TermCoefficients& c, const PilotAssignment& a,
                          const SystemConfig& cfg) {
  RVector se = RVector::Zero(c.K);
  for (int t = cfg.tau_p; t < cfg.tau_c; ++t) {
    const TimeFactors tf = time_factors(cfg, t);
    for (int k = 0; k < c.K; ++k) se(k) += std::log2(1.0 + sinr_breakdown(c, a, power.eta, cfg, tf, k).sinr());
  }
  return se / static_cast<double>(cfg.tau_c);
}

inline RVector ergodic_se(const PowerControl& power, const ChannelStatistics& st, const PilotAssignment& a,
                          const SystemConfig& cfg) {
  return ergodic_se(power, term_coefficients(st, a, cfg), a, cfg);
}

/// Phase-noise effects on UE k, as stated alongside the closed form.
struct Remark1Deltas {
  double ds_loss = 0.0;
  double bu_increase = 0.0;
  double pilot_contamination = 0.0;   // sum over co-pilot UEs
  double contamination_relief = 0.0;  // reduction of that interference caused by phase noise
};

inline std::vector<Remark1Deltas> remark1_deltas(int t, const PowerControl& power, const TermCoefficients& c,
                                                 const PilotAssignment& a, const SystemConfig& cfg) {
  const TimeFactors tf = time_factors(cfg, t);
  const double gT = cfg.gamma_T, gR = cfg.gamma_R, rho = cfg.rho;
  const double ggr = gT * gR * rho;
  std::vector<Remark1Deltas> out(c.K);
  for (int k = 0; k < c.K; ++k) {
    double S = 0.0, own_a = 0.0;
    for (int m = 0; m < c.M; ++m) {
      S += std::sqrt(power.eta(m, k)) * c.tr_omega(m, k);
      own_a += power.eta(m, k) * c.tr_omega(m, k) * c.tr_omega(m, k);
    }
    Remark1Deltas& d = out[k];
    d.ds_loss = ggr * (1.0 - tf.e_delta) * S * S;
    d.bu_increase = ggr * (1.0 - tf.e_phi) * (tf.e_phi * S * S + own_a);
    for (int i : a.coset[k]) {
      if (i == k) continue;
      double b = 0.0;
      cplx mean{};
      for (int m = 0; m < c.M; ++m) {
        const cplx s = c.cross[c.idx(m, k, i)];
        b += power.eta(m, i) * std::norm(s);
        mean += std::sqrt(power.eta(m, i)) * s;
      }
      d.pilot_contamination += gT * rho * (1.0 - gR * tf.e_phi) * b + ggr * tf.e_phi * std::norm(mean);
      d.contamination_relief += (std::norm(mean) - b) * ggr * (1.0 - tf.e_phi);
    }
  }
  return out;
}

/// Block-diagonal aggregates of the closed form. Xi_mik = R_mi R_mk^{-1}.
struct TermMatrices {
  std::vector<RMatrix> A;                    // per k, M x M diagonal of a_mk
  std::vector<std::vector<RMatrix>> B;       // [i][k], M x M diagonal of b_mik (i in P_k \ {k})
  std::vector<std::vector<CMatrix>> Xi;      // [i][k], ML x ML block diagonal (i in P_k \ {k})
  bool regularized = false;                  // some R_mk needed a diagonal loading to invert
};

inline TermMatrices term_matrices(const ChannelStatistics& st, const PilotAssignment& a,
                                  const SystemConfig& cfg) {
  const int M = st.M, K = st.K, L = st.L;
  const double gain = cfg.gamma_T * cfg.gamma_R * cfg.p * a.tau_p;
  TermMatrices tm;
  tm.A.assign(K, RMatrix::Zero(M, M));
  tm.B.assign(K, std::vector<RMatrix>(K));
  tm.Xi.assign(K, std::vector<CMatrix>(K));

  Grid2<CMatrix> R_inv(M, K);
  for (int m = 0; m < M; ++m) {
    for (int k = 0; k < K; ++k) {
      const CMatrix& R = st.R(m, k);
      Eigen::LLT<CMatrix> llt(hermitian_part(R));
      const double scale = std::max(real_trace(R) / L, 1e-300);
      bool ok = llt.info() == Eigen::Success &&
                llt.matrixLLT().diagonal().real().cwiseAbs2().minCoeff() > 1e-12 * scale;
      if (ok) {
        R_inv(m, k) = llt.solve(CMatrix::Identity(L, L));
      } else {
        CMatrix reg = hermitian_part(R);
        reg.diagonal().array() += 1e-12 * std::max(real_trace(R), 1e-300);
        Eigen::LLT<CMatrix> retry(reg);
        if (retry.info() != Eigen::Success) throw Error(ErrorCode::kSingularR, "R_mk is not invertible");
        R_inv(m, k) = retry.solve(CMatrix::Identity(L, L));
        tm.regularized = true;
      }
      const double tr = real_trace(st.Omega(m, k));
      tm.A[k](m, m) = tr * tr;
    }
  }
  for (int k = 0; k < K; ++k) {
    for (int i : a.coset[k]) {
      if (i == k) continue;
      tm.B[i][k] = RMatrix::Zero(M, M);
      tm.Xi[i][k] = CMatrix::Zero(M * L, M * L);
      for (int m = 0; m < M; ++m) {
        tm.B[i][k](m, m) = std::norm(gain * trace_of_product(st.R(m, i) * st.Psi_inv(m, k), st.R(m, k)));
        tm.Xi[i][k].block(m * L, m * L, L, L) = st.R(m, i) * R_inv(m, k);
      }
    }
  }
  return tm;
}

/// D_k(t) assembled literally from block-diagonal aggregates. Slow; used as a
/// cross-check of the per-component evaluation.
inline RVector denominator_matrix_form(int t, const PowerControl& power, const ChannelStatistics& st,
                                       const PilotAssignment& a, const SystemConfig& cfg) {
  const int M = st.M, K = st.K, L = st.L;
  const TermMatrices tm = term_matrices(st, a, cfg);
  const TimeFactors tf = time_factors(cfg, t);
  const double gT = cfg.gamma_T, gR = cfg.gamma_R, rho = cfg.rho;
  const double gtil = (1.0 - gR) * (1.0 - gT);

  auto blockdiag = [&](auto&& fn) {
    CMatrix out = CMatrix::Zero(M * L, M * L);
    for (int m = 0; m < M; ++m) out.block(m * L, m * L, L, L) = fn(m);
    return out;
  };
  std::vector<CMatrix> Om(K), Rb(K), eta_half(K), eta_full(K), dOm(K), dR(K);
  std::vector<RMatrix> P(K);
  for (int k = 0; k < K; ++k) {
    Om[k] = blockdiag([&](int m) { return st.Omega(m, k); });
    Rb[k] = blockdiag([&](int m) { return st.R(m, k); });
    dOm[k] = diag_part(Om[k]);
    dR[k] = diag_part(Rb[k]);
    RVector pk = power.eta.col(k);
    P[k] = pk.asDiagonal();
    // eta_k^{1/2} = P_k^{1/2} kron I_L
    RVector e_half(M * L), e_full(M * L);
    for (int m = 0; m < M; ++m)
      for (int l = 0; l < L; ++l) {
        e_half(m * L + l) = std::sqrt(pk(m));
        e_full(m * L + l) = pk(m);
      }
    eta_half[k] = e_half.cast<cplx>().asDiagonal();
    eta_full[k] = e_full.cast<cplx>().asDiagonal();
  }

  RVector D(K);
  for (int k = 0; k < K; ++k) {
    const double sig = std::norm((eta_half[k] * Om[k]).trace());
    double d = gT * gR * rho * tf.e_phi * (1.0 - tf.e_psi) * sig;
    d += gT * rho * (1.0 - gR * tf.e_phi) * (P[k] * tm.A[k]).trace();
    d += gtil * rho * (eta_full[k] * dOm[k] * dOm[k]).trace().real();
    for (int i : a.coset[k]) {
      if (i == k) continue;
      d += gT * rho * (1.0 - gR * tf.e_phi) * (P[i] * tm.B[i][k]).trace();
      d += gT * gR * rho * tf.e_phi * std::norm((eta_half[i] * tm.Xi[i][k] * Om[k]).trace());
    }
    for (int i = 0; i < K; ++i) {
      d += rho * (gT * (eta_full[i] * Rb[k] * Om[i]).trace().real() +
                  (1.0 - gT) * (eta_full[i] * dOm[i] * dR[k]).trace().real());
    }
    D(k) = d + 1.0;
  }
  return D;
}

/// Equal power per AP: eta_mk = 1 / sum_i tr(Omega_mi).
inline PowerControl equal_power(const TermCoefficients& c) {
  PowerControl pc;
  pc.eta.resize(c.M, c.K);
  for (int m = 0; m < c.M; ++m) {
    const double total = c.tr_omega.row(m).sum();
    pc.eta.row(m).setConstant(total > 0 ? 1.0 / total : 0.0);
  }
  return pc;
}

inline PowerControl equal_power(const ChannelStatistics& st) {
  PowerControl pc;
  pc.eta.resize(st.M, st.K);
  for (int m = 0; m < st.M; ++m) {
    double total = 0.0;
    for (int i = 0; i < st.K; ++i) total += real_trace(st.Omega(m, i));
    pc.eta.row(m).setConstant(total > 0 ? 1.0 / total : 0.0);
  }
  return pc;
}

}  // namespace starcf
