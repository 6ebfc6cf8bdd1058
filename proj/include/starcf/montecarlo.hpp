// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <cmath>
#include <thread>
#include <vector>

#include "starcf/channel.hpp"
#include "starcf/closedform.hpp"
#include "starcf/estimator.hpp"
#include "starcf/impairments.hpp"
#include "starcf/rng.hpp"

namespace starcf {

/// Everything one realization contributes, per evaluated channel use.
/// Indexed [t][k] (and [t][k][i] for interference).
struct TrialComponents {
  std::vector<int> times;
  std::vector<std::vector<cplx>> signal;  // DS + BU coefficient of s_k
  std::vector<std::vector<std::vector<cplx>>> ui;
  std::vector<std::vector<cplx>> hwi;
  std::vector<std::vector<cplx>> mu;  // UE receive distortion
  std::vector<std::vector<cplx>> noise;
  std::vector<std::vector<cplx>> symbols;  // [t][i]
  std::vector<std::vector<cplx>> received;
};

/// Fixed inputs of a Monte-Carlo run.
struct MonteCarloSetup {
  const Scene* scene = nullptr;
  const ChannelStatistics* stats = nullptr;
  const PilotAssignment* pilots = nullptr;
  const PassiveBeamforming* pbf = nullptr;
  const PowerControl* power = nullptr;
};

namespace detail {

/// Wiener phases sampled only at the requested channel uses (sorted, >= 0).
inline void sample_phases_at(const std::vector<int>& times, int rows, double var, Rng& rng, RMatrix& out) {
  out = RMatrix::Zero(rows, static_cast<Eigen::Index>(times.size()));
  for (int r = 0; r < rows; ++r) {
    double phase = 0.0;
    int last = 0;
    for (std::size_t j = 0; j < times.size(); ++j) {
      const int dt = times[j] - last;
      if (dt > 0 && var > 0) phase += std::sqrt(var * dt) * rng.normal();
      last = times[j];
      out(r, static_cast<Eigen::Index>(j)) = phase;
    }
  }
}

}  // namespace detail

/// One full realization: channels, pilot phase, LMMSE estimates, MR downlink.
inline TrialComponents simulate_trial(const MonteCarloSetup& in, const std::vector<int>& times, Rng& rng) {
  const Scene& sc = *in.scene;
  const SystemConfig& cfg = sc.cfg;
  const ChannelStatistics& st = *in.stats;
  const RMatrix& eta = in.power->eta;
  const int M = sc.M(), K = sc.K(), L = sc.L();
  const int T = static_cast<int>(times.size());
  const double gT = cfg.gamma_T, gR = cfg.gamma_R, rho = cfg.rho;

  const ChannelRealization ch = sample_channel(sc, *in.pbf, rng);
  const Grid2<CVector> y = receive_pilots(ch.f, *in.pilots, cfg, rng);
  Grid2<CVector> hhat(M, K);
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k) hhat(m, k) = estimate_channel(y(m, k), st, m, k);

  // F(m, k, i) = f_mk^H hhat_mi
  std::vector<cplx> F(static_cast<std::size_t>(M) * K * K);
  auto fi = [K](int m, int k, int i) { return (static_cast<std::size_t>(m) * K + k) * K + i; };
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < K; ++i) F[fi(m, k, i)] = ch.f(m, k).dot(hhat(m, i));

  // Conditional second moment of the received aggregate, as the distortion model prints it.
  std::vector<double> nu(K, 0.0);
  for (int k = 0; k < K; ++k) {
    double v = 0.0;
    for (int m = 0; m < M; ++m) {
      const RVector fk2 = ch.f(m, k).cwiseAbs2();
      for (int i = 0; i < K; ++i) {
        const double prod = hhat(m, i).cwiseAbs2().dot(fk2);
        v += rho * eta(m, i) * (gT * std::norm(F[fi(m, k, i)]) + (1.0 - gT) * prod);
      }
    }
    nu[k] = v;
  }

  RMatrix phi, psi;
  detail::sample_phases_at(times, M, phase_noise_variance(cfg.f_c, cfg.c_phi, cfg.T_s), rng, phi);
  detail::sample_phases_at(times, K, phase_noise_variance(cfg.f_c, cfg.c_psi, cfg.T_s), rng, psi);

  std::vector<CMatrix> Om_m(K);
  std::vector<double> eta_m(K);

  TrialComponents out;
  out.times = times;
  out.signal.assign(T, std::vector<cplx>(K));
  out.ui.assign(T, std::vector<std::vector<cplx>>(K, std::vector<cplx>(K)));
  out.hwi.assign(T, std::vector<cplx>(K));
  out.mu.assign(T, std::vector<cplx>(K));
  out.noise.assign(T, std::vector<cplx>(K));
  out.symbols.assign(T, std::vector<cplx>(K));
  out.received.assign(T, std::vector<cplx>(K));

  const double amp = std::sqrt(gR * gT * rho);
  for (int j = 0; j < T; ++j) {
    for (int i = 0; i < K; ++i) out.symbols[j][i] = rng.complex_normal();
    std::vector<CVector> mu_ap(M);
    for (int m = 0; m < M; ++m) {
      for (int k = 0; k < K; ++k) {
        Om_m[k] = st.Omega(m, k);
        eta_m[k] = eta(m, k);
      }
      mu_ap[m] = sample_ap_tx_distortion(eta_m, Om_m, gT, rho, rng);
    }
    for (int k = 0; k < K; ++k) {
      cplx hw{};
      std::vector<cplx> conj_phase(M);
      for (int m = 0; m < M; ++m) {
        conj_phase[m] = std::polar(1.0, -(phi(m, j) + psi(k, j)));
        hw += conj_phase[m] * ch.f(m, k).dot(mu_ap[m]);
      }
      out.hwi[j][k] = std::sqrt(gR) * hw;
      for (int i = 0; i < K; ++i) {
        cplx acc{};
        for (int m = 0; m < M; ++m) acc += std::sqrt(eta(m, i)) * conj_phase[m] * F[fi(m, k, i)];
        if (i == k) {
          out.signal[j][k] = amp * acc;
        } else {
          out.ui[j][k][i] = amp * acc;
        }
      }
      out.mu[j][k] = sample_ue_rx_distortion(nu[k], gR, rng);
      out.noise[j][k] = rng.complex_normal();

      // Received sample built from the transmitted waveforms, independently of the split above.
      cplx rx{};
      for (int m = 0; m < M; ++m) {
        CVector x = mu_ap[m];
        for (int i = 0; i < K; ++i) x += std::sqrt(gT * rho * eta(m, i)) * out.symbols[j][i] * hhat(m, i);
        rx += std::sqrt(gR) * conj_phase[m] * ch.f(m, k).dot(x);
      }
      out.received[j][k] = rx + out.mu[j][k] + out.noise[j][k];
    }
  }
  (void)L;
  return out;
}

/// Mean and standard error of one empirical quantity.
struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

struct EmpiricalBreakdown {
  SinrBreakdown mean;
  SinrBreakdown stderr_;
  std::vector<double> ui_per_interferer;  // E|UI_ki|^2 per i
  double sinr = 0.0;
};

struct MonteCarloResult {
  std::vector<int> times;
  std::vector<std::vector<EmpiricalBreakdown>> terms;  // [t][k]
  long long trials = 0;
};

namespace detail {

/// Raw moment sums over a block of trials; merged in a fixed order.
struct MomentSums {
  int T = 0, K = 0;
  long long n = 0;
  std::vector<cplx> sig_sum;       // [t*K + k]
  std::vector<double> sig_abs2;    // sum |c|^2
  std::vector<double> sig_abs4;    // sum |c|^4
  std::vector<double> ui_abs2;     // [(t*K + k)*K + i]
  std::vector<double> ui_abs4;
  std::vector<double> hwi_abs2, hwi_abs4, mu_abs2, mu_abs4;

  void init(int t, int k) {
    T = t;
    K = k;
    const auto tk = static_cast<std::size_t>(T) * K;
    sig_sum.assign(tk, cplx{});
    sig_abs2.assign(tk, 0.0);
    sig_abs4.assign(tk, 0.0);
    hwi_abs2.assign(tk, 0.0);
    hwi_abs4.assign(tk, 0.0);
    mu_abs2.assign(tk, 0.0);
    mu_abs4.assign(tk, 0.0);
    ui_abs2.assign(tk * K, 0.0);
    ui_abs4.assign(tk * K, 0.0);
  }

  void add(const TrialComponents& c) {
    ++n;
    for (int t = 0; t < T; ++t) {
      for (int k = 0; k < K; ++k) {
        const auto j = static_cast<std::size_t>(t) * K + k;
        const double s2 = std::norm(c.signal[t][k]);
        sig_sum[j] += c.signal[t][k];
        sig_abs2[j] += s2;
        sig_abs4[j] += s2 * s2;
        const double h2 = std::norm(c.hwi[t][k]);
        hwi_abs2[j] += h2;
        hwi_abs4[j] += h2 * h2;
        const double m2 = std::norm(c.mu[t][k]);
        mu_abs2[j] += m2;
        mu_abs4[j] += m2 * m2;
        for (int i = 0; i < K; ++i) {
          const double u2 = std::norm(c.ui[t][k][i]);
          ui_abs2[j * K + i] += u2;
          ui_abs4[j * K + i] += u2 * u2;
        }
      }
    }
  }

  void merge(const MomentSums& o) {
    n += o.n;
    auto acc = [](auto& a, const auto& b) {
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    acc(sig_sum, o.sig_sum);
    acc(sig_abs2, o.sig_abs2);
    acc(sig_abs4, o.sig_abs4);
    acc(ui_abs2, o.ui_abs2);
    acc(ui_abs4, o.ui_abs4);
    acc(hwi_abs2, o.hwi_abs2);
    acc(hwi_abs4, o.hwi_abs4);
    acc(mu_abs2, o.mu_abs2);
    acc(mu_abs4, o.mu_abs4);
  }
};

/// Pairwise merge in index order: the result depends only on the chunk layout.
inline MomentSums tree_reduce(std::vector<MomentSums>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  MomentSums left = tree_reduce(parts, lo, mid);
  const MomentSums right = tree_reduce(parts, mid, hi);
  left.merge(right);
  return left;
}

inline Estimate mean_of(double sum, double sum_sq, long long n) {
  const double mean = sum / static_cast<double>(n);
  const double var = n > 1 ? std::max(0.0, (sum_sq / n - mean * mean)) * n / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace detail

inline constexpr long long kTrialChunk = 256;

/// Runs `trials` realizations split into fixed chunks, each chunk seeded by
/// its trial indices, so the result is identical for any thread count.
inline MonteCarloResult empirical_sinr(const MonteCarloSetup& in, std::vector<int> times, long long trials,
                                       int threads, std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorCode::kInvalidConfig, "trials must be >= 1");
  std::sort(times.begin(), times.end());
  const int K = in.scene->K();
  const int T = static_cast<int>(times.size());
  const long long chunks = (trials + kTrialChunk - 1) / kTrialChunk;
  std::vector<detail::MomentSums> parts(static_cast<std::size_t>(chunks));
  std::atomic<long long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const long long c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        detail::MomentSums& ms = parts[static_cast<std::size_t>(c)];
        ms.init(T, K);
        const long long end = std::min(trials, (c + 1) * kTrialChunk);
        for (long long trial = c * kTrialChunk; trial < end; ++trial) {
          Rng rng = Rng::substream(seed, Stream::kTrial, static_cast<std::uint64_t>(trial));
          ms.add(simulate_trial(in, times, rng));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(chunks)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  const detail::MomentSums total = detail::tree_reduce(parts, 0, parts.size());
  const auto n = total.n;
  const auto& pilots = *in.pilots;

  MonteCarloResult res;
  res.times = times;
  res.trials = n;
  res.terms.assign(T, std::vector<EmpiricalBreakdown>(K));
  for (int t = 0; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      const auto j = static_cast<std::size_t>(t) * K + k;
      EmpiricalBreakdown& e = res.terms[t][k];
      const cplx mean = total.sig_sum[j] / static_cast<double>(n);
      const Estimate second = detail::mean_of(total.sig_abs2[j], total.sig_abs4[j], n);
      e.mean.ds = std::norm(mean);
      e.mean.bu = std::max(0.0, second.value - e.mean.ds);
      const double var_c = n > 1 ? e.mean.bu * n / (n - 1.0) : 0.0;
      e.stderr_.ds = 2.0 * std::abs(mean) * std::sqrt(var_c / (2.0 * n));
      e.stderr_.bu = second.stderr_;

      e.ui_per_interferer.assign(K, 0.0);
      double coh_var = 0.0, non_var = 0.0;
      for (int i = 0; i < K; ++i) {
        if (i == k) continue;
        const Estimate u = detail::mean_of(total.ui_abs2[j * K + i], total.ui_abs4[j * K + i], n);
        e.ui_per_interferer[i] = u.value;
        if (pilots.shares_pilot(i, k)) {
          e.mean.ui_coherent += u.value;
          coh_var += u.stderr_ * u.stderr_;
        } else {
          e.mean.ui_noncoherent += u.value;
          non_var += u.stderr_ * u.stderr_;
        }
      }
      e.stderr_.ui_coherent = std::sqrt(coh_var);
      e.stderr_.ui_noncoherent = std::sqrt(non_var);
      const Estimate h = detail::mean_of(total.hwi_abs2[j], total.hwi_abs4[j], n);
      const Estimate u = detail::mean_of(total.mu_abs2[j], total.mu_abs4[j], n);
      e.mean.hwi_ap = h.value;
      e.stderr_.hwi_ap = h.stderr_;
      e.mean.hwi_ue = u.value;
      e.stderr_.hwi_ue = u.stderr_;
      e.mean.noise = 1.0;
      e.stderr_.noise = 0.0;
      e.sinr = e.mean.sinr();
    }
  }
  return res;
}

/// Max |mean(A Z A^H) - xi tr(Z) I| over entries, A with i.i.d. CN(0, xi) entries.
inline double lemma1_oracle(int L, int N, double xi_a, const CMatrix& Z, long long trials, Rng& rng) {
  CMatrix acc = CMatrix::Zero(L, L);
  for (long long t = 0; t < trials; ++t) {
    const CMatrix A = rng.complex_normal_matrix(L, N, xi_a);
    acc += A * Z * A.adjoint();
  }
  acc /= static_cast<double>(trials);
  const CMatrix expected = xi_a * Z.trace() * CMatrix::Identity(L, L);
  return (acc - expected).cwiseAbs().maxCoeff();
}

inline double lemma2_closed_form(const CMatrix& A, const CMatrix& C) {
  return std::norm((A * C).trace()) + (A * C * A.adjoint() * C).trace().real();
}

/// Relative error of the sampled E|c^H A c|^2, c ~ CN(0, C), against the closed form.
inline double lemma2_oracle(const CMatrix& A, const CMatrix& C, long long trials, Rng& rng) {
  const auto K = A.rows();
  const CMatrix Lc = cholesky_factor(C);
  double acc = 0.0;
  for (long long t = 0; t < trials; ++t) {
    const CVector c = Lc * rng.complex_normal_vector(K);
    acc += std::norm(c.dot(A * c));
  }
  acc /= static_cast<double>(trials);
  const double expected = lemma2_closed_form(A, C);
  if (expected == 0.0) return std::abs(acc);
  return std::abs(acc - expected) / expected;
}

}  // namespace starcf
