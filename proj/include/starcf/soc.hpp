// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "starcf/closedform.hpp"
#include "starcf/config.hpp"
#include "starcf/error.hpp"
#include "starcf/estimator.hpp"
#include "starcf/linalg.hpp"

namespace starcf {

// Max-min power control as an SOC feasibility problem in y_mi = sqrt(tr Omega_mi) sqrt(eta_mi).
// Per AP: y_m. >= 0, ||y_m.|| <= sqrt(budget). Per UE k: ||G_k y + h_k||_rest <= (G_k y)_0.

struct SocOptions {
  int max_iterations = 50000;
  double tolerance = 1e-9;      // relative slack allowed on the cone check
  double margin = 1e-7;         // the splitting runs on u (1 + margin) so its limit is strictly feasible at u
  double relaxation = 1.5;
  int check_every = 10;
  int stall_window = 1000;
  double stall_ratio = 1e-4;
  double power_budget = 1.0;
};

struct SocProblem {
  int M = 0, K = 0;
  TermCoefficients coeff;
  PilotAssignment pilots;
  double gT = 1.0, gR = 1.0, rho = 1.0;
  TimeFactors tf;
  double power_budget = 1.0;
  RMatrix w;  // sqrt(tr Omega_mk)
  SystemConfig cfg;

  // Maximum u for which the cone radius is positive.
  double u_limit() const {
    const double e = tf.e_psi;
    return e >= 1.0 ? std::numeric_limits<double>::infinity() : e / (1.0 - e);
  }
};

inline SocProblem make_soc_problem(const TermCoefficients& c, const PilotAssignment& a, const SystemConfig& cfg,
                                   int t, double power_budget = 1.0) {
  SocProblem p;
  p.M = c.M;
  p.K = c.K;
  p.coeff = c;
  p.pilots = a;
  p.gT = cfg.gamma_T;
  p.gR = cfg.gamma_R;
  p.rho = cfg.rho;
  p.tf = time_factors(cfg, t);
  p.power_budget = power_budget;
  p.w = c.tr_omega.cwiseMax(0.0).cwiseSqrt();
  p.cfg = cfg;
  return p;
}

struct SocResult {
  bool feasible = false;
  RMatrix eta;                 // witness, when feasible
  std::vector<double> slacks;  // per UE: cone radius minus ||v_k||, at the witness
  int iterations = 0;
};

namespace detail {

// Coefficient of y_mi^2 / w_mi^2 inside ||v_k||^2.
inline double soc_quad_coeff(const SocProblem& p, int m, int k, int i) {
  const auto& c = p.coeff;
  const auto j = c.idx(m, k, i);
  const double ephi = p.tf.e_phi;
  const double gtil = (1.0 - p.gR) * (1.0 - p.gT);
  const double own = p.gT * p.rho * (1.0 - p.gR * ephi);
  double v = p.gT * p.rho * c.tr_r_omega[j] + (1.0 - p.gT) * p.rho * c.tr_diag_r_omega[j];
  if (i == k) {
    v += own * c.tr_omega(m, k) * c.tr_omega(m, k) + gtil * p.rho * c.omega_diag_sq(m, k);
  } else if (p.pilots.shares_pilot(i, k)) {
    v += own * std::norm(c.cross[j]);
  }
  return std::max(v, 0.0);
}

inline double u_tilde(const SocProblem& p, double u) { return (1.0 / u + 1.0) * p.tf.e_psi - 1.0; }

struct ConeSystem {
  RMatrix G;                       // rows of all cones, stacked
  RVector h;
  std::vector<Eigen::Index> start;  // first row of cone k; start[K] = total rows
};

inline int var_index(const SocProblem& p, int m, int i) { return m * p.K + i; }

inline ConeSystem build_cones(const SocProblem& p, double u, bool scale) {
  const int M = p.M, K = p.K, n = M * K;
  const double ggr = p.gT * p.gR * p.rho;
  const double ephi = p.tf.e_phi;
  const double radius = std::sqrt(std::max(u_tilde(p, u), 0.0) * ggr * ephi);

  std::vector<RMatrix> blocks(K);
  std::vector<RVector> hs(K);
  for (int k = 0; k < K; ++k) {
    std::vector<int> co;
    for (int i : p.pilots.coset[k])
      if (i != k) co.push_back(i);
    const Eigen::Index rows = 1 + n + 2 * static_cast<Eigen::Index>(co.size()) + 1;
    RMatrix Gk = RMatrix::Zero(rows, n);
    RVector hk = RVector::Zero(rows);
    for (int m = 0; m < M; ++m) Gk(0, var_index(p, m, k)) = radius * p.w(m, k);
    Eigen::Index r = 1;
    for (int m = 0; m < M; ++m)
      for (int i = 0; i < K; ++i, ++r) {
        const double wmi = p.w(m, i);
        if (wmi > 0) Gk(r, var_index(p, m, i)) = std::sqrt(soc_quad_coeff(p, m, k, i)) / wmi;
      }
    const double amp = std::sqrt(ggr * ephi);
    for (int i : co) {
      for (int m = 0; m < M; ++m) {
        const double wmi = p.w(m, i);
        if (wmi <= 0) continue;
        const cplx s = p.coeff.cross[p.coeff.idx(m, k, i)];
        Gk(r, var_index(p, m, i)) = amp * s.real() / wmi;
        Gk(r + 1, var_index(p, m, i)) = amp * s.imag() / wmi;
      }
      r += 2;
    }
    hk(r) = 1.0;
    if (scale) {
      double big = 1.0;
      for (Eigen::Index q = 0; q < rows; ++q) big = std::max(big, std::hypot(Gk.row(q).norm(), hk(q)));
      Gk /= big;
      hk /= big;
    }
    blocks[k] = std::move(Gk);
    hs[k] = std::move(hk);
  }

  ConeSystem cs;
  Eigen::Index total = 0;
  for (int k = 0; k < K; ++k) {
    cs.start.push_back(total);
    total += blocks[k].rows();
  }
  cs.start.push_back(total);
  cs.G.resize(total, n);
  cs.h.resize(total);
  for (int k = 0; k < K; ++k) {
    cs.G.middleRows(cs.start[k], blocks[k].rows()) = blocks[k];
    cs.h.segment(cs.start[k], blocks[k].rows()) = hs[k];
  }
  return cs;
}

inline void project_soc(Eigen::Ref<RVector> x) {
  const double t = x(0);
  const double nv = x.tail(x.size() - 1).norm();
  if (nv <= t) return;
  if (nv <= -t) {
    x.setZero();
    return;
  }
  const double a = 0.5 * (t + nv);
  x(0) = a;
  x.tail(x.size() - 1) *= a / nv;
}

// Nonnegative orthant intersected with a ball about the origin: clamp then shrink is exact.
inline void project_power(const SocProblem& p, const std::vector<bool>& fixed_zero, Eigen::Ref<RVector> y) {
  const double r = std::sqrt(p.power_budget);
  for (int m = 0; m < p.M; ++m) {
    auto seg = y.segment(static_cast<Eigen::Index>(m) * p.K, p.K);
    for (int i = 0; i < p.K; ++i)
      if (seg(i) < 0 || fixed_zero[m * p.K + i]) seg(i) = 0.0;
    const double nrm = seg.norm();
    if (nrm > r) seg *= r / nrm;
  }
}

// Per-UE slack radius - ||v_k|| on the unscaled cones; nullopt if any cone fails.
inline std::optional<std::vector<double>> check_cones(const ConeSystem& cs, const RVector& y, int K, double tol) {
  const RVector s = cs.G * y + cs.h;
  std::vector<double> slack(K);
  for (int k = 0; k < K; ++k) {
    const Eigen::Index b = cs.start[k], len = cs.start[k + 1] - b;
    const double t = s(b);
    const double nv = s.segment(b + 1, len - 1).norm();
    if (!(nv <= t * (1.0 + tol))) return std::nullopt;
    slack[k] = t - nv;
  }
  return slack;
}

}  // namespace detail

inline RMatrix eta_from_y(const SocProblem& p, const RVector& y) {
  RMatrix eta = RMatrix::Zero(p.M, p.K);
  for (int m = 0; m < p.M; ++m)
    for (int i = 0; i < p.K; ++i) {
      const double w = p.w(m, i);
      if (w > 0) eta(m, i) = (y(m * p.K + i) / w) * (y(m * p.K + i) / w);
    }
  return eta;
}

inline RVector y_from_eta(const SocProblem& p, const RMatrix& eta) {
  RVector y(p.M * p.K);
  for (int m = 0; m < p.M; ++m)
    for (int i = 0; i < p.K; ++i) y(m * p.K + i) = p.w(m, i) * std::sqrt(std::max(eta(m, i), 0.0));
  return y;
}

/// Closed-form min_k SINR_k at the problem's channel use.
inline double min_sinr_at(const SocProblem& p, const RMatrix& eta) {
  double v = std::numeric_limits<double>::infinity();
  for (int k = 0; k < p.K; ++k) v = std::min(v, sinr_breakdown(p.coeff, p.pilots, eta, p.cfg, p.tf, k).sinr());
  return v;
}

/// Largest per-AP power use sum_i eta_mi tr(Omega_mi).
inline double max_power_use(const SocProblem& p, const RMatrix& eta) {
  return (eta.cwiseProduct(p.coeff.tr_omega)).rowwise().sum().maxCoeff();
}

/// Decides whether min_k SINR_k >= u is attainable. `warm` is an optional starting eta.
inline SocResult soc_feasible(const SocProblem& p, double u, const SocOptions& opt = {},
                              const std::optional<RMatrix>& warm = std::nullopt) {
  if (!(u > 0.0) || !(u < p.u_limit()))
    throw Error(ErrorCode::kUOutOfRange, "target SINR outside (0, e_psi / (1 - e_psi))");
  const int n = p.M * p.K;
  std::vector<bool> fixed_zero(n);
  for (int m = 0; m < p.M; ++m)
    for (int i = 0; i < p.K; ++i) fixed_zero[m * p.K + i] = !(p.w(m, i) > 0);

  SocResult res;
  const detail::ConeSystem exact = detail::build_cones(p, u, false);
  auto accept = [&](const RVector& y) {
    if (auto sl = detail::check_cones(exact, y, p.K, opt.tolerance)) {
      res.feasible = true;
      res.eta = eta_from_y(p, y);
      res.slacks = std::move(*sl);
      return true;
    }
    return false;
  };

  RVector y0 = RVector::Zero(n);
  if (warm) {
    y0 = y_from_eta(p, *warm);
    detail::project_power(p, fixed_zero, y0);
    if (accept(y0)) return res;
  }

  double u_run = u * (1.0 + opt.margin);
  if (!(u_run < p.u_limit())) u_run = u;
  const detail::ConeSystem cs = detail::build_cones(p, u_run, true);
  const RMatrix& G = cs.G;
  const RVector& h = cs.h;
  RMatrix normal = G.transpose() * G;
  normal.diagonal().array() += 1.0;
  const Eigen::LLT<RMatrix> llt(normal);

  RVector xy = y0;
  RVector xs = G * y0 + h;
  RVector ya(n), sa(h.size()), yb(n), sb(h.size());
  // Infeasible instances keep a residual bounded away from zero; stop once the
  // best residual of a window no longer improves on the previous one.
  double window_best = std::numeric_limits<double>::infinity();
  double prev_window_best = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= opt.max_iterations; ++it) {
    ya = llt.solve(xy + G.transpose() * (xs - h));
    sa = G * ya + h;
    yb = 2.0 * ya - xy;
    detail::project_power(p, fixed_zero, yb);
    sb = 2.0 * sa - xs;
    for (int k = 0; k < p.K; ++k) {
      const Eigen::Index b = cs.start[k];
      detail::project_soc(sb.segment(b, cs.start[k + 1] - b));
    }
    xy += opt.relaxation * (yb - ya);
    xs += opt.relaxation * (sb - sa);
    window_best = std::min(window_best, std::sqrt((yb - ya).squaredNorm() + (sb - sa).squaredNorm()));
    res.iterations = it;

    if (it % opt.check_every == 0) {
      if (accept(yb)) return res;
      RVector yp = ya;
      detail::project_power(p, fixed_zero, yp);
      if (accept(yp)) return res;
    }
    if (it % opt.stall_window == 0) {
      if (window_best > (1.0 - opt.stall_ratio) * prev_window_best) break;
      prev_window_best = window_best;
      window_best = std::numeric_limits<double>::infinity();
    }
  }
  return res;
}

/// Same as above, straight from estimator statistics.
inline SocResult soc_feasible(double u, const ChannelStatistics& st, const PilotAssignment& a,
                              const SystemConfig& cfg, const SocOptions& opt = {}) {
  const SocProblem p = make_soc_problem(term_coefficients(st, a, cfg), a, cfg, cfg.target_channel_use(),
                                        opt.power_budget);
  return soc_feasible(p, u, opt);
}

}  // namespace starcf
