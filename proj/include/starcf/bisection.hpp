// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "starcf/closedform.hpp"
#include "starcf/error.hpp"
#include "starcf/soc.hpp"

namespace starcf {

template <typename Witness>
struct BisectResult {
  double lo = 0.0;  // largest probed-feasible target (or the initial lo)
  double hi = 0.0;
  std::optional<Witness> witness;
  int probes = 0;
};

/// Bisection on a monotone feasibility oracle. At least one probe is made, so
/// eps >= hi - lo yields exactly one.
template <typename Witness>
BisectResult<Witness> bisect(const std::function<std::optional<Witness>(double)>& oracle, double lo, double hi,
                             double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidConfig, "bisection tolerance must be positive");
  if (!(hi >= lo)) throw Error(ErrorCode::kInvalidConfig, "bisection interval is empty");
  BisectResult<Witness> r{lo, hi, std::nullopt, 0};
  do {
    const double mid = 0.5 * (r.lo + r.hi);
    ++r.probes;
    if (auto w = oracle(mid)) {
      r.lo = mid;
      r.witness = std::move(w);
    } else {
      r.hi = mid;
    }
  } while (r.hi - r.lo > eps);
  return r;
}

/// Probe budget guaranteed by bisect().
inline int bisection_probe_bound(double range, double eps) {
  if (range <= eps) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log2(range / eps))));
}

/// Upper bound on min_k SINR_k over all feasible power controls: keeps only the
/// signal, the beamforming-uncertainty floor and the own-channel term, with
/// sum_m eta a >= S^2 / M and S <= sum_m sqrt(tr Omega_mk).
inline double u_max_bound(const SocProblem& p) {
  const double ggr = p.gT * p.gR * p.rho;
  const double A = ggr * p.tf.e_delta;
  const double B = ggr * p.tf.e_phi * (1.0 - p.tf.e_psi);
  const double C = p.gT * p.rho * (1.0 - p.gR * p.tf.e_phi);
  double bound = std::numeric_limits<double>::infinity();
  for (int k = 0; k < p.K; ++k) {
    const double S = p.w.col(k).sum();
    const double s2 = S * S;
    bound = std::min(bound, A * s2 / (1.0 + (B + C / p.M) * s2));
  }
  return std::min(bound, p.u_limit());
}

struct PowerResult {
  PowerControl power;
  double value = 0.0;  // closed-form min SINR at `power`
  double lo = 0.0, hi = 0.0;
  int probes = 0;
};

struct BisectOptions {
  double eps_rel = 0.01;  // stop width as a fraction of the upper bound
  SocOptions soc;
  std::function<void(double lo, double hi)> on_probe;  // progress hook
};

/// Max-min power control by bisection on the SOC feasibility problem.
/// `u_min` is a known-achievable target (0 if none); `incumbent` warm-starts
/// every probe and is the fallback when no probe above u_min succeeds.
inline PowerResult bisect_power(const SocProblem& p, double u_min, const std::optional<RMatrix>& incumbent,
                                const BisectOptions& opt = {}) {
  const double u_max = u_max_bound(p);
  PowerResult out;
  out.lo = std::max(0.0, u_min);
  out.hi = u_max;

  std::optional<RMatrix> warm = incumbent;
  auto oracle = [&](double u) -> std::optional<RMatrix> {
    SocResult r = soc_feasible(p, u, opt.soc, warm);
    if (!r.feasible) return std::nullopt;
    warm = r.eta;
    return r.eta;
  };

  if (out.hi > out.lo) {
    const double eps = opt.eps_rel * u_max;
    auto tracked = [&](double u) {
      auto w = oracle(u);
      if (w) out.lo = u; else out.hi = u;
      if (opt.on_probe) opt.on_probe(out.lo, out.hi);
      return w;
    };
    auto br = bisect<RMatrix>(tracked, out.lo, out.hi, eps);
    out.probes = br.probes;
    if (br.witness) {
      out.power.eta = *br.witness;
      out.value = min_sinr_at(p, out.power.eta);
      return out;
    }
  }

  // Nothing above u_min: keep the incumbent if it already attains u_min.
  if (incumbent && max_power_use(p, *incumbent) <= p.power_budget * (1.0 + 1e-9) &&
      min_sinr_at(p, *incumbent) >= u_min) {
    out.power.eta = *incumbent;
    out.value = min_sinr_at(p, out.power.eta);
    return out;
  }
  if (u_min > 0.0 && u_min < p.u_limit()) {
    ++out.probes;
    if (auto w = oracle(u_min)) {
      out.power.eta = *w;
      out.value = min_sinr_at(p, out.power.eta);
      return out;
    }
  }
  throw Error(ErrorCode::kNoFeasiblePoint, "no power control attains the lower target");
}

/// Feasibility on a sorted grid of targets; true when no infeasible target
/// precedes a feasible one.
inline bool quasiconcavity_probe(const SocProblem& p, const std::vector<double>& u_grid,
                                 const SocOptions& opt = {}, std::vector<bool>* feasible = nullptr) {
  bool seen_infeasible = false, monotone = true;
  if (feasible) feasible->clear();
  for (double u : u_grid) {
    const bool ok = soc_feasible(p, u, opt).feasible;
    if (feasible) feasible->push_back(ok);
    if (!ok) seen_infeasible = true;
    else if (seen_infeasible) monotone = false;
  }
  return monotone;
}

}  // namespace starcf
