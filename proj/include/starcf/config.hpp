// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "starcf/error.hpp"

namespace starcf {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Deployment under study.
enum class Mode {
  kStar,             // one energy-splitting STAR surface serving both half-spaces
  kReflectOnlyPair,  // two co-located N/2-element reflecting surfaces, reflection side only
  kNoRis,            // plain cell-free network
};

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::kStar: return "star";
    case Mode::kReflectOnlyPair: return "reflect-only-pair";
    case Mode::kNoRis: return "no-ris";
  }
  return "star";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "star") return Mode::kStar;
  if (s == "reflect-only-pair") return Mode::kReflectOnlyPair;
  if (s == "no-ris") return Mode::kNoRis;
  throw Error(ErrorCode::kInvalidConfig, "unknown mode '" + std::string(s) + "'");
}

/// Every scalar of one experiment. Defaults are the reference simulation
/// setup; gamma, pathloss and the optimizer tolerances are our choices.
struct SystemConfig {
  // Network size.
  int M = 16;
  int L = 4;
  int N = 16;
  int K_T = 3;
  int K_R = 3;
  int tau_p = 3;
  int tau_c = 100;

  // Powers (W) and hardware.
  double rho = 1.0;
  double p = 0.2;
  double gamma_T = 0.8;
  double gamma_R = 0.8;
  double vartheta = 3.0;

  // Oscillators.
  double f_c = 2e9;
  double c_phi = 1e-18;
  double c_psi = 1e-18;
  double T_s = 1e-5;

  // Surface element size (m); <= 0 means a quarter wavelength.
  double d_H = 0.0;
  double d_V = 0.0;

  // Receiver noise (W); <= 0 means thermal noise over the bandwidth.
  double sigma2 = 0.0;
  double bandwidth_hz = 10e6;
  double noise_figure_db = 9.0;

  std::uint64_t seed = 1;
  Mode mode = Mode::kStar;

  // Propagation.
  double rician_db = 10.0;
  double ap_angle_std_deg = 15.0;
  double shadowing_std_db = 0.0;
  double pathloss_intercept_db = -30.5;
  double pathloss_slope_db = 36.7;
  double direct_loss_db = 0.0;   // extra blockage on the AP-UE links
  double cascade_gain_db = 0.0;  // extra gain on every AP-surface-UE cascade
  double ue_height = 1.5;
  double ris_height = 30.0;
  double ap_height = 12.5;

  // Optimizer.
  int apso_iterations = 100;
  int apso_particles = 10;
  double c1 = 1.496;
  double c2 = 1.496;
  double w_max = 0.9;
  double w_min = 0.4;
  double eps_bi = 0.01;
  double eps_ao = 0.01;
  int ao_max_iterations = 10;
  int soc_max_iterations = 50000;
  int t_eval = -1;  // channel use the optimizer targets; < 0 means tau_p

  int K() const { return K_T + K_R; }
  double wavelength() const { return kSpeedOfLight / f_c; }
  double element_width() const { return d_H > 0 ? d_H : wavelength() / 4.0; }
  double element_height() const { return d_V > 0 ? d_V : wavelength() / 4.0; }
  double noise_power() const {
    if (sigma2 > 0) return sigma2;
    const double dbm = -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
    return std::pow(10.0, (dbm - 30.0) / 10.0);
  }
  double rician_factor() const { return std::pow(10.0, rician_db / 10.0); }
  int target_channel_use() const { return t_eval >= 0 ? t_eval : tau_p; }
  int surface_side() const { return static_cast<int>(std::lround(std::sqrt(double(N)))); }
};

using FieldRef = std::variant<int*, double*, std::uint64_t*, Mode*>;

/// Name -> field binding used by the parser, the dumper and sweeps.
inline std::vector<std::pair<std::string, FieldRef>> config_fields(SystemConfig& c) {
  return {
      {"M", &c.M},
      {"L", &c.L},
      {"N", &c.N},
      {"K_T", &c.K_T},
      {"K_R", &c.K_R},
      {"tau_p", &c.tau_p},
      {"tau_c", &c.tau_c},
      {"rho", &c.rho},
      {"p", &c.p},
      {"gamma_T", &c.gamma_T},
      {"gamma_R", &c.gamma_R},
      {"vartheta", &c.vartheta},
      {"f_c", &c.f_c},
      {"c_phi", &c.c_phi},
      {"c_psi", &c.c_psi},
      {"T_s", &c.T_s},
      {"d_H", &c.d_H},
      {"d_V", &c.d_V},
      {"sigma2", &c.sigma2},
      {"bandwidth_hz", &c.bandwidth_hz},
      {"noise_figure_db", &c.noise_figure_db},
      {"seed", &c.seed},
      {"mode", &c.mode},
      {"rician_db", &c.rician_db},
      {"ap_angle_std_deg", &c.ap_angle_std_deg},
      {"shadowing_std_db", &c.shadowing_std_db},
      {"pathloss_intercept_db", &c.pathloss_intercept_db},
      {"pathloss_slope_db", &c.pathloss_slope_db},
      {"direct_loss_db", &c.direct_loss_db},
      {"cascade_gain_db", &c.cascade_gain_db},
      {"ue_height", &c.ue_height},
      {"ris_height", &c.ris_height},
      {"ap_height", &c.ap_height},
      {"apso_iterations", &c.apso_iterations},
      {"apso_particles", &c.apso_particles},
      {"c1", &c.c1},
      {"c2", &c.c2},
      {"w_max", &c.w_max},
      {"w_min", &c.w_min},
      {"eps_bi", &c.eps_bi},
      {"eps_ao", &c.eps_ao},
      {"ao_max_iterations", &c.ao_max_iterations},
      {"soc_max_iterations", &c.soc_max_iterations},
      {"t_eval", &c.t_eval},
  };
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidConfig, "key '" + key + "': not a number: '" + v + "'");
  }
}

inline long long parse_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidConfig, "key '" + key + "': not an integer: '" + v + "'");
  }
}

}  // namespace detail

/// Assign one `key = value` pair. Unknown keys are rejected.
inline void set_config_value(SystemConfig& cfg, const std::string& key, const std::string& value) {
  for (auto& [name, ref] : config_fields(cfg)) {
    if (name != key) continue;
    std::visit(
        [&](auto* field) {
          using T = std::remove_pointer_t<decltype(field)>;
          if constexpr (std::is_same_v<T, int>) {
            *field = static_cast<int>(detail::parse_integer(key, value));
          } else if constexpr (std::is_same_v<T, double>) {
            *field = detail::parse_double(key, value);
          } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            *field = static_cast<std::uint64_t>(detail::parse_integer(key, value));
          } else {
            *field = parse_mode(value);
          }
        },
        ref);
    return;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown key '" + key + "'");
}

inline std::string format_config_value(const FieldRef& ref) {
  return std::visit(
      [](auto* field) -> std::string {
        using T = std::remove_pointer_t<decltype(field)>;
        if constexpr (std::is_same_v<T, Mode>) {
          return std::string(to_string(*field));
        } else if constexpr (std::is_same_v<T, double>) {
          if (std::isinf(*field)) return "inf";
          std::ostringstream os;
          os.precision(17);
          os << *field;
          return os.str();
        } else {
          return std::to_string(*field);
        }
      },
      ref);
}

/// Throws InvalidConfig on the first violated invariant.
inline void validate(const SystemConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  if (c.M < 1 || c.L < 1) fail("M and L must be >= 1");
  if (c.N < 1) fail("N must be >= 1");
  const int side = c.surface_side();
  if (side * side != c.N) throw Error(ErrorCode::kNonSquareN, "N must be a perfect square");
  if (c.K_T < 0 || c.K_R < 0 || c.K() < 1) fail("need at least one UE");
  if (c.tau_p < 1 || c.tau_p > c.tau_c) fail("need 1 <= tau_p <= tau_c");
  if (c.K() > c.tau_c) fail("need K_T + K_R <= tau_c");
  if (!(c.gamma_T >= 0 && c.gamma_T <= 1) || !(c.gamma_R >= 0 && c.gamma_R <= 1))
    fail("hardware quality factors must lie in [0, 1]");
  if (!(c.vartheta >= 0)) fail("vartheta must be >= 0");
  if (!(c.rho > 0) || !(c.p > 0) || !(c.f_c > 0) || !(c.T_s > 0)) fail("powers, f_c and T_s must be > 0");
  if (c.c_phi < 0 || c.c_psi < 0) fail("oscillator constants must be >= 0");
  if (c.sigma2 < 0) fail("sigma2 must be >= 0");
  if (c.apso_particles < 1 || c.apso_iterations < 0) fail("APSO needs >= 1 particle");
  if (!(c.eps_bi > 0) || !(c.eps_ao > 0)) fail("tolerances must be > 0");
  if (c.t_eval >= c.tau_c) fail("t_eval must be < tau_c");
}

/// Parse a `key = value` stream; `#` starts a comment.
inline SystemConfig parse_config(std::istream& in, SystemConfig base = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidConfig, "line " + std::to_string(lineno) + ": expected key = value");
    }
    set_config_value(base, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
  validate(base);
  return base;
}

inline SystemConfig load_config(const std::string& path, SystemConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path + "'");
  return parse_config(in, base);
}

inline std::string dump_config(SystemConfig c) {
  std::ostringstream os;
  for (auto& [name, ref] : config_fields(c)) os << name << " = " << format_config_value(ref) << "\n";
  return os.str();
}

/// Desk-scale instance used across tests and the acceptance suite.
inline SystemConfig desk_config() {
  SystemConfig c;
  c.M = 4;
  c.L = 2;
  c.N = 16;
  c.K_R = 2;
  c.K_T = 2;
  c.tau_p = 2;
  return c;
}

}  // namespace starcf
