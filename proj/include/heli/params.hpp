#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>

#include "heli/config.hpp"

namespace heli {

/// Physical constants of the hover-regime plant. Defaults describe a ~9 kg
/// gasoline trainer-class machine; config/default.ini carries the same values.
struct HelicopterParams {
  // [mass]
  double m = 9.0;
  double jx = 0.36;
  double jy = 0.98;
  double jz = 0.88;
  double g = 9.81;

  // [rotor]
  double tau_mr = 0.06;       // flap time constant (s)
  double k_beta = 140.0;      // hub spring stiffness (N m/rad)
  double gamma_mr = 5.0;      // Lock number
  double omega_mr = 167.0;    // rotor speed (rad/s)
  double i_beta = 0.05;       // blade flap inertia (kg m^2)
  double thrust_trim = 100.8; // thrust at zero collective (N)
  double k_col = 70.0;        // collective-to-thrust gain (N/unit)
  double h_mr = 0.30;         // hub height above CG (m)
  double k_lat = 0.17;        // lateral cyclic to blade pitch (rad/unit)
  double k_lon = 0.17;        // longitudinal cyclic to blade pitch (rad/unit)
  double flap_limit = 0.2;    // rad
  double q_mr = 0.035;        // reaction torque per unit thrust (m)
  double flap_u = 0.0025;     // flap-back per unit relative airspeed (rad s/m)
  double flap_v = 0.0025;

  // [aero]
  double l_tr = 1.05;   // tail rotor arm behind CG (m)
  double h_tr = 0.15;   // tail rotor hub height above CG (m)
  double k_ped = 20.0;  // tail thrust per unit tail command (N/unit)
  double dx = 1.2, dy = 1.2, dz = 2.5;  // N per m/s relative airspeed
  double lp = 0.4, mq = 0.6, nr = 0.5;  // N m per rad/s
  double n_v = 0.3;     // fin weathercock moment (N m per m/s lateral airspeed)

  // [gyro]
  double kp_g = 0.8;
  double ki_g = 4.0;
  double ka_g = 2.0;

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw ConfigError(std::string("invalid helicopter parameter: ") + what);
    };
    require(m > 0, "m > 0");
    require(jx > 0 && jy > 0 && jz > 0, "principal inertias > 0");
    require(tau_mr > 0, "tau_mr > 0");
    require(omega_mr > 0, "omega_mr > 0");
    require(i_beta > 0, "i_beta > 0");
    require(gamma_mr > 0, "gamma_mr > 0");
    require(k_beta >= 0, "k_beta >= 0");
    require(k_col > 0, "k_col > 0");
    require(flap_limit > 0, "flap_limit > 0");
    require(dx >= 0 && dy >= 0 && dz >= 0, "drag coefficients >= 0");
    require(lp >= 0 && mq >= 0 && nr >= 0, "rate damping >= 0");
    require(n_v >= 0, "n_v >= 0");
    require(g >= 0, "g >= 0");
  }
};

namespace detail {

using FieldTable = std::map<std::string, std::map<std::string, double*>>;

inline FieldTable param_fields(HelicopterParams& p) {
  return {
      {"mass", {{"m", &p.m}, {"jx", &p.jx}, {"jy", &p.jy}, {"jz", &p.jz}, {"g", &p.g}}},
      {"rotor",
       {{"tau_mr", &p.tau_mr}, {"k_beta", &p.k_beta}, {"gamma_mr", &p.gamma_mr},
        {"omega_mr", &p.omega_mr}, {"i_beta", &p.i_beta},
        {"thrust_trim", &p.thrust_trim}, {"k_col", &p.k_col}, {"h_mr", &p.h_mr},
        {"k_lat", &p.k_lat}, {"k_lon", &p.k_lon}, {"flap_limit", &p.flap_limit},
        {"q_mr", &p.q_mr}, {"flap_u", &p.flap_u}, {"flap_v", &p.flap_v}}},
      {"aero",
       {{"l_tr", &p.l_tr}, {"h_tr", &p.h_tr}, {"k_ped", &p.k_ped}, {"dx", &p.dx},
        {"dy", &p.dy}, {"dz", &p.dz}, {"lp", &p.lp}, {"mq", &p.mq}, {"nr", &p.nr},
        {"n_v", &p.n_v}}},
      {"gyro", {{"kp_g", &p.kp_g}, {"ki_g", &p.ki_g}, {"ka_g", &p.ka_g}}},
  };
}

/// Applies every entry whose section appears in `table`; unknown keys inside
/// an owned section are rejected.
inline void apply_fields(const Config& cfg, const FieldTable& table) {
  for (const auto& e : cfg.entries()) {
    const auto sec = table.find(e.section);
    if (sec == table.end()) continue;
    const auto key = sec->second.find(e.key);
    if (key == sec->second.end()) {
      throw ConfigError(cfg.where(e) + ": unknown key '" + e.key +
                        "' in section [" + e.section + "]");
    }
    *key->second = parse_double(e.value, cfg.where(e));
  }
}

}  // namespace detail

inline HelicopterParams load_params(const Config& cfg) {
  HelicopterParams p;
  detail::apply_fields(cfg, detail::param_fields(p));
  p.validate();
  return p;
}

}  // namespace heli
