#pragma once

// PD position and altitude loops producing attitude references (as offsets
// from the trim attitude) and the collective command.

#include <cmath>
#include <numbers>

#include "heli/dynamics.hpp"

namespace heli {

struct OuterGains {
  double kp_z = 60.0, kd_z = 40.0;  // N per m, N per m/s
  double kp_x = 0.12, kd_x = 0.16;  // per m, per m/s (sine of tilt)
  double kp_y = 0.12, kd_y = 0.16;
  double tilt_limit = 0.30;         // rad
  double col_limit = 1.0;           // |delta_col| bound

  void validate() const {
    if (kp_z < 0 || kd_z < 0 || kp_x < 0 || kd_x < 0 || kp_y < 0 || kd_y < 0) {
      throw ConfigError("outer-loop gains must be non-negative");
    }
    if (!(tilt_limit > 0 && tilt_limit < std::numbers::pi / 2)) {
      throw ConfigError("tilt_limit must lie in (0, pi/2)");
    }
    if (!(col_limit > 0 && col_limit <= 1.0)) throw ConfigError("col_limit must lie in (0, 1]");
  }
};

inline OuterGains load_outer_gains(const Config& cfg) {
  OuterGains g;
  detail::apply_fields(cfg, {{"outer",
                              {{"kp_z", &g.kp_z}, {"kd_z", &g.kd_z}, {"kp_x", &g.kp_x},
                               {"kd_x", &g.kd_x}, {"kp_y", &g.kp_y}, {"kd_y", &g.kd_y},
                               {"tilt_limit", &g.tilt_limit}, {"col_limit", &g.col_limit}}}});
  g.validate();
  return g;
}

struct PositionReference {
  NedPosition p_ref;
  Eigen::Vector3d v_ref = Eigen::Vector3d::Zero();  // NED
  double psi_ref = 0.0;
};

inline Eigen::Vector3d ned_velocity(const FullState& s) {
  return rotation_body_to_ned(s.attitude) *
         Eigen::Vector3d(s.velocity.vx, s.velocity.vy, s.velocity.vz);
}

struct AltitudeCommand {
  double thrust = 0.0;  // commanded thrust before the collective clamp (N)
  double delta_col = 0.0;
  bool saturated = false;
};

/// T = (KP e + KD e' + m g) / (cos phi cos theta) + bias, errors positive up.
/// `thrust_bias` is the trim-point correction from hover_thrust_bias(); zero
/// gives the uncorrected law.
inline AltitudeCommand altitude_control(const PositionReference& ref, const FullState& s,
                                        const OuterGains& gains, const HelicopterParams& p,
                                        double thrust_bias = 0.0) {
  const double cc = std::cos(s.attitude.phi) * std::cos(s.attitude.theta);
  if (!(std::abs(s.attitude.phi) < std::numbers::pi / 2 &&
        std::abs(s.attitude.theta) < std::numbers::pi / 2)) {
    throw SingularAttitudeError("altitude control undefined at |phi| or |theta| >= pi/2");
  }
  const double e = s.position.pd - ref.p_ref.pd;
  const double e_dot = ned_velocity(s).z() - ref.v_ref.z();
  AltitudeCommand cmd;
  cmd.thrust = (gains.kp_z * e + gains.kd_z * e_dot + p.m * p.g) / cc + thrust_bias;
  const double raw = (cmd.thrust - p.thrust_trim) / p.k_col;
  cmd.delta_col = std::clamp(raw, -gains.col_limit, gains.col_limit);
  cmd.saturated = cmd.delta_col != raw;
  return cmd;
}

/// Trim thrust minus the uncorrected law's output at the trim attitude. The
/// rotor tilt and tail side force at a rolled trim make the exact hover thrust
/// differ from m g / (cos phi cos theta) by a fraction of a percent.
inline double hover_thrust_bias(const FullState& trim_state, double trim_collective,
                                const HelicopterParams& p) {
  const double cc = std::cos(trim_state.attitude.phi) * std::cos(trim_state.attitude.theta);
  return main_rotor_thrust(trim_collective, p) - p.m * p.g / cc;
}

struct TiltCommand {
  double theta_ref = 0.0;
  double phi_ref = 0.0;
  bool saturated = false;
};

/// Heading-frame PD: a target ahead commands nose down, a target to the right
/// commands right roll. The arcsin argument is clamped to sin(tilt_limit).
inline TiltCommand horizontal_control(const PositionReference& ref, const FullState& s,
                                      const OuterGains& gains) {
  const Eigen::Vector3d v = ned_velocity(s);
  const double en = ref.p_ref.pn - s.position.pn;
  const double ee = ref.p_ref.pe - s.position.pe;
  const double en_dot = ref.v_ref.x() - v.x();
  const double ee_dot = ref.v_ref.y() - v.y();
  const double c = std::cos(s.attitude.psi), sn = std::sin(s.attitude.psi);
  const double fwd = c * en + sn * ee, fwd_dot = c * en_dot + sn * ee_dot;
  const double right = -sn * en + c * ee, right_dot = -sn * en_dot + c * ee_dot;

  const double lim = std::sin(gains.tilt_limit);
  const double arg_x = gains.kp_x * fwd + gains.kd_x * fwd_dot;
  const double arg_y = gains.kp_y * right + gains.kd_y * right_dot;
  const double cx = std::clamp(arg_x, -lim, lim);
  const double cy = std::clamp(arg_y, -lim, lim);
  TiltCommand cmd;
  cmd.theta_ref = std::clamp(-std::asin(cx), -gains.tilt_limit, gains.tilt_limit);
  cmd.phi_ref = std::clamp(std::asin(cy), -gains.tilt_limit, gains.tilt_limit);
  cmd.saturated = cx != arg_x || cy != arg_y;
  return cmd;
}

}  // namespace heli
