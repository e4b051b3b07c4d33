#pragma once

// Continuous-time hover-regime helicopter model: kinematics, rigid-body
// dynamics, main-rotor tip-path-plane flapping and the onboard yaw-rate PI
// loop, assembled into a single state-derivative function.

#include <cmath>
#include <numbers>

#include "heli/params.hpp"
#include "heli/types.hpp"

namespace heli {

inline void require_regular_attitude(const EulerAngles& att) {
  if (!(std::abs(att.theta) < std::numbers::pi / 2)) {
    throw SingularAttitudeError("pitch angle at or beyond +-pi/2: " +
                                std::to_string(att.theta));
  }
}

/// ZYX direction-cosine matrix mapping body-axis vectors into NED.
inline Eigen::Matrix3d rotation_body_to_ned(const EulerAngles& att) {
  require_regular_attitude(att);
  const double cf = std::cos(att.phi), sf = std::sin(att.phi);
  const double ct = std::cos(att.theta), st = std::sin(att.theta);
  const double cp = std::cos(att.psi), sp = std::sin(att.psi);
  Eigen::Matrix3d r;
  r << ct * cp, sf * st * cp - cf * sp, cf * st * cp + sf * sp,
      ct * sp, sf * st * sp + cf * cp, cf * st * sp - sf * cp,
      -st, sf * ct, cf * ct;
  return r;
}

inline EulerAngles euler_rates(const EulerAngles& att, const BodyRates& w) {
  require_regular_attitude(att);
  const double cf = std::cos(att.phi), sf = std::sin(att.phi);
  const double ct = std::cos(att.theta), tt = std::tan(att.theta);
  return {w.p + tt * (sf * w.q + cf * w.r), cf * w.q - sf * w.r,
          (sf * w.q + cf * w.r) / ct};
}

/// Longitudinal/lateral flap cross-coupling A_bs; the lateral coefficient is
/// always its negative.
inline double flap_coupling(const HelicopterParams& p) {
  const double den = p.gamma_mr * p.omega_mr * p.omega_mr * p.i_beta;
  if (!(den > 0)) throw ConfigError("flap coupling denominator must be positive");
  return 8.0 * p.k_beta / den;
}

/// Tip-path-plane flapping. `airspeed` is the body-axis velocity relative to
/// the air mass; it produces flap-back (a_s with forward speed, b_s away from
/// sideslip) and is how wind reaches the attitude loop.
inline FlapState flap_derivatives(const FlapState& flap, const BodyRates& w,
                                  double delta_lat, double delta_lon,
                                  const HelicopterParams& p,
                                  const Eigen::Vector3d& airspeed = Eigen::Vector3d::Zero()) {
  const double a_bs = flap_coupling(p);
  const double b_bs = -a_bs;
  const double inv_tau = 1.0 / p.tau_mr;
  const double pitch_lon = p.k_lon * delta_lon + p.flap_u * airspeed.x();
  const double pitch_lat = p.k_lat * delta_lat - p.flap_v * airspeed.y();
  return {-w.q - inv_tau * flap.a_s + a_bs * flap.b_s + inv_tau * pitch_lon,
          -w.p - inv_tau * flap.b_s + b_bs * flap.a_s + inv_tau * pitch_lat};
}

struct YawGyroOutput {
  double delta_ped_prime = 0.0;  // clamped tail servo command
  double xi_dot = 0.0;
};

/// PI heading-hold gyro: xi' = KI e, command = KP e + xi, e = Ka dped - r.
inline YawGyroOutput yaw_gyro_output(const YawGyroState& gyro, double delta_ped,
                                     double r, const HelicopterParams& p) {
  const double e = p.ka_g * delta_ped - r;
  return {clamp_unit(p.kp_g * e + gyro.xi), p.ki_g * e};
}

inline double main_rotor_thrust(double delta_col, const HelicopterParams& p) {
  return p.thrust_trim + p.k_col * delta_col;
}

/// Body-axis force (including gravity) and moment about the CG.
inline ForceMoment forces_and_moments(const FullState& s, const ControlInputs& in,
                                      const WindVector& wind,
                                      const HelicopterParams& p) {
  const ControlInputs u = in.clamped();
  const double thrust = main_rotor_thrust(u.delta_col, p);
  const double tail = yaw_gyro_output(s.gyro, u.delta_ped, s.rates.r, p).delta_ped_prime;
  const double tail_force = -p.k_ped * tail;  // body y, acts at the tail hub

  const Eigen::Vector3d v_rel =
      Eigen::Vector3d(s.velocity.vx, s.velocity.vy, s.velocity.vz) - wind.vec();
  const double a = s.flap.a_s, b = s.flap.b_s;

  ForceMoment fm;
  fm.f << -thrust * std::sin(a), thrust * std::sin(b) + tail_force,
      -thrust * std::cos(a) * std::cos(b);
  fm.f -= Eigen::Vector3d(p.dx * v_rel.x(), p.dy * v_rel.y(), p.dz * v_rel.z());
  fm.f += rotation_body_to_ned(s.attitude).transpose() *
          Eigen::Vector3d(0.0, 0.0, p.m * p.g);

  const double flap_stiffness = p.k_beta + thrust * p.h_mr;
  fm.tau << flap_stiffness * b + p.h_tr * tail_force - p.lp * s.rates.p,
      flap_stiffness * a - p.mq * s.rates.q,
      -p.l_tr * tail_force - p.nr * s.rates.r - p.q_mr * thrust + p.n_v * v_rel.y();
  return fm;
}

inline StateVector state_derivative(const FullState& s, const ControlInputs& in,
                                    const WindVector& wind,
                                    const HelicopterParams& p) {
  const ControlInputs u = in.clamped();
  const Eigen::Matrix3d r_bn = rotation_body_to_ned(s.attitude);
  const ForceMoment fm = forces_and_moments(s, u, wind, p);

  const Eigen::Vector3d v(s.velocity.vx, s.velocity.vy, s.velocity.vz);
  const Eigen::Vector3d w(s.rates.p, s.rates.q, s.rates.r);
  const Eigen::Vector3d j(p.jx, p.jy, p.jz);

  const Eigen::Vector3d pos_dot = r_bn * v;
  const Eigen::Vector3d v_dot = -w.cross(v) + fm.f / p.m;
  const Eigen::Vector3d w_dot =
      (fm.tau - w.cross(j.cwiseProduct(w))).cwiseQuotient(j);
  const EulerAngles att_dot = euler_rates(s.attitude, s.rates);
  const FlapState flap_dot =
      flap_derivatives(s.flap, s.rates, u.delta_lat, u.delta_lon, p, v - wind.vec());
  const YawGyroOutput gyro = yaw_gyro_output(s.gyro, u.delta_ped, s.rates.r, p);

  StateVector d;
  d << pos_dot, v_dot, att_dot.phi, att_dot.theta, att_dot.psi, w_dot,
      flap_dot.a_s, flap_dot.b_s, gyro.xi_dot;
  return d;
}

inline StateVector state_derivative(const StateVector& x, const ControlInputs& in,
                                    const WindVector& wind,
                                    const HelicopterParams& p) {
  return state_derivative(FullState::from_vector(x), in, wind, p);
}

}  // namespace heli
