#pragma once

// Baseline attitude controller: PID on roll and pitch, PI on heading, acting
// on deviations from trim. Integrators are clamped for anti-windup.

#include "heli/config.hpp"
#include "heli/params.hpp"
#include "heli/trim.hpp"

namespace heli {

struct PidGains {
  double kp_phi = 0.9, ki_phi = 0.5, kd_phi = 0.12;
  double kp_theta = 0.9, ki_theta = 0.5, kd_theta = 0.12;
  double kp_psi = 1.0, ki_psi = 0.3;
  double integrator_limit = 0.3;  // bound on each integral contribution
};

inline PidGains load_pid_gains(const Config& cfg) {
  PidGains g;
  detail::apply_fields(cfg, {{"pid",
                              {{"kp_phi", &g.kp_phi}, {"ki_phi", &g.ki_phi},
                               {"kd_phi", &g.kd_phi}, {"kp_theta", &g.kp_theta},
                               {"ki_theta", &g.ki_theta}, {"kd_theta", &g.kd_theta},
                               {"kp_psi", &g.kp_psi}, {"ki_psi", &g.ki_psi},
                               {"integrator_limit", &g.integrator_limit}}}});
  if (g.integrator_limit < 0) throw ConfigError("pid integrator_limit must be >= 0");
  return g;
}

struct PidState {
  Eigen::Vector3d integral = Eigen::Vector3d::Zero();  // integral contributions
};

struct PidOutput {
  Eigen::Vector3d u = Eigen::Vector3d::Zero();  // dlat, dlon, dped (clamped)
  PidState next;
};

inline PidOutput pid_attitude_controller(const PidGains& g, const PidState& state,
                                         const EulerAngles& att, const BodyRates& rates,
                                         const EulerAngles& att_ref, const TrimPoint& trim,
                                         double dt) {
  const Eigen::Vector3d e(att_ref.phi - att.phi, att_ref.theta - att.theta,
                          att_ref.psi - att.psi);
  const Eigen::Vector3d ki(g.ki_phi, g.ki_theta, g.ki_psi);
  PidOutput out;
  out.next.integral =
      (state.integral + dt * ki.cwiseProduct(e))
          .cwiseMax(-g.integrator_limit)
          .cwiseMin(g.integrator_limit);
  const Eigen::Vector3d u0 = trim.u_trim.cyclic_pedal();
  const Eigen::Vector3d raw(
      u0[0] + g.kp_phi * e[0] + state.integral[0] - g.kd_phi * (rates.p - trim.x_trim.rates.p),
      u0[1] + g.kp_theta * e[1] + state.integral[1] -
          g.kd_theta * (rates.q - trim.x_trim.rates.q),
      u0[2] + g.kp_psi * e[2] + state.integral[2]);
  for (int i = 0; i < 3; ++i) out.u[i] = clamp_unit(raw[i]);
  return out;
}

}  // namespace heli
