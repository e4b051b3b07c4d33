#pragma once

// Closed-loop scenario execution, logging and metric extraction.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "heli/hinf.hpp"
#include "heli/integrator.hpp"
#include "heli/observer.hpp"
#include "heli/outer_loop.hpp"
#include "heli/pid.hpp"
#include "heli/wind.hpp"

namespace heli {

enum class ControllerKind { hinf, pid, open_loop };

inline const char* to_string(ControllerKind c) {
  switch (c) {
    case ControllerKind::hinf: return "hinf";
    case ControllerKind::pid: return "pid";
    case ControllerKind::open_loop: return "open_loop";
  }
  return "?";
}

inline ControllerKind parse_controller(const std::string& s) {
  if (s == "hinf") return ControllerKind::hinf;
  if (s == "pid") return ControllerKind::pid;
  if (s == "open_loop") return ControllerKind::open_loop;
  throw ConfigError("unknown controller '" + s + "' (expected hinf, pid or open_loop)");
}

/// Position reference p(t) = p0 + v (t - t0) on [t0, t1).
struct ReferenceSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  NedPosition p0;
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  double psi = 0.0;

  bool is_hover() const { return v.norm() == 0.0; }
};

struct ScenarioConfig {
  std::string name = "custom";
  double duration = 10.0;
  double dt = 0.002;
  ControllerKind controller = ControllerKind::hinf;
  /// Horizontal position loop disabled; attitude held at the trim reference.
  bool attitude_hold = false;
  WindModel wind;
  std::vector<ReferenceSegment> references;
  StateVector initial_offset = StateVector::Zero();  // added to the trim state
  Eigen::Vector3d observer_offset = Eigen::Vector3d::Zero();
  /// Attitude reference step (phi, theta, psi) added from `attitude_step_time`.
  Eigen::Vector3d attitude_step = Eigen::Vector3d::Zero();
  double attitude_step_time = 0.0;
  double settle_time = 2.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(duration > 0)) throw ConfigError("scenario duration must be > 0");
    if (!(dt > 0 && dt <= 0.02)) throw ConfigError("scenario dt must lie in (0, 0.02]");
    if (!(settle_time >= 0)) throw ConfigError("settle_time must be >= 0");
    wind.validate();
    double last = -std::numeric_limits<double>::infinity();
    for (const auto& s : references) {
      if (!(s.t1 > s.t0)) throw ConfigError("reference segment must have t1 > t0");
      if (s.t0 < last) throw ConfigError("reference segments must be time-ordered and disjoint");
      last = s.t1;
    }
  }

  long steps() const { return std::lround(duration / dt); }
};

inline PositionReference reference_at(const ScenarioConfig& cfg, double t) {
  PositionReference ref;
  if (cfg.references.empty()) return ref;
  const ReferenceSegment* seg = &cfg.references.front();
  for (const auto& s : cfg.references) {
    if (t >= s.t0) seg = &s;
  }
  const double tau = std::clamp(t, seg->t0, seg->t1) - seg->t0;
  const bool active = t < seg->t1;
  ref.p_ref = {seg->p0.pn + seg->v.x() * tau, seg->p0.pe + seg->v.y() * tau,
               seg->p0.pd + seg->v.z() * tau};
  ref.v_ref = active && t >= seg->t0 ? seg->v : Eigen::Vector3d::Zero();
  ref.psi_ref = seg->psi;
  return ref;
}

/// Everything the closed loop needs, computed once per parameter set.
struct Autopilot {
  HelicopterParams params;
  TrimPoint trim;
  LinearPlant plant;
  OutputWeights weights;
  InnerLoopDesign inner;
  ObserverDesign observer;
  OuterGains outer;
  PidGains pid;
};

inline std::vector<std::complex<double>> default_observer_poles() {
  return {{-50.0, 0.0}, {-50.0, 0.0}, {-60.0, 0.0}};
}

inline Autopilot build_autopilot(const HelicopterParams& params,
                                 const OutputWeights& weights = OutputWeights::reference(),
                                 const OuterGains& outer = {}, const PidGains& pid = {},
                                 const std::vector<std::complex<double>>& poles =
                                     default_observer_poles(),
                                 double gamma_margin = 0.05) {
  Autopilot ap;
  ap.params = params;
  ap.trim = find_trim(params);
  ap.plant = linearize(params, ap.trim);
  ap.weights = weights;
  ap.inner = synthesize_inner_loop(ap.plant, weights, 1e-4, gamma_margin);
  ap.observer = design_reduced_observer(ap.plant, poles);
  ap.outer = outer;
  ap.pid = pid;
  return ap;
}

struct LogRow {
  double t = 0.0;
  StateVector x = StateVector::Zero();
  ControlInputs u;
  WindVector wind;
  EulerAngles att_ref;
  Eigen::Vector3d estimate = Eigen::Vector3d::Zero();  // a_s, b_s, tail command
  Eigen::Vector3d v_ref = Eigen::Vector3d::Zero();     // NED reference velocity
  NedPosition p_ref;
  unsigned saturation = 0;
};

struct ScenarioLog {
  std::vector<LogRow> rows;
};

struct SegmentMetrics {
  int index = 0;
  double t0 = 0.0, t1 = 0.0;
  bool hover = true;
  double mean_abs_vz_err = 0.0;   // whole segment
  double max_horizontal = 0.0;    // after settling
  double max_altitude_err = 0.0;  // after settling
  Eigen::Vector3d max_vel_err = Eigen::Vector3d::Zero();  // after settling
};

struct MetricsReport {
  double max_phi_err_deg = 0.0;
  double max_theta_err_deg = 0.0;
  Eigen::Vector3d rms_vel_err = Eigen::Vector3d::Zero();
  Eigen::Vector3d max_vel_err = Eigen::Vector3d::Zero();
  double horizontal_envelope = 0.0;
  double altitude_envelope = 0.0;
  std::vector<SegmentMetrics> segments;

  double max_attitude_err_deg() const { return std::max(max_phi_err_deg, max_theta_err_deg); }

  /// Scalar metrics in a fixed order (report and comparison tables).
  std::vector<std::pair<std::string, double>> named() const {
    return {{"max_phi_err_deg", max_phi_err_deg},
            {"max_theta_err_deg", max_theta_err_deg},
            {"rms_vx_err", rms_vel_err.x()},
            {"rms_vy_err", rms_vel_err.y()},
            {"rms_vz_err", rms_vel_err.z()},
            {"max_vx_err", max_vel_err.x()},
            {"max_vy_err", max_vel_err.y()},
            {"max_vz_err", max_vel_err.z()},
            {"horizontal_envelope", horizontal_envelope},
            {"altitude_envelope", altitude_envelope}};
  }
};

/// True when `t` lies outside every settling window (run start and each
/// reference-segment boundary).
inline bool settled(const ScenarioConfig& cfg, double t) {
  if (t < cfg.settle_time) return false;
  for (const auto& s : cfg.references) {
    if (t >= s.t0 && t < s.t0 + cfg.settle_time) return false;
  }
  return true;
}

inline Eigen::Vector3d row_ned_velocity(const LogRow& r) {
  return ned_velocity(FullState::from_vector(r.x));
}

inline MetricsReport compute_metrics(const ScenarioConfig& cfg, const ScenarioLog& log) {
  MetricsReport m;
  Eigen::Vector3d sumsq = Eigen::Vector3d::Zero();
  long count = 0;
  constexpr double kDeg = 180.0 / std::numbers::pi;
  for (const auto& r : log.rows) {
    if (!settled(cfg, r.t)) continue;
    ++count;
    m.max_phi_err_deg = std::max(m.max_phi_err_deg, std::abs(r.x[idx::phi] - r.att_ref.phi) * kDeg);
    m.max_theta_err_deg =
        std::max(m.max_theta_err_deg, std::abs(r.x[idx::theta] - r.att_ref.theta) * kDeg);
    const Eigen::Vector3d ve = row_ned_velocity(r) - r.v_ref;
    sumsq += ve.cwiseAbs2();
    m.max_vel_err = m.max_vel_err.cwiseMax(ve.cwiseAbs());
    m.horizontal_envelope =
        std::max(m.horizontal_envelope, std::hypot(r.x[idx::pn] - r.p_ref.pn,
                                                   r.x[idx::pe] - r.p_ref.pe));
    m.altitude_envelope = std::max(m.altitude_envelope, std::abs(r.x[idx::pd] - r.p_ref.pd));
  }
  if (count > 0) m.rms_vel_err = (sumsq / static_cast<double>(count)).cwiseSqrt();

  for (std::size_t i = 0; i < cfg.references.size(); ++i) {
    const auto& s = cfg.references[i];
    SegmentMetrics sm;
    sm.index = static_cast<int>(i);
    sm.t0 = s.t0;
    sm.t1 = s.t1;
    sm.hover = s.is_hover();
    double vz_sum = 0.0;
    long vz_n = 0;
    for (const auto& r : log.rows) {
      if (r.t < s.t0 || r.t >= s.t1) continue;
      const Eigen::Vector3d ve = row_ned_velocity(r) - r.v_ref;
      vz_sum += std::abs(ve.z());
      ++vz_n;
      if (!settled(cfg, r.t)) continue;
      sm.max_vel_err = sm.max_vel_err.cwiseMax(ve.cwiseAbs());
      sm.max_horizontal = std::max(
          sm.max_horizontal, std::hypot(r.x[idx::pn] - r.p_ref.pn, r.x[idx::pe] - r.p_ref.pe));
      sm.max_altitude_err = std::max(sm.max_altitude_err, std::abs(r.x[idx::pd] - r.p_ref.pd));
    }
    if (vz_n > 0) sm.mean_abs_vz_err = vz_sum / static_cast<double>(vz_n);
    m.segments.push_back(sm);
  }
  return m;
}

struct ScenarioResult {
  ScenarioLog log;
  MetricsReport metrics;
};

/// Runs one closed-loop scenario. Per step: sample wind and reference, outer
/// loop (collective, tilt), inner loop (H-infinity law on observer estimates
/// for a_s, b_s and the tail command, or the PID baseline), log, then advance
/// the observer and the plant by RK4 with the commands held.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg, const Autopilot& ap) {
  cfg.validate();
  const HelicopterParams& p = ap.params;
  const TrimPoint& trim = ap.trim;
  const long n = cfg.steps();
  const WindField wind_field(cfg.wind, cfg.duration, cfg.seed);

  StateVector x = trim.x_trim.to_vector() + cfg.initial_offset;
  const LinState x0_lin = to_linear_state(FullState::from_vector(x), trim, p);
  ObserverState obs = observer_initialize(
      ap.observer, unmeasured_part(x0_lin) + cfg.observer_offset, measured_part(x0_lin));
  PidState pid_state;
  const double thrust_bias = hover_thrust_bias(trim.x_trim, trim.u_trim.delta_col, p);

  ScenarioResult res;
  res.log.rows.reserve(static_cast<std::size_t>(n + 1));
  auto deriv = [&p](const StateVector& s, const ControlInputs& u, const WindVector& w) {
    return state_derivative(s, u, w, p);
  };

  for (long k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const FullState s = FullState::from_vector(x);
    const WindVector wind = wind_field.sample(t);
    const PositionReference ref = reference_at(cfg, t);
    const LinState x_lin = to_linear_state(s, trim, p);
    const auto y = measured_part(x_lin);
    obs.estimate = obs.x_obs + ap.observer.k_obs * y;

    LogRow row;
    row.t = t;
    row.x = x;
    row.v_ref = ref.v_ref;
    row.p_ref = ref.p_ref;
    row.wind = wind;
    row.att_ref = {trim.h_out_trim[0], trim.h_out_trim[1], ref.psi_ref};
    if (t >= cfg.attitude_step_time) {
      row.att_ref.phi += cfg.attitude_step[0];
      row.att_ref.theta += cfg.attitude_step[1];
      row.att_ref.psi += cfg.attitude_step[2];
    }

    ControlInputs u = trim.u_trim;
    unsigned sat = 0;
    PidState pid_next = pid_state;
    if (cfg.controller != ControllerKind::open_loop) {
      const AltitudeCommand col = altitude_control(ref, s, ap.outer, p, thrust_bias);
      u.delta_col = col.delta_col;
      if (col.saturated) sat |= sat_col;
      if (!cfg.attitude_hold) {
        const TiltCommand tilt = horizontal_control(ref, s, ap.outer);
        row.att_ref.phi += tilt.phi_ref;
        row.att_ref.theta += tilt.theta_ref;
        if (tilt.saturated) sat |= sat_tilt;
      }
      const Eigen::Vector3d att_ref(row.att_ref.phi, row.att_ref.theta, row.att_ref.psi);
      Eigen::Vector3d cmd;
      if (cfg.controller == ControllerKind::hinf) {
        LinState x_used = x_lin;
        for (int i = 0; i < 3; ++i) x_used[lin::unmeasured[i]] = obs.estimate[i];
        const InnerLoopCommand inner = control_law(ap.inner.gains, x_used, att_ref);
        cmd = inner.u;
        sat |= inner.saturation;
      } else {
        const PidOutput out = pid_attitude_controller(ap.pid, pid_state, s.attitude, s.rates,
                                                      row.att_ref, trim, cfg.dt);
        cmd = out.u;
        pid_next = out.next;
      }
      u.delta_lat = cmd[0];
      u.delta_lon = cmd[1];
      u.delta_ped = cmd[2];
    }
    // Clamps that bind on the forwarded commands.
    for (int i = 0; i < 3; ++i) {
      const double v = u.cyclic_pedal()[i];
      if (std::abs(v) >= kInputLimit) sat |= (1u << i);
    }
    if (std::abs(s.flap.a_s) >= p.flap_limit || std::abs(s.flap.b_s) >= p.flap_limit) {
      sat |= sat_flap;
    }
    row.u = u;
    const double tail_trim = tail_command_state(trim.x_trim, p);
    row.estimate << trim.x_trim.flap.a_s + obs.estimate[0], trim.x_trim.flap.b_s + obs.estimate[1],
        tail_trim + obs.estimate[2] + p.kp_g * p.ka_g * u.delta_ped;
    row.saturation = sat;
    res.log.rows.push_back(row);
    if (k == n) break;

    const Eigen::Vector3d du = u.cyclic_pedal() - trim.u_trim.cyclic_pedal();
    obs = observer_step(ap.observer, obs, y, du, cfg.dt);
    x = rk4_step(deriv, x, u, wind, cfg.dt, k);
    x[idx::a_s] = std::clamp(x[idx::a_s], -p.flap_limit, p.flap_limit);
    x[idx::b_s] = std::clamp(x[idx::b_s], -p.flap_limit, p.flap_limit);
    pid_state = pid_next;
  }
  res.metrics = compute_metrics(cfg, res.log);
  return res;
}

struct Comparison {
  MetricsReport hinf;
  MetricsReport pid;
  std::vector<std::pair<std::string, std::optional<double>>> ratios;  // hinf / pid
};

inline Comparison compare_metrics(const MetricsReport& a, const MetricsReport& b) {
  Comparison c;
  c.hinf = a;
  c.pid = b;
  const auto na = a.named(), nb = b.named();
  for (std::size_t i = 0; i < na.size(); ++i) {
    std::optional<double> r;
    if (std::abs(nb[i].second) > 1e-12) r = na[i].second / nb[i].second;
    c.ratios.emplace_back(na[i].first, r);
  }
  return c;
}

inline Comparison compare_controllers(const ScenarioConfig& cfg, const Autopilot& ap) {
  ScenarioConfig a = cfg, b = cfg;
  a.controller = ControllerKind::hinf;
  b.controller = ControllerKind::pid;
  return compare_metrics(run_scenario(a, ap).metrics, run_scenario(b, ap).metrics);
}

}  // namespace heli
