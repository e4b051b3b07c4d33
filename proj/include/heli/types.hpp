#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace heli {

class SingularAttitudeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct EulerAngles {
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;
};

struct BodyRates {
  double p = 0.0;
  double q = 0.0;
  double r = 0.0;
};

struct BodyVelocity {
  double vx = 0.0;
  double vy = 0.0;
  double vz = 0.0;
};

struct NedPosition {
  double pn = 0.0;
  double pe = 0.0;
  double pd = 0.0;
  double altitude() const { return -pd; }
};

struct FlapState {
  double a_s = 0.0;
  double b_s = 0.0;
};

struct YawGyroState {
  double xi = 0.0;
};

/// Flat order: pn pe pd | vx vy vz | phi theta psi | p q r | a_s b_s | xi.
/// The gyro tail command is an output of the PI loop, not a stored state.
inline constexpr int kStateDim = 15;
using StateVector = Eigen::Matrix<double, kStateDim, 1>;

namespace idx {
inline constexpr int pn = 0, pe = 1, pd = 2;
inline constexpr int vx = 3, vy = 4, vz = 5;
inline constexpr int phi = 6, theta = 7, psi = 8;
inline constexpr int p = 9, q = 10, r = 11;
inline constexpr int a_s = 12, b_s = 13;
inline constexpr int xi = 14;
}  // namespace idx

inline const std::array<std::string, kStateDim>& state_labels() {
  static const std::array<std::string, kStateDim> labels{
      "pn", "pe", "pd", "vx", "vy", "vz", "phi", "theta",
      "psi", "p", "q", "r", "a_s", "b_s", "xi"};
  return labels;
}

struct FullState {
  NedPosition position;
  BodyVelocity velocity;
  EulerAngles attitude;
  BodyRates rates;
  FlapState flap;
  YawGyroState gyro;

  StateVector to_vector() const {
    StateVector v;
    v << position.pn, position.pe, position.pd, velocity.vx, velocity.vy,
        velocity.vz, attitude.phi, attitude.theta, attitude.psi, rates.p,
        rates.q, rates.r, flap.a_s, flap.b_s, gyro.xi;
    return v;
  }

  static FullState from_vector(const StateVector& v) {
    FullState s;
    s.position = {v[idx::pn], v[idx::pe], v[idx::pd]};
    s.velocity = {v[idx::vx], v[idx::vy], v[idx::vz]};
    s.attitude = {v[idx::phi], v[idx::theta], v[idx::psi]};
    s.rates = {v[idx::p], v[idx::q], v[idx::r]};
    s.flap = {v[idx::a_s], v[idx::b_s]};
    s.gyro = {v[idx::xi]};
    return s;
  }
};

inline constexpr double kInputLimit = 1.0;

inline double clamp_unit(double v) {
  return std::clamp(v, -kInputLimit, kInputLimit);
}

/// Normalized servo commands. Construct through `clamped()` when the values
/// come from a controller.
struct ControlInputs {
  double delta_lat = 0.0;
  double delta_lon = 0.0;
  double delta_ped = 0.0;
  double delta_col = 0.0;

  ControlInputs clamped() const {
    return {clamp_unit(delta_lat), clamp_unit(delta_lon), clamp_unit(delta_ped),
            clamp_unit(delta_col)};
  }
  /// Inner-loop subset (lat, lon, ped) in the linear-model input order.
  Eigen::Vector3d cyclic_pedal() const { return {delta_lat, delta_lon, delta_ped}; }
};

struct WindVector {
  double u_w = 0.0;
  double v_w = 0.0;
  double w_w = 0.0;

  Eigen::Vector3d vec() const { return {u_w, v_w, w_w}; }
  static WindVector from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
};

struct ForceMoment {
  Eigen::Vector3d f = Eigen::Vector3d::Zero();
  Eigen::Vector3d tau = Eigen::Vector3d::Zero();
};

}  // namespace heli
