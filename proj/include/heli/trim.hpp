#pragma once

// Hover trim and numerical linearization onto the 9-state attitude model
// x = [phi, theta, p, q, a_s, b_s, r, dped, psi], u = [dlat, dlon, dped].

#include <array>
#include <cstdint>
#include <random>
#include <string>

#include "heli/dynamics.hpp"

namespace heli {

class TrimError : public std::runtime_error {
 public:
  TrimError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

inline constexpr int kLinStates = 9;
inline constexpr int kLinInputs = 3;
inline constexpr int kWindInputs = 3;
inline constexpr int kMeasured = 6;

using LinState = Eigen::Matrix<double, kLinStates, 1>;

namespace lin {
inline constexpr int phi = 0, theta = 1, p = 2, q = 3, a_s = 4, b_s = 5, r = 6,
                     dped = 7, psi = 8;
/// Rows of x that are measured directly: phi theta p q r psi.
inline constexpr std::array<int, kMeasured> measured{phi, theta, p, q, r, psi};
inline constexpr std::array<int, 3> unmeasured{a_s, b_s, dped};
inline constexpr std::array<int, 3> tracked{phi, theta, psi};
}  // namespace lin

inline const std::array<std::string, kLinStates>& lin_state_labels() {
  static const std::array<std::string, kLinStates> l{
      "phi", "theta", "p", "q", "a_s", "b_s", "r", "dped", "psi"};
  return l;
}
inline const std::array<std::string, kLinInputs>& lin_input_labels() {
  static const std::array<std::string, kLinInputs> l{"dlat", "dlon", "dped"};
  return l;
}
inline const std::array<std::string, kWindInputs>& wind_labels() {
  static const std::array<std::string, kWindInputs> l{"wind_u", "wind_v", "wind_w"};
  return l;
}

struct TrimPoint {
  FullState x_trim;
  ControlInputs u_trim;
  Eigen::Matrix<double, kMeasured, 1> y_trim = Eigen::Matrix<double, kMeasured, 1>::Zero();
  Eigen::Vector3d h_out_trim = Eigen::Vector3d::Zero();
  double residual = 0.0;
  int iterations = 0;
};

struct TrimOptions {
  int max_iterations = 100;
  double tolerance = 1e-12;
};

namespace detail {

// Non-position derivatives that must vanish at hover.
inline constexpr std::array<int, 12> kTrimRows{idx::vx, idx::vy, idx::vz, idx::phi,
                                               idx::theta, idx::psi, idx::p, idx::q,
                                               idx::r, idx::a_s, idx::b_s, idx::xi};
// Rows with a nontrivial dependence on the unknowns.
inline constexpr std::array<int, 8> kTrimSolveRows{idx::vx, idx::vy, idx::vz, idx::p,
                                                   idx::q, idx::r, idx::a_s, idx::b_s};

using TrimUnknowns = Eigen::Matrix<double, 8, 1>;

// Unknown order: dcol, dlat, dlon, xi, phi, theta, a_s, b_s.
inline void unpack_trim(const TrimUnknowns& z, FullState& s, ControlInputs& u) {
  s = FullState{};
  u = ControlInputs{};
  u.delta_col = z[0];
  u.delta_lat = z[1];
  u.delta_lon = z[2];
  s.gyro.xi = z[3];
  s.attitude.phi = z[4];
  s.attitude.theta = z[5];
  s.flap.a_s = z[6];
  s.flap.b_s = z[7];
}

inline TrimUnknowns trim_residual(const TrimUnknowns& z, const HelicopterParams& p) {
  FullState s;
  ControlInputs u;
  unpack_trim(z, s, u);
  const StateVector d = state_derivative(s, u, WindVector{}, p);
  TrimUnknowns r;
  for (int i = 0; i < 8; ++i) r[i] = d[kTrimSolveRows[i]];
  return r;
}

inline double full_trim_residual(const FullState& s, const ControlInputs& u,
                                 const HelicopterParams& p) {
  const StateVector d = state_derivative(s, u, WindVector{}, p);
  double n = 0.0;
  for (int row : kTrimRows) n += d[row] * d[row];
  return std::sqrt(n);
}

}  // namespace detail

/// Damped Newton (Levenberg-Marquardt) on the hover residual, starting from
/// the all-zero guess with collective set for T = m g.
inline TrimPoint find_trim(const HelicopterParams& p, const TrimOptions& opt = {}) {
  p.validate();
  using detail::TrimUnknowns;
  TrimUnknowns z = TrimUnknowns::Zero();
  z[0] = (p.m * p.g - p.thrust_trim) / p.k_col;

  TrimUnknowns res = detail::trim_residual(z, p);
  double norm = res.norm();
  double damping = 1e-8;
  int it = 0;
  for (; it < opt.max_iterations && norm > opt.tolerance; ++it) {
    Eigen::Matrix<double, 8, 8> jac;
    for (int k = 0; k < 8; ++k) {
      const double h = 1e-7 * std::max(1.0, std::abs(z[k]));
      TrimUnknowns zp = z, zm = z;
      zp[k] += h;
      zm[k] -= h;
      jac.col(k) = (detail::trim_residual(zp, p) - detail::trim_residual(zm, p)) / (2 * h);
    }
    const Eigen::Matrix<double, 8, 8> jtj = jac.transpose() * jac;
    const TrimUnknowns jtr = jac.transpose() * res;
    bool improved = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::Matrix<double, 8, 8> lhs = jtj;
      lhs.diagonal().array() += damping * (1.0 + jtj.diagonal().array());
      const TrimUnknowns step = lhs.ldlt().solve(-jtr);
      const TrimUnknowns trial = z + step;
      const TrimUnknowns trial_res = detail::trim_residual(trial, p);
      if (trial_res.allFinite() && trial_res.norm() < norm) {
        z = trial;
        res = trial_res;
        norm = trial_res.norm();
        damping = std::max(damping * 0.1, 1e-14);
        improved = true;
        break;
      }
      damping *= 10.0;
    }
    if (!improved) break;
  }

  TrimPoint t;
  detail::unpack_trim(z, t.x_trim, t.u_trim);
  t.residual = detail::full_trim_residual(t.x_trim, t.u_trim, p);
  t.iterations = it;
  if (!(t.residual < 1e-8)) {
    throw TrimError("trim did not converge after " + std::to_string(it) +
                        " iterations, residual " + std::to_string(t.residual),
                    t.residual);
  }
  const auto& x = t.x_trim;
  t.y_trim << x.attitude.phi, x.attitude.theta, x.rates.p, x.rates.q, x.rates.r,
      x.attitude.psi;
  t.h_out_trim << x.attitude.phi, x.attitude.theta, x.attitude.psi;
  return t;
}

struct LinearPlant {
  Eigen::Matrix<double, kLinStates, kLinStates> a;
  Eigen::Matrix<double, kLinStates, kLinInputs> b;
  Eigen::Matrix<double, kLinStates, kWindInputs> e;
  TrimPoint trim;
};

/// Tail-command coordinate of the linear model. The gyro integrator xi and
/// the command at zero pedal, xi - KP r, differ by a state-only transform, so
/// the 9-state model stays proper; the actual servo command is this value
/// plus KP Ka dped.
inline double tail_command_state(const FullState& s, const HelicopterParams& p) {
  return s.gyro.xi - p.kp_g * s.rates.r;
}

/// Full nonlinear state -> 9-state deviation from trim.
inline LinState to_linear_state(const FullState& s, const TrimPoint& trim,
                                const HelicopterParams& p) {
  const FullState& t = trim.x_trim;
  LinState x;
  x << s.attitude.phi - t.attitude.phi, s.attitude.theta - t.attitude.theta,
      s.rates.p - t.rates.p, s.rates.q - t.rates.q, s.flap.a_s - t.flap.a_s,
      s.flap.b_s - t.flap.b_s, s.rates.r - t.rates.r,
      tail_command_state(s, p) - tail_command_state(t, p),
      s.attitude.psi - t.attitude.psi;
  return x;
}

/// 9-state deviation -> full state with velocity and position held at trim.
inline FullState from_linear_state(const LinState& x, const TrimPoint& trim,
                                   const HelicopterParams& p) {
  FullState s = trim.x_trim;
  s.attitude.phi += x[lin::phi];
  s.attitude.theta += x[lin::theta];
  s.attitude.psi += x[lin::psi];
  s.rates.p += x[lin::p];
  s.rates.q += x[lin::q];
  s.rates.r += x[lin::r];
  s.flap.a_s += x[lin::a_s];
  s.flap.b_s += x[lin::b_s];
  s.gyro.xi = tail_command_state(trim.x_trim, p) + x[lin::dped] + p.kp_g * s.rates.r;
  return s;
}

inline ControlInputs apply_input_deviation(const Eigen::Vector3d& du,
                                           const TrimPoint& trim) {
  ControlInputs u = trim.u_trim;
  u.delta_lat += du[0];
  u.delta_lon += du[1];
  u.delta_ped += du[2];
  return u;
}

/// Nonlinear derivative expressed in the 9-state coordinates.
inline LinState linear_coordinates_derivative(const LinState& x,
                                              const Eigen::Vector3d& du,
                                              const Eigen::Vector3d& wind,
                                              const TrimPoint& trim,
                                              const HelicopterParams& p) {
  const FullState s = from_linear_state(x, trim, p);
  const StateVector d =
      state_derivative(s, apply_input_deviation(du, trim), WindVector::from(wind), p);
  LinState out;
  out << d[idx::phi], d[idx::theta], d[idx::p], d[idx::q], d[idx::a_s],
      d[idx::b_s], d[idx::r], d[idx::xi] - p.kp_g * d[idx::r], d[idx::psi];
  return out;
}

inline LinearPlant linearize(const HelicopterParams& p, const TrimPoint& trim,
                             double step = 1e-5) {
  LinearPlant plant;
  plant.trim = trim;
  const LinState x0 = LinState::Zero();
  const Eigen::Vector3d zero3 = Eigen::Vector3d::Zero();

  const Eigen::Matrix<double, kLinStates, 1> x_scale =
      (Eigen::Matrix<double, kLinStates, 1>() << trim.h_out_trim[0], trim.h_out_trim[1],
       0.0, 0.0, trim.x_trim.flap.a_s, trim.x_trim.flap.b_s, 0.0,
       tail_command_state(trim.x_trim, p), trim.h_out_trim[2])
          .finished()
          .cwiseAbs()
          .cwiseMax(1.0);
  const Eigen::Vector3d u_scale =
      trim.u_trim.cyclic_pedal().cwiseAbs().cwiseMax(1.0);

  for (int k = 0; k < kLinStates; ++k) {
    const double h = step * x_scale[k];
    LinState xp = x0, xm = x0;
    xp[k] += h;
    xm[k] -= h;
    plant.a.col(k) = (linear_coordinates_derivative(xp, zero3, zero3, trim, p) -
                      linear_coordinates_derivative(xm, zero3, zero3, trim, p)) /
                     (2 * h);
  }
  for (int k = 0; k < kLinInputs; ++k) {
    const double h = step * u_scale[k];
    Eigen::Vector3d up = zero3, um = zero3;
    up[k] += h;
    um[k] -= h;
    plant.b.col(k) = (linear_coordinates_derivative(x0, up, zero3, trim, p) -
                      linear_coordinates_derivative(x0, um, zero3, trim, p)) /
                     (2 * h);
  }
  for (int k = 0; k < kWindInputs; ++k) {
    const double h = step;
    Eigen::Vector3d vp = zero3, vm = zero3;
    vp[k] += h;
    vm[k] -= h;
    plant.e.col(k) = (linear_coordinates_derivative(x0, zero3, vp, trim, p) -
                      linear_coordinates_derivative(x0, zero3, vm, trim, p)) /
                     (2 * h);
  }
  return plant;
}

/// Worst relative mismatch between the nonlinear derivative and A x + B u + E v
/// over 100 seeded perturbations of magnitude `scale`.
inline double verify_linearization(const HelicopterParams& p, const LinearPlant& plant,
                                   double scale, std::uint64_t seed = 7) {
  if (!(scale > 0.0 && scale <= 1e-2)) {
    throw std::invalid_argument("perturbation scale must lie in (0, 1e-2]");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const LinState f0 = linear_coordinates_derivative(
      LinState::Zero(), Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), plant.trim, p);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    LinState x;
    Eigen::Vector3d u, v;
    for (int i = 0; i < kLinStates; ++i) x[i] = scale * unit(rng);
    for (int i = 0; i < 3; ++i) u[i] = scale * unit(rng);
    for (int i = 0; i < 3; ++i) v[i] = scale * unit(rng);
    const LinState nonlinear =
        linear_coordinates_derivative(x, u, v, plant.trim, p) - f0;
    const LinState linear = plant.a * x + plant.b * u + plant.e * v;
    const double denom = std::max(linear.norm(), 1e-300);
    worst = std::max(worst, (nonlinear - linear).norm() / denom);
  }
  return worst;
}

}  // namespace heli
