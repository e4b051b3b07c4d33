#pragma once

// Reduced-order estimator for the unmeasured flap and tail-command states:
//   z_hat = x_obs + K y,   x_obs' = A' x_obs + B' y + H' u.

#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include "heli/trim.hpp"

namespace heli {

class ObserverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ObserverDesign {
  Eigen::Matrix3d a_obs;
  Eigen::Matrix<double, 3, kMeasured> b_obs;
  Eigen::Matrix3d h_obs;
  Eigen::Matrix<double, 3, kMeasured> k_obs;
  std::vector<std::complex<double>> poles;
};

struct ObserverState {
  Eigen::Vector3d x_obs = Eigen::Vector3d::Zero();
  Eigen::Vector3d estimate = Eigen::Vector3d::Zero();
};

/// Measured/unmeasured partition of the 9-state model.
struct PlantPartition {
  Eigen::Matrix<double, kMeasured, kMeasured> a_yy;
  Eigen::Matrix<double, kMeasured, 3> a_yz;
  Eigen::Matrix<double, 3, kMeasured> a_zy;
  Eigen::Matrix3d a_zz;
  Eigen::Matrix<double, kMeasured, kLinInputs> b_y;
  Eigen::Matrix<double, 3, kLinInputs> b_z;
};

inline PlantPartition partition(const LinearPlant& plant) {
  PlantPartition p;
  for (int i = 0; i < kMeasured; ++i) {
    for (int j = 0; j < kMeasured; ++j) p.a_yy(i, j) = plant.a(lin::measured[i], lin::measured[j]);
    for (int j = 0; j < 3; ++j) p.a_yz(i, j) = plant.a(lin::measured[i], lin::unmeasured[j]);
    p.b_y.row(i) = plant.b.row(lin::measured[i]);
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < kMeasured; ++j) p.a_zy(i, j) = plant.a(lin::unmeasured[i], lin::measured[j]);
    for (int j = 0; j < 3; ++j) p.a_zz(i, j) = plant.a(lin::unmeasured[i], lin::unmeasured[j]);
    p.b_z.row(i) = plant.b.row(lin::unmeasured[i]);
  }
  return p;
}

inline Eigen::Matrix<double, kMeasured, 1> measured_part(const LinState& x) {
  Eigen::Matrix<double, kMeasured, 1> y;
  for (int i = 0; i < kMeasured; ++i) y[i] = x[lin::measured[i]];
  return y;
}

inline Eigen::Vector3d unmeasured_part(const LinState& x) {
  return {x[lin::unmeasured[0]], x[lin::unmeasured[1]], x[lin::unmeasured[2]]};
}

namespace detail {

/// Real matrix whose eigenvalues are `poles` (real entries on the diagonal,
/// conjugate pairs as 2x2 rotation-scaling blocks).
inline Eigen::Matrix3d pole_matrix(const std::vector<std::complex<double>>& poles) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  std::vector<bool> used(poles.size(), false);
  int k = 0;
  for (std::size_t i = 0; i < poles.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    const auto& pl = poles[i];
    if (pl.imag() == 0.0) {
      m(k, k) = pl.real();
      ++k;
      continue;
    }
    std::size_t j = i + 1;
    for (; j < poles.size(); ++j)
      if (!used[j] && poles[j] == std::conj(pl)) break;
    if (j == poles.size()) throw ObserverError("observer poles are not closed under conjugation");
    used[j] = true;
    m(k, k) = pl.real();
    m(k + 1, k + 1) = pl.real();
    m(k, k + 1) = std::abs(pl.imag());
    m(k + 1, k) = -std::abs(pl.imag());
    k += 2;
  }
  return m;
}

}  // namespace detail

/// Places eig(A_zz - L A_yz) at `poles`. Measurements here include p, q and r,
/// which respond directly to b_s, a_s and the tail command, so A_yz normally
/// has full column rank and L follows from a least-squares solve; otherwise a
/// single-output Ackermann placement on a fixed output combination is used.
inline ObserverDesign design_reduced_observer(const LinearPlant& plant,
                                              const std::vector<std::complex<double>>& poles) {
  if (poles.size() != 3) throw ObserverError("reduced observer needs exactly 3 poles");
  for (const auto& pl : poles) {
    if (!(pl.real() < 0.0)) throw ObserverError("observer poles must have negative real part");
  }
  const Eigen::Matrix3d target = detail::pole_matrix(poles);
  const PlantPartition part = partition(plant);

  Eigen::Matrix<double, 3 * kMeasured, 3> obs;
  obs << part.a_yz, part.a_yz * part.a_zz, part.a_yz * part.a_zz * part.a_zz;
  if (Eigen::FullPivLU<Eigen::Matrix<double, 3 * kMeasured, 3>>(obs).rank() < 3) {
    throw ObserverError("(A_zz, A_yz) is not observable");
  }

  Eigen::Matrix<double, 3, kMeasured> l;
  Eigen::ColPivHouseholderQR<Eigen::Matrix<double, kMeasured, 3>> qr(part.a_yz);
  if (qr.rank() == 3) {
    // L A_yz = A_zz - target  <=>  A_yz' L' = (A_zz - target)'.
    const Eigen::Matrix3d rhs = (part.a_zz - target).transpose();
    Eigen::Matrix<double, kMeasured, 3> lt =
        part.a_yz.transpose().completeOrthogonalDecomposition().solve(rhs);
    l = lt.transpose();
  } else {
    // Collapse outputs with a fixed combination and place by Ackermann.
    const Eigen::Matrix<double, 1, kMeasured> mix =
        Eigen::Matrix<double, 1, kMeasured>::LinSpaced(1.0, 2.0);
    const Eigen::RowVector3d c1 = mix * part.a_yz;
    Eigen::Matrix3d o;
    o << c1, c1 * part.a_zz, c1 * part.a_zz * part.a_zz;
    Eigen::FullPivLU<Eigen::Matrix3d> o_lu(o);
    if (!o_lu.isInvertible()) throw ObserverError("pole placement failed: no cyclic output");
    // Characteristic polynomial of the target.
    const double c2 = -target.trace();
    const double c1p = 0.5 * (target.trace() * target.trace() - (target * target).trace());
    const double c0 = -target.determinant();
    const Eigen::Matrix3d az = part.a_zz;
    const Eigen::Matrix3d phi_a =
        az * az * az + c2 * az * az + c1p * az + c0 * Eigen::Matrix3d::Identity();
    const Eigen::Vector3d l1 = phi_a * o_lu.solve(Eigen::Vector3d(0, 0, 1));
    l = l1 * mix;
  }

  ObserverDesign des;
  des.k_obs = l;
  des.a_obs = part.a_zz - l * part.a_yz;
  des.b_obs = part.a_zy - l * part.a_yy + des.a_obs * l;
  des.h_obs = part.b_z - l * part.b_y;
  des.poles = poles;

  Eigen::EigenSolver<Eigen::Matrix3d> es(des.a_obs, false);
  for (const auto& pl : poles) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) best = std::min(best, std::abs(es.eigenvalues()[i] - pl));
    if (best > 1e-6 * std::max(1.0, std::abs(pl))) {
      throw ObserverError("pole placement failed: eigenvalue mismatch " + std::to_string(best));
    }
  }
  return des;
}

inline ObserverState observer_initialize(const ObserverDesign& des,
                                         const Eigen::Vector3d& estimate,
                                         const Eigen::Matrix<double, kMeasured, 1>& y) {
  ObserverState s;
  s.x_obs = estimate - des.k_obs * y;
  s.estimate = estimate;
  return s;
}

/// One RK4 step of the observer with y and u held over the step.
inline ObserverState observer_step(const ObserverDesign& des, const ObserverState& state,
                                   const Eigen::Matrix<double, kMeasured, 1>& y,
                                   const Eigen::Vector3d& u, double dt,
                                   const std::optional<Eigen::Matrix<double, kMeasured, 1>>& y_next =
                                       std::nullopt) {
  if (!(dt > 0)) throw std::invalid_argument("observer step requires dt > 0");
  const Eigen::Vector3d drive = des.b_obs * y + des.h_obs * u;
  auto f = [&](const Eigen::Vector3d& x) -> Eigen::Vector3d { return des.a_obs * x + drive; };
  const Eigen::Vector3d k1 = f(state.x_obs);
  const Eigen::Vector3d k2 = f(state.x_obs + 0.5 * dt * k1);
  const Eigen::Vector3d k3 = f(state.x_obs + 0.5 * dt * k2);
  const Eigen::Vector3d k4 = f(state.x_obs + dt * k3);
  ObserverState next;
  next.x_obs = state.x_obs + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  next.estimate = next.x_obs + des.k_obs * y_next.value_or(y);
  return next;
}

}  // namespace heli
