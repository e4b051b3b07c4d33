#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace heli {
namespace {

using std::numbers::pi;

TEST(Rotation, ZeroAttitudeIsIdentity) {
  EXPECT_TRUE(rotation_body_to_ned({0, 0, 0}).isApprox(Eigen::Matrix3d::Identity(), 0.0));
}

TEST(Rotation, QuarterRollMapsBodyYToNedDown) {
  const Eigen::Vector3d v = rotation_body_to_ned({pi / 2, 0, 0}) * Eigen::Vector3d::UnitY();
  EXPECT_NEAR(v.x(), 0.0, 1e-15);
  EXPECT_NEAR(v.y(), 0.0, 1e-15);
  EXPECT_NEAR(v.z(), 1.0, 1e-15);
}

TEST(Rotation, HoverAttitudeMatchesZyxComposition) {
  const double phi = 0.0287, theta = 0.0011;
  const Eigen::Matrix3d m = rotation_body_to_ned({phi, theta, 0});
  // R = Rz(psi) Ry(theta) Rx(phi), composed independently.
  const Eigen::Matrix3d composed =
      (Eigen::AngleAxisd(0.0, Eigen::Vector3d::UnitZ()) *
       Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitY()) *
       Eigen::AngleAxisd(phi, Eigen::Vector3d::UnitX()))
          .toRotationMatrix();
  EXPECT_LT(testing::max_abs(m * m.transpose() - Eigen::Matrix3d::Identity()), 1e-15);
  EXPECT_NEAR(m(2, 2), std::cos(phi) * std::cos(theta), 1e-15);
  EXPECT_LT(testing::max_abs(m - composed), 1e-15);
}

TEST(Rotation, OrthonormalForRandomAttitudes) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(-pi, pi), pitch(-1.5, 1.5);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Matrix3d r = rotation_body_to_ned({ang(rng), pitch(rng), ang(rng)});
    ASSERT_LT(testing::max_abs(r * r.transpose() - Eigen::Matrix3d::Identity()), 1e-12);
    ASSERT_NEAR(r.determinant(), 1.0, 1e-12);
  }
}

TEST(Rotation, SingularPitchRejected) {
  EXPECT_THROW(rotation_body_to_ned({0, pi / 2, 0}), SingularAttitudeError);
  EXPECT_THROW(euler_rates({0, -pi / 2, 0}, {}), SingularAttitudeError);
}

TEST(EulerRates, LevelAttitudePassesRatesThrough) {
  const EulerAngles d = euler_rates({0, 0, 0}, {0.1, -0.2, 0.3});
  EXPECT_DOUBLE_EQ(d.phi, 0.1);
  EXPECT_DOUBLE_EQ(d.theta, -0.2);
  EXPECT_DOUBLE_EQ(d.psi, 0.3);
}

TEST(EulerRates, RolledPitchRate) {
  const EulerAngles d = euler_rates({pi / 4, 0, 0}, {0, 1, 0});
  EXPECT_NEAR(d.phi, 0.0, 1e-15);
  EXPECT_NEAR(d.theta, std::cos(pi / 4), 1e-15);
  EXPECT_NEAR(d.psi, std::sin(pi / 4), 1e-15);
}

TEST(EulerRates, ZeroRates) {
  const EulerAngles d = euler_rates({0.3, -0.4, 1.0}, {0, 0, 0});
  EXPECT_EQ(d.phi, 0.0);
  EXPECT_EQ(d.theta, 0.0);
  EXPECT_EQ(d.psi, 0.0);
}

TEST(FlapCoupling, UnitRatio) {
  HelicopterParams p;
  p.gamma_mr = 4.0;
  p.omega_mr = 10.0;
  p.i_beta = 0.5;
  p.k_beta = 4.0 * 100.0 * 0.5 / 8.0;
  EXPECT_DOUBLE_EQ(flap_coupling(p), 1.0);
}

TEST(FlapCoupling, TeeteringRotorHasNone) {
  HelicopterParams p;
  p.k_beta = 0.0;
  EXPECT_EQ(flap_coupling(p), 0.0);
}

TEST(FlapCoupling, DefaultParams) {
  const HelicopterParams p;
  EXPECT_NEAR(flap_coupling(p), 8.0 * 140.0 / (5.0 * 167.0 * 167.0 * 0.05), 1e-15);
}

TEST(FlapCoupling, LateralCoefficientIsNegated) {
  const HelicopterParams p;
  const double a_bs = flap_coupling(p);
  const FlapState from_b = flap_derivatives({0, 1}, {}, 0, 0, p);
  const FlapState from_a = flap_derivatives({1, 0}, {}, 0, 0, p);
  EXPECT_EQ(from_b.a_s, a_bs);
  EXPECT_EQ(from_a.b_s, -a_bs);
}

TEST(FlapDerivatives, EquilibriumAtZero) {
  const FlapState d = flap_derivatives({}, {}, 0, 0, HelicopterParams{});
  EXPECT_EQ(d.a_s, 0.0);
  EXPECT_EQ(d.b_s, 0.0);
}

TEST(FlapDerivatives, PitchRateEntersLongitudinalOnly) {
  const FlapState d = flap_derivatives({}, {0, 1, 0}, 0, 0, HelicopterParams{});
  EXPECT_DOUBLE_EQ(d.a_s, -1.0);
  EXPECT_EQ(d.b_s, 0.0);
}

TEST(FlapDerivatives, SteadyStateEqualsBladePitch) {
  HelicopterParams p;
  p.k_beta = 0.0;
  const double dlon = 0.4;
  const double theta_as = p.k_lon * dlon;
  const FlapState d = flap_derivatives({theta_as, 0}, {}, 0, dlon, p);
  EXPECT_NEAR(d.a_s, 0.0, 1e-15);
  // Scaling the flap by tau instead leaves a nonzero rate.
  EXPECT_GT(std::abs(flap_derivatives({p.tau_mr * theta_as, 0}, {}, 0, dlon, p).a_s), 0.1);
}

TEST(YawGyro, ZeroErrorHoldsIntegrator) {
  const YawGyroOutput out = yaw_gyro_output({0.25}, 0.0, 0.0, HelicopterParams{});
  EXPECT_EQ(out.delta_ped_prime, 0.25);
  EXPECT_EQ(out.xi_dot, 0.0);
}

TEST(YawGyro, ProportionalPath) {
  HelicopterParams p;
  p.kp_g = 2.0;
  p.ka_g = 1.0;
  EXPECT_DOUBLE_EQ(yaw_gyro_output({0.0}, 0.1, 0.0, p).delta_ped_prime, 0.2);
}

TEST(YawGyro, PedalStepRampsIntegrator) {
  const HelicopterParams p;
  const double dped = 0.05;
  Eigen::Matrix<double, 1, 1> xi = Eigen::Matrix<double, 1, 1>::Zero();
  auto f = [&](const Eigen::Matrix<double, 1, 1>& x) {
    return Eigen::Matrix<double, 1, 1>(yaw_gyro_output({x[0]}, dped, 0.0, p).xi_dot);
  };
  const double dt = 0.01;
  for (int k = 0; k < 100; ++k) xi = rk4_integrate(f, xi, dt);
  EXPECT_NEAR(xi[0], p.ki_g * p.ka_g * dped * 1.0, 1e-12);
}

FullState hover_state() { return FullState{}; }

ControlInputs hover_collective(const HelicopterParams& p) {
  ControlInputs u;
  u.delta_col = (p.m * p.g - p.thrust_trim) / p.k_col;
  return u;
}

TEST(Forces, HoverBalance) {
  const HelicopterParams p;
  const ForceMoment fm = forces_and_moments(hover_state(), hover_collective(p), {}, p);
  EXPECT_LT(fm.f.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forces, LongitudinalFlapTilt) {
  const HelicopterParams p;
  FullState s = hover_state();
  s.flap.a_s = 0.01;
  const ControlInputs u = hover_collective(p);
  const double t = p.m * p.g;
  const ForceMoment fm = forces_and_moments(s, u, {}, p);
  EXPECT_NEAR(fm.tau.y(), (p.k_beta + t * p.h_mr) * 0.01, 1e-12);
  EXPECT_NEAR(fm.f.x(), -t * std::sin(0.01), 1e-12);
}

TEST(Forces, DragOpposesRelativeWind) {
  HelicopterParams p;
  p.dx = 1.7;
  const ForceMoment fm = forces_and_moments(hover_state(), {}, {1.0, 0, 0}, p);
  EXPECT_NEAR(fm.f.x(), p.dx, 1e-12);
}

TEST(StateDerivative, VanishesAtTrim) {
  const HelicopterParams p;
  const TrimPoint t = find_trim(p);
  const StateVector d = state_derivative(t.x_trim, t.u_trim, {}, p);
  EXPECT_LT(d.tail<12>().norm(), 1e-8);
}

TEST(StateDerivative, LevelPositionRateIsBodyVelocity) {
  const HelicopterParams p;
  FullState s;
  s.velocity = {1.5, -0.5, 0.25};
  const StateVector d = state_derivative(s, {}, {}, p);
  EXPECT_DOUBLE_EQ(d[idx::pn], 1.5);
  EXPECT_DOUBLE_EQ(d[idx::pe], -0.5);
  EXPECT_DOUBLE_EQ(d[idx::pd], 0.25);
}

TEST(StateDerivative, LevelYawRateDrivesHeading) {
  FullState s;
  s.rates.r = 0.7;
  EXPECT_DOUBLE_EQ(state_derivative(s, {}, {}, HelicopterParams{})[idx::psi], 0.7);
}

TEST(StateDerivative, ClampsInputs) {
  const HelicopterParams p;
  const FullState s;
  const StateVector a = state_derivative(s, {3.0, -2.0, 5.0, 9.0}, {}, p);
  const StateVector b = state_derivative(s, {1.0, -1.0, 1.0, 1.0}, {}, p);
  EXPECT_EQ(a, b);
}

TEST(StateDerivative, TranslationAndHeadingInvariant) {
  const HelicopterParams p;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    StateVector x;
    for (int i = 0; i < kStateDim; ++i) x[i] = 0.2 * u(rng);
    const ControlInputs in{0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng)};
    const WindVector w{u(rng), u(rng), u(rng)};
    StateVector shifted = x;
    shifted[idx::pn] += 100.0 * u(rng);
    shifted[idx::pe] += 100.0 * u(rng);
    shifted[idx::psi] += 3.0 * u(rng);
    const StateVector d0 = state_derivative(x, in, w, p);
    const StateVector d1 = state_derivative(shifted, in, w, p);
    EXPECT_LT((d0.segment<3>(idx::vx) - d1.segment<3>(idx::vx)).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((d0.segment<3>(idx::p) - d1.segment<3>(idx::p)).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((d0.segment<2>(idx::a_s) - d1.segment<2>(idx::a_s)).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(StateDerivative, TorqueFreeAngularMomentumConserved) {
  HelicopterParams p;
  p.thrust_trim = 0.0;
  p.k_beta = 0.0;
  p.q_mr = 0.0;
  p.k_ped = 0.0;
  p.g = 0.0;
  p.lp = p.mq = p.nr = 0.0;
  p.n_v = 0.0;
  p.dx = p.dy = p.dz = 0.0;
  const Eigen::Vector3d j(p.jx, p.jy, p.jz);
  FullState s;
  s.rates = {1.0, 0.05, 0.05};  // spin about the minor axis, stable
  StateVector x = s.to_vector();
  auto momentum = [&](const StateVector& v) {
    return j.cwiseProduct(v.segment<3>(idx::p)).norm();
  };
  const double h0 = momentum(x);
  auto f = [&](const StateVector& v, const ControlInputs& u, const WindVector& w) {
    return state_derivative(v, u, w, p);
  };
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    x = rk4_step(f, x, {}, {}, 1e-3, k);
    worst = std::max(worst, std::abs(momentum(x) - h0));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(StateDerivative, LinearizerPartialsMatchFivePointStencil) {
  const HelicopterParams p;
  const TrimPoint trim = find_trim(p);
  const LinearPlant plant = linearize(p, trim);
  const Eigen::Vector3d zero3 = Eigen::Vector3d::Zero();
  auto stencil = [](auto&& g, double h) -> LinState {
    return (-g(2 * h) + 8 * g(h) - 8 * g(-h) + g(-2 * h)) / (12 * h);
  };
  constexpr double h = 1e-4;
  for (int k = 0; k < kLinStates; ++k) {
    const LinState col = stencil(
        [&](double s) {
          LinState x = LinState::Zero();
          x[k] = s;
          return LinState(linear_coordinates_derivative(x, zero3, zero3, trim, p));
        },
        h);
    for (int i = 0; i < kLinStates; ++i) {
      EXPECT_LT(std::abs(plant.a(i, k) - col[i]) / std::max(1.0, std::abs(col[i])), 1e-5)
          << "A(" << i << "," << k << ")";
    }
  }
  for (int k = 0; k < kLinInputs; ++k) {
    const LinState col = stencil(
        [&](double s) {
          Eigen::Vector3d du = zero3;
          du[k] = s;
          return LinState(linear_coordinates_derivative(LinState::Zero(), du, zero3, trim, p));
        },
        h);
    for (int i = 0; i < kLinStates; ++i) {
      EXPECT_LT(std::abs(plant.b(i, k) - col[i]) / std::max(1.0, std::abs(col[i])), 1e-5)
          << "B(" << i << "," << k << ")";
    }
  }
  for (int k = 0; k < kWindInputs; ++k) {
    const LinState col = stencil(
        [&](double s) {
          Eigen::Vector3d v = zero3;
          v[k] = s;
          return LinState(linear_coordinates_derivative(LinState::Zero(), zero3, v, trim, p));
        },
        h);
    for (int i = 0; i < kLinStates; ++i) {
      EXPECT_LT(std::abs(plant.e(i, k) - col[i]) / std::max(1.0, std::abs(col[i])), 1e-5)
          << "E(" << i << "," << k << ")";
    }
  }
}

TEST(FullStateVector, RoundTrip) {
  StateVector v;
  for (int i = 0; i < kStateDim; ++i) v[i] = 0.1 * (i + 1);
  EXPECT_EQ(FullState::from_vector(v).to_vector(), v);
  EXPECT_EQ(state_labels().size(), static_cast<std::size_t>(kStateDim));
}

}  // namespace
}  // namespace heli
