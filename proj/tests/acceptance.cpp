// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances are fixed here and never relaxed at run time.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "heli/heli.hpp"

namespace {

using namespace heli;
using Eigen::MatrixXd;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAILED]");
  }
};

std::string num(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct ScalarPlant {
  MatrixXd a{{-1.0}}, b{{1.0}}, c{{1.0}, {0.0}}, d{{0.0}, {1.0}}, e;
  explicit ScalarPlant(double eg) : e{{eg}} {}
};

const Autopilot& autopilot() {
  static const Autopilot ap = build_autopilot(HelicopterParams{});
  return ap;
}

MatrixXd game_riccati_lhs(const MatrixXd& p, const MatrixXd& a, const MatrixXd& b,
                          const MatrixXd& c, const MatrixXd& d, const MatrixXd& e, double g) {
  const MatrixXd k = p * b + c.transpose() * d;
  return a.transpose() * p + p * a + c.transpose() * c + p * e * e.transpose() * p / (g * g) -
         k * (d.transpose() * d).inverse() * k.transpose();
}

Outcome a1() {
  Outcome o;
  const auto t0 = Clock::now();
  const ScalarPlant s0(0.0), s1(1.0);
  const RiccatiOutcome r0 = solve_riccati(s0.a, s0.b, s0.c, s0.d, s0.e, 10.0);
  const RiccatiOutcome r1 = solve_riccati(s1.a, s1.b, s1.c, s1.d, s1.e, 1.0);
  const double e0 = r0.feasible() ? std::abs(r0.solution->p(0, 0) - (std::sqrt(2.0) - 1.0)) : 1.0;
  const double e1 = r1.feasible() ? std::abs(r1.solution->p(0, 0) - 0.5) : 1.0;
  o.check(e0 <= 1e-10, "scalar p=sqrt2-1 err " + num(e0));
  o.check(e1 <= 1e-10, "scalar p=0.5 err " + num(e1));

  const Autopilot& ap = autopilot();
  const auto& out = ap.inner.outputs;
  const double g = ap.inner.gains.gamma;
  const RiccatiOutcome full =
      solve_riccati(ap.plant.a, ap.plant.b, out.c, out.d, ap.plant.e, g);
  if (!full.feasible()) {
    o.check(false, "9-state Riccati infeasible: " + full.detail);
    return o;
  }
  const MatrixXd& p = full.solution->p;
  const double pmax = p.cwiseAbs().maxCoeff();
  const double res =
      game_riccati_lhs(p, ap.plant.a, ap.plant.b, out.c, out.d, ap.plant.e, g).cwiseAbs().maxCoeff();
  o.check(res < 1e-8 * (1.0 + pmax), "9-state residual " + num(res) + " < " + num(1e-8 * (1 + pmax)));
  const double asym = (p - p.transpose()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(p);
  o.check(asym <= 1e-10 && eig.eigenvalues().minCoeff() > -1e-10,
          "P symmetric PSD (min eig " + num(eig.eigenvalues().minCoeff()) + ")");
  const SynthesisResult syn =
      compute_gains(*full.solution, ap.plant.a, ap.plant.b, out.c, out.d, {0, 1, 8});
  Eigen::EigenSolver<MatrixXd> cl(ap.plant.a + ap.plant.b * syn.f, false);
  const double slowest = cl.eigenvalues().real().maxCoeff();
  o.check(slowest < 0.0, "A+BF Hurwitz (max Re " + num(slowest) + ")");
  const double runtime = seconds_since(t0);
  o.check(runtime < 1.0, "runtime " + num(runtime, 3) + " s < 1 s");
  return o;
}

Outcome a2() {
  Outcome o;
  const auto t0 = Clock::now();
  const ScalarPlant s(1.0);
  const GammaSearchResult r = gamma_star(s.a, s.b, s.c, s.d, s.e, 1e-6);
  const double err = std::abs(r.gamma_star - 1.0 / std::sqrt(2.0));
  o.check(err <= 1e-4, "scalar gamma* err " + num(err));

  const LinearPlant& plant = autopilot().plant;
  const ControlledOutputMap out = build_output_map(OutputWeights::reference());
  const InnerLoopDesign des = synthesize_inner_loop(plant, OutputWeights::reference());
  bool seen = false, monotone = true;
  for (int i = 0; i < 10; ++i) {
    const double g = des.search.gamma_star * std::pow(10.0, -0.5 + i * (1.5 / 9.0));
    const bool ok = solve_riccati(plant.a, plant.b, out.c, out.d, plant.e, g).feasible();
    if (seen && !ok) monotone = false;
    seen = seen || ok;
  }
  o.check(seen && monotone, "monotone feasibility ladder");
  const double nu = closed_loop_hinf_norm(plant, des.outputs, des.gains);
  o.check(nu <= des.gains.gamma * 1.001,
          "closed-loop norm " + num(nu) + " <= gamma*1.001 = " + num(des.gains.gamma * 1.001) +
              " (gamma* " + num(des.search.gamma_star) + ")");
  const double runtime = seconds_since(t0);
  o.check(runtime < 10.0, "runtime " + num(runtime, 3) + " s < 10 s");
  return o;
}

ScenarioResult run(ScenarioConfig cfg, ControllerKind k, double dt = 0.002) {
  cfg.controller = k;
  cfg.dt = dt;
  return run_scenario(cfg, autopilot());
}

// Every quantity the A3-A6 checks read, in one vector for the dt study.
struct FlightMetrics {
  double hinf_att = 0, pid_att = 0;
  double vz = 0, vx = 0, vy = 0;
  std::vector<double> hover_horizontal, hover_altitude;
  double climb_mean_vz = 0;

  std::vector<std::pair<std::string, double>> flat() const {
    std::vector<std::pair<std::string, double>> v{{"A3 hinf att", hinf_att},
                                                  {"A3 pid att", pid_att},
                                                  {"A4 vz", vz},
                                                  {"A4 vx", vx},
                                                  {"A4 vy", vy},
                                                  {"A6 climb", climb_mean_vz}};
    for (std::size_t i = 0; i < hover_horizontal.size(); ++i) {
      v.emplace_back("A5 horiz seg" + std::to_string(i), hover_horizontal[i]);
      v.emplace_back("A5 alt seg" + std::to_string(i), hover_altitude[i]);
    }
    return v;
  }
};

FlightMetrics flight_metrics(double dt) {
  FlightMetrics m;
  m.hinf_att = run(attitude_gust(), ControllerKind::hinf, dt).metrics.max_attitude_err_deg();
  m.pid_att = run(attitude_gust(), ControllerKind::pid, dt).metrics.max_attitude_err_deg();
  const MetricsReport climb = run(paper_hover_climb(), ControllerKind::hinf, dt).metrics;
  m.vx = climb.max_vel_err.x();
  m.vy = climb.max_vel_err.y();
  m.vz = climb.max_vel_err.z();
  for (const auto& s : climb.segments) {
    if (s.hover) {
      m.hover_horizontal.push_back(s.max_horizontal);
      m.hover_altitude.push_back(s.max_altitude_err);
    } else {
      m.climb_mean_vz = s.mean_abs_vz_err;
    }
  }
  return m;
}

const FlightMetrics& nominal() {
  static const FlightMetrics m = flight_metrics(0.002);
  return m;
}

Outcome a3() {
  Outcome o;
  const auto t0 = Clock::now();
  const double h = run(attitude_gust(), ControllerKind::hinf).metrics.max_attitude_err_deg();
  const double p = run(attitude_gust(), ControllerKind::pid).metrics.max_attitude_err_deg();
  const double runtime = seconds_since(t0);
  o.check(h <= 0.5 * p, "hinf " + num(h) + " deg <= 0.5 x pid " + num(p) + " deg (ratio " +
                            num(h / p, 3) + ")");
  o.check(h <= 3.0, "hinf " + num(h) + " deg <= 3 deg");
  o.check(runtime < 30.0, "runtime " + num(runtime, 3) + " s < 30 s");
  return o;
}

Outcome a4() {
  Outcome o;
  const FlightMetrics& m = nominal();
  o.check(m.vz <= 0.25, "max |vz err| " + num(m.vz) + " <= 0.25 m/s");
  o.check(m.vx <= 0.4, "max |vx err| " + num(m.vx) + " <= 0.4 m/s");
  o.check(m.vy <= 0.4, "max |vy err| " + num(m.vy) + " <= 0.4 m/s");
  return o;
}

Outcome a5() {
  Outcome o;
  const FlightMetrics& m = nominal();
  o.check(!m.hover_horizontal.empty(), "hover segments present");
  for (std::size_t i = 0; i < m.hover_horizontal.size(); ++i) {
    o.check(m.hover_horizontal[i] <= 1.2,
            "hover " + std::to_string(i) + " horizontal " + num(m.hover_horizontal[i]) + " <= 1.2 m");
    o.check(m.hover_altitude[i] <= 0.5,
            "hover " + std::to_string(i) + " altitude " + num(m.hover_altitude[i]) + " <= 0.5 m");
  }
  return o;
}

Outcome a6() {
  Outcome o;
  const double v = nominal().climb_mean_vz;
  o.check(v < 0.3, "climb mean |vz err| " + num(v) + " < 0.3 m/s");
  return o;
}

Outcome a7() {
  Outcome o;
  const HelicopterParams p;
  const TrimPoint t = find_trim(p);
  o.check(t.residual < 1e-8, "trim residual " + num(t.residual));
  const LinearPlant plant = linearize(p, t);
  const double lin_err = verify_linearization(p, plant, 1e-4);
  o.check(lin_err < 1e-2, "verify_linearization(1e-4) " + num(lin_err));
  const double want = -1.0 / p.tau_mr;
  const double flap_rel = std::abs(plant.a(lin::a_s, lin::a_s) - want) / std::abs(want);
  o.check(flap_rel <= 5e-2, "A(a_s,a_s) " + num(plant.a(lin::a_s, lin::a_s)) + " vs " + num(want));
  const double yaw_rel = std::abs(plant.a(lin::psi, lin::r) - 1.0);
  o.check(yaw_rel <= 5e-2, "A(psi,r) " + num(plant.a(lin::psi, lin::r), 6) + " vs 1");
  return o;
}

Outcome a8() {
  Outcome o;
  const Autopilot& ap = autopilot();
  // Separation: plant + state feedback + observer as one 12-state system.
  MatrixXd cy = MatrixXd::Zero(kMeasured, kLinStates), py = MatrixXd::Zero(kLinStates, kMeasured);
  MatrixXd pz = MatrixXd::Zero(kLinStates, 3);
  for (int i = 0; i < kMeasured; ++i) cy(i, lin::measured[i]) = py(lin::measured[i], i) = 1.0;
  for (int i = 0; i < 3; ++i) pz(lin::unmeasured[i], i) = 1.0;
  const MatrixXd& f = ap.inner.gains.f;
  const ObserverDesign& ob = ap.observer;
  MatrixXd m = MatrixXd::Zero(12, 12), n = MatrixXd::Zero(12, 3), k(3, 12);
  m.topLeftCorner(9, 9) = ap.plant.a;
  m.bottomLeftCorner(3, 9) = ob.b_obs * cy;
  m.bottomRightCorner(3, 3) = ob.a_obs;
  n.topRows(9) = ap.plant.b;
  n.bottomRows(3) = ob.h_obs;
  k << f * (py + pz * ob.k_obs) * cy, f * pz;
  Eigen::EigenSolver<MatrixXd> all(m + n * k, false);
  Eigen::EigenSolver<MatrixXd> ctrl(ap.plant.a + ap.plant.b * f, false);
  Eigen::EigenSolver<Eigen::Matrix3d> est(ob.a_obs, false);
  Eigen::VectorXcd uni(12);
  uni << ctrl.eigenvalues(), est.eigenvalues();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < 12; ++i) {
    double best = 1e300;
    for (Eigen::Index j = 0; j < 12; ++j) best = std::min(best, std::abs(all.eigenvalues()[j] - uni[i]));
    worst = std::max(worst, best / std::max(1.0, std::abs(uni[i])));
  }
  o.check(worst <= 1e-6, "eigenvalue union mismatch " + num(worst));

  // Nonlinear closed loop from a 0.05 rad flap-estimate offset, no noise.
  ScenarioConfig c = hold_trim();
  c.duration = 1.0;
  c.observer_offset = Eigen::Vector3d(0.05, 0.05, 0.0);
  const ScenarioResult r = run_scenario(c, ap);
  const LogRow& last = r.log.rows.back();
  const FullState s = FullState::from_vector(last.x);
  const double tail =
      tail_command_state(s, ap.params) + ap.params.kp_g * ap.params.ka_g * last.u.delta_ped;
  const Eigen::Vector3d truth(s.flap.a_s, s.flap.b_s, tail);
  const double err = (truth - last.estimate).norm();
  o.check(err < 1e-3, "estimation error at t=1 s " + num(err) + " < 1e-3");
  return o;
}

std::string log_csv(const ScenarioConfig& c) {
  std::ostringstream out;
  write_log_csv(out, run_scenario(c, autopilot()).log);
  return out.str();
}

Outcome a9() {
  Outcome o;
  const std::string first = log_csv(paper_hover_climb());
  const std::string second = log_csv(paper_hover_climb());
  o.check(first == second, "byte-identical repeat logs (" + std::to_string(first.size()) + " bytes)");

  using S = Eigen::Matrix<double, 1, 1>;
  auto f = [](const S& x) -> S { return -x; };
  auto err = [&](int steps) {
    S x(1.0);
    for (int k = 0; k < steps; ++k) x = rk4_integrate(f, x, 1.0 / steps);
    return std::abs(x[0] - std::exp(-1.0));
  };
  const double ratio = err(10) / err(20);
  const double order = std::log2(ratio);
  o.check(std::abs(order - 4.0) < 0.1, "RK4 observed order " + num(order, 4));

  const auto coarse = nominal().flat();
  const auto fine = flight_metrics(0.001).flat();
  double worst = 0.0;
  std::string worst_name;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    const double rel = std::abs(fine[i].second - coarse[i].second) / std::abs(coarse[i].second);
    if (rel > worst) {
      worst = rel;
      worst_name = coarse[i].first;
    }
  }
  o.check(worst < 0.02, "dt halving max change " + num(100 * worst, 3) + "% (" + worst_name + ")");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"A1 riccati correctness", a1},  {"A2 gamma* correctness", a2},
      {"A3 attitude robustness", a3},  {"A4 hover velocity precision", a4},
      {"A5 position envelope", a5},    {"A6 climb tracking", a6},
      {"A7 trim and linearization", a7}, {"A8 observer", a8},
      {"A9 determinism and numerics", a9}};
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    std::printf("%s %-30s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
