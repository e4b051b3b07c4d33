// heli: trim, linearize, synthesize, gamma-search, simulate, compare.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "heli/heli.hpp"

namespace fs = std::filesystem;
using namespace heli;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::string scenario = "paper-hover-climb";
  std::string plant_dir;
  std::string controller;
  std::optional<double> dt;
};

Settings settings_from(const Options& o) {
  if (o.config.empty()) return Settings{};
  return load_settings(Config::from_file(o.config));
}

fs::path out_dir(const Options& o) {
  fs::path dir(o.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

ScenarioConfig scenario_from(const Options& o) {
  ScenarioConfig cfg;
  if (auto b = builtin_scenario(o.scenario)) {
    cfg = *b;
  } else if (fs::exists(o.scenario)) {
    cfg = load_scenario(Config::from_file(o.scenario));
  } else {
    throw std::runtime_error("unknown scenario '" + o.scenario + "'");
  }
  if (o.seed) cfg.seed = *o.seed;
  if (!o.controller.empty()) cfg.controller = parse_controller(o.controller);
  if (o.dt) cfg.dt = *o.dt;
  cfg.validate();
  return cfg;
}

void write_trim_report(std::ostream& out, const TrimPoint& t) {
  out << "residual = " << format_double(t.residual) << '\n';
  out << "iterations = " << t.iterations << '\n';
  const StateVector x = t.x_trim.to_vector();
  for (int i = 0; i < kStateDim; ++i) {
    out << state_labels()[i] << " = " << format_double(x[i]) << '\n';
  }
  out << "dlat = " << format_double(t.u_trim.delta_lat) << '\n'
      << "dlon = " << format_double(t.u_trim.delta_lon) << '\n'
      << "dped = " << format_double(t.u_trim.delta_ped) << '\n'
      << "dcol = " << format_double(t.u_trim.delta_col) << '\n';
}

int cmd_trim(const Options& o) {
  const Settings s = settings_from(o);
  const TrimPoint t = find_trim(s.params);
  auto f = open_out(out_dir(o) / "trim_report.txt");
  write_trim_report(f, t);
  write_trim_report(std::cout, t);
  return 0;
}

int cmd_linearize(const Options& o) {
  const Settings s = settings_from(o);
  const TrimPoint t = find_trim(s.params);
  const LinearPlant plant = linearize(s.params, t);
  const fs::path dir = out_dir(o);
  write_matrix_csv((dir / "A.csv").string(), plant.a, lin_state_labels());
  write_matrix_csv((dir / "B.csv").string(), plant.b, lin_input_labels());
  write_matrix_csv((dir / "E.csv").string(), plant.e, wind_labels());
  auto f = open_out(dir / "trim_report.txt");
  write_trim_report(f, t);
  const double err = verify_linearization(s.params, plant, 1e-4);
  f << "linearization_error_1e-4 = " << format_double(err) << '\n';
  std::cout << "wrote A.csv B.csv E.csv trim_report.txt to " << dir.string()
            << " (linearization error " << err << ")\n";
  return 0;
}

LinearPlant plant_from(const Options& o, const Settings& s) {
  LinearPlant plant = linearize(s.params, find_trim(s.params));
  if (!o.plant_dir.empty()) {
    const fs::path d(o.plant_dir);
    const Eigen::MatrixXd a = read_matrix_csv((d / "A.csv").string());
    const Eigen::MatrixXd b = read_matrix_csv((d / "B.csv").string());
    const Eigen::MatrixXd e = read_matrix_csv((d / "E.csv").string());
    if (a.rows() != kLinStates || a.cols() != kLinStates || b.rows() != kLinStates ||
        b.cols() != kLinInputs || e.rows() != kLinStates || e.cols() != kWindInputs) {
      throw std::runtime_error("plant CSVs must be 9x9, 9x3 and 9x3");
    }
    plant.a = a;
    plant.b = b;
    plant.e = e;
  }
  return plant;
}

int cmd_synthesize(const Options& o) {
  const Settings s = settings_from(o);
  const LinearPlant plant = plant_from(o, s);
  const InnerLoopDesign des = synthesize_inner_loop(plant, s.weights, s.gamma_tol, s.gamma_margin);
  const ObserverDesign obs = design_reduced_observer(plant, s.observer_poles);
  const fs::path dir = out_dir(o);
  write_matrix_csv((dir / "F.csv").string(), des.gains.f, lin_state_labels());
  write_matrix_csv((dir / "G.csv").string(), des.gains.g,
                   std::array<std::string, 3>{"phi_ref", "theta_ref", "psi_ref"});
  write_matrix_csv((dir / "P.csv").string(), des.gains.riccati.p, lin_state_labels());
  const std::array<std::string, 6> y_labels{"phi", "theta", "p", "q", "r", "psi"};
  write_matrix_csv((dir / "observer_A.csv").string(), obs.a_obs,
                   std::array<std::string, 3>{"a_s", "b_s", "dped"});
  write_matrix_csv((dir / "observer_B.csv").string(), obs.b_obs, y_labels);
  write_matrix_csv((dir / "observer_H.csv").string(), obs.h_obs, lin_input_labels());
  write_matrix_csv((dir / "observer_K.csv").string(), obs.k_obs, y_labels);

  const double norm = closed_loop_hinf_norm(plant, des.outputs, des.gains);
  const FeasibilityDiagnostics diag =
      check_feasibility(plant.a, plant.b, des.outputs.c, des.outputs.d);
  auto f = open_out(dir / "synthesis_report.txt");
  for (std::ostream* os : {static_cast<std::ostream*>(&f), &std::cout}) {
    *os << "gamma_star = " << format_double(des.search.gamma_star) << '\n'
        << "gamma = " << format_double(des.gains.gamma) << '\n'
        << "reference_gamma = " << kReferenceGamma << '\n'
        << "riccati_residual = " << format_double(des.gains.riccati.residual_norm) << '\n'
        << "p_min_eigenvalue = " << format_double(des.gains.riccati.min_eigenvalue) << '\n'
        << "closed_loop_hinf_norm = " << format_double(norm) << '\n'
        << "norm_within_gamma = " << (norm <= des.gains.gamma * (1 + 1e-3) ? "yes" : "no") << '\n'
        << "d_rank = " << diag.d_rank << '\n'
        << "invariant_zeros = " << diag.invariant_zeros.size() << '\n';
    Eigen::EigenSolver<Eigen::MatrixXd> es(plant.a + plant.b * des.gains.f, false);
    *os << "closed_loop_eigenvalues =";
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) *os << ' ' << es.eigenvalues()[i];
    *os << '\n';
  }
  return 0;
}

int cmd_gamma_search(const Options& o) {
  const Settings s = settings_from(o);
  const LinearPlant plant = plant_from(o, s);
  const ControlledOutputMap out = build_output_map(s.weights);
  const GammaSearchResult res =
      gamma_star(plant.a, plant.b, out.c, out.d, plant.e, s.gamma_tol, s.gamma_margin);
  auto f = open_out(out_dir(o) / "gamma_trace.csv");
  f << "iteration,gamma,feasible,reason\n";
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    const auto& t = res.trace[i];
    f << i << ',' << format_double(t.gamma) << ',' << (t.feasible ? 1 : 0) << ',' << t.reason
      << '\n';
    std::cout << i << "  gamma = " << format_double(t.gamma) << "  "
              << (t.feasible ? "feasible" : "infeasible (" + t.reason + ")") << '\n';
  }
  std::cout << "gamma_star = " << format_double(res.gamma_star)
            << "  (bracket [" << format_double(res.gamma_lower) << ", "
            << format_double(res.gamma_star) << "]), suboptimal gamma = "
            << format_double(res.gamma) << '\n';
  return 0;
}

int cmd_simulate(const Options& o) {
  const Settings s = settings_from(o);
  const Autopilot ap = build_autopilot(s);
  const ScenarioConfig cfg = scenario_from(o);
  const ScenarioResult res = run_scenario(cfg, ap);
  const fs::path dir = out_dir(o);
  auto log = open_out(dir / "log.csv");
  write_log_csv(log, res.log);
  auto m = open_out(dir / "metrics.txt");
  write_metrics(m, res.metrics);
  std::cout << cfg.name << " (" << to_string(cfg.controller) << ", seed " << cfg.seed << ")\n";
  write_metrics(std::cout, res.metrics);
  return 0;
}

int cmd_compare(const Options& o) {
  const Settings s = settings_from(o);
  const Autopilot ap = build_autopilot(s);
  const ScenarioConfig cfg = scenario_from(o);
  const Comparison c = compare_controllers(cfg, ap);
  auto f = open_out(out_dir(o) / "comparison.txt");
  const auto h = c.hinf.named(), p = c.pid.named();
  for (std::ostream* os : {static_cast<std::ostream*>(&f), &std::cout}) {
    *os << "metric,hinf,pid,ratio\n";
    for (std::size_t i = 0; i < h.size(); ++i) {
      *os << h[i].first << ',' << format_double(h[i].second) << ','
          << format_double(p[i].second) << ','
          << (c.ratios[i].second ? format_double(*c.ratios[i].second) : "n/a") << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-loop H-infinity helicopter flight-control toolkit"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "Settings file ([mass] [rotor] [gyro] [aero] [outer] [pid] [hinf] [observer])");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--seed", o.seed, "Scenario seed override");

  auto* trim = app.add_subcommand("trim", "Solve the hover trim");
  auto* linearize_cmd = app.add_subcommand("linearize", "Write A, B, E at hover trim");
  auto* synth = app.add_subcommand("synthesize", "H-infinity gains and observer");
  auto* gsearch = app.add_subcommand("gamma-search", "Bisection trace for gamma*");
  auto* sim = app.add_subcommand("simulate", "Run a closed-loop scenario");
  auto* cmp = app.add_subcommand("compare", "H-infinity vs PID on one scenario");
  for (auto* sub : {synth, gsearch}) {
    sub->add_option("--plant", o.plant_dir, "Directory with A.csv, B.csv, E.csv");
  }
  for (auto* sub : {sim, cmp}) {
    sub->add_option("--scenario", o.scenario, "Built-in scenario name or scenario file");
    sub->add_option("--dt", o.dt, "Integration step override (s)");
  }
  sim->add_option("--controller", o.controller, "hinf | pid | open_loop");
  // Global options are also accepted after the subcommand.
  for (auto* sub : {trim, linearize_cmd, synth, gsearch, sim, cmp}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    if (*trim) return cmd_trim(o);
    if (*linearize_cmd) return cmd_linearize(o);
    if (*synth) return cmd_synthesize(o);
    if (*gsearch) return cmd_gamma_search(o);
    if (*sim) return cmd_simulate(o);
    if (*cmp) return cmd_compare(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
