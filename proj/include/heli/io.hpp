#pragma once

// CSV and settings-file I/O shared by the CLI and the tests.

#include <array>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "heli/scenario.hpp"

namespace heli {

/// Shortest text that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class Labels>
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m, const Labels& col_labels) {
  bool first = true;
  for (const auto& l : col_labels) {
    out << (first ? "" : ",") << l;
    first = false;
  }
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << (j ? "," : "") << format_double(m(i, j));
    }
    out << '\n';
  }
}

template <class Labels>
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m, const Labels& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_matrix_csv(out, m, labels);
}

/// Reads a header-plus-rows numeric CSV written by write_matrix_csv.
inline Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) r.push_back(parse_double(cell, path));
    if (!rows.empty() && r.size() != rows.front().size()) {
      throw std::runtime_error(path + ": ragged CSV");
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

inline const std::string& log_header() {
  static const std::string h =
      "t,pn,pe,pd,vx,vy,vz,phi,theta,psi,p,q,r,a_s,b_s,xi,dlat,dlon,dped,dcol,"
      "wind_u,wind_v,wind_w,phi_ref,theta_ref,psi_ref,est_a_s,est_b_s,est_dped,sat_flags";
  return h;
}

inline void write_log_csv(std::ostream& out, const ScenarioLog& log) {
  out << log_header() << '\n';
  for (const auto& r : log.rows) {
    out << format_double(r.t);
    for (int i = 0; i < kStateDim; ++i) out << ',' << format_double(r.x[i]);
    for (double v : {r.u.delta_lat, r.u.delta_lon, r.u.delta_ped, r.u.delta_col, r.wind.u_w,
                     r.wind.v_w, r.wind.w_w, r.att_ref.phi, r.att_ref.theta, r.att_ref.psi,
                     r.estimate[0], r.estimate[1], r.estimate[2]}) {
      out << ',' << format_double(v);
    }
    out << ',' << r.saturation << '\n';
  }
}

inline void write_metrics(std::ostream& out, const MetricsReport& m) {
  for (const auto& [name, v] : m.named()) out << name << " = " << format_double(v) << '\n';
  for (const auto& s : m.segments) {
    out << "segment " << s.index << " [" << s.t0 << ", " << s.t1 << ") "
        << (s.hover ? "hover" : "moving") << ": mean_abs_vz_err = "
        << format_double(s.mean_abs_vz_err) << ", max_horizontal = "
        << format_double(s.max_horizontal) << ", max_altitude_err = "
        << format_double(s.max_altitude_err) << ", max_vel_err = ("
        << format_double(s.max_vel_err.x()) << ", " << format_double(s.max_vel_err.y()) << ", "
        << format_double(s.max_vel_err.z()) << ")\n";
  }
}

/// All controller-design settings read from one `--config` file.
struct Settings {
  HelicopterParams params;
  OuterGains outer;
  PidGains pid;
  OutputWeights weights = OutputWeights::reference();
  double gamma_tol = 1e-4;
  double gamma_margin = 0.05;
  std::vector<std::complex<double>> observer_poles = default_observer_poles();
};

inline Settings load_settings(const Config& cfg) {
  static const std::array<std::string, 8> known{"mass", "rotor", "gyro", "aero",
                                                "outer", "pid", "hinf", "observer"};
  for (const auto& e : cfg.entries()) {
    if (std::find(known.begin(), known.end(), e.section) == known.end()) {
      throw ConfigError(cfg.where(e) + ": unknown section [" + e.section + "]");
    }
  }
  Settings s;
  s.params = load_params(cfg);
  s.outer = load_outer_gains(cfg);
  s.pid = load_pid_gains(cfg);
  std::vector<double> pole_re, pole_im;
  for (const auto& e : cfg.entries()) {
    const std::string at = cfg.where(e);
    if (e.section == "hinf") {
      if (e.key == "c11") s.weights.c11 = parse_matrix(e.value, 4, 4, at);
      else if (e.key == "c22") s.weights.c22 = parse_matrix(e.value, 2, 5, at);
      else if (e.key == "d11") s.weights.d11 = parse_matrix(e.value, 3, 3, at);
      else if (e.key == "gamma_tol") s.gamma_tol = parse_double(e.value, at);
      else if (e.key == "gamma_margin") s.gamma_margin = parse_double(e.value, at);
      else throw ConfigError(at + ": unknown key '" + e.key + "' in section [hinf]");
    } else if (e.section == "observer") {
      if (e.key == "poles") pole_re = parse_doubles(e.value, at);
      else if (e.key == "poles_imag") pole_im = parse_doubles(e.value, at);
      else throw ConfigError(at + ": unknown key '" + e.key + "' in section [observer]");
    }
  }
  if (!pole_re.empty()) {
    if (!pole_im.empty() && pole_im.size() != pole_re.size()) {
      throw ConfigError("observer poles_imag must match poles in length");
    }
    s.observer_poles.clear();
    for (std::size_t i = 0; i < pole_re.size(); ++i) {
      s.observer_poles.emplace_back(pole_re[i], pole_im.empty() ? 0.0 : pole_im[i]);
    }
  }
  if (!(s.gamma_tol > 0)) throw ConfigError("gamma_tol must be > 0");
  if (!(s.gamma_margin >= 0)) throw ConfigError("gamma_margin must be >= 0");
  return s;
}

inline Autopilot build_autopilot(const Settings& s) {
  Autopilot ap;
  ap.params = s.params;
  ap.trim = find_trim(s.params);
  ap.plant = linearize(s.params, ap.trim);
  ap.weights = s.weights;
  ap.inner = synthesize_inner_loop(ap.plant, s.weights, s.gamma_tol, s.gamma_margin);
  ap.observer = design_reduced_observer(ap.plant, s.observer_poles);
  ap.outer = s.outer;
  ap.pid = s.pid;
  return ap;
}

}  // namespace heli
