#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "heli/heli.hpp"

namespace heli::testing {

/// Default airframe autopilot, built once per test binary.
inline const Autopilot& default_autopilot() {
  static const Autopilot ap = build_autopilot(HelicopterParams{});
  return ap;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("heli_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Scalar plant shared by the Riccati and gain oracles:
/// x' = -x + u + e w, h = [x; u].
struct ScalarPlant {
  Eigen::MatrixXd a{{-1.0}};
  Eigen::MatrixXd b{{1.0}};
  Eigen::MatrixXd c{{1.0}, {0.0}};
  Eigen::MatrixXd d{{0.0}, {1.0}};
  Eigen::MatrixXd e;
  explicit ScalarPlant(double e_gain) : e{{e_gain}} {}
};

}  // namespace heli::testing
