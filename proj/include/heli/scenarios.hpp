#pragma once

// Built-in scenarios and the scenario file reader.

#include <string>
#include <vector>

#include "heli/scenario.hpp"

namespace heli {

namespace detail {
inline WindVector wind_along(double speed, double heading_rad) {
  return {speed * std::cos(heading_rad), speed * std::sin(heading_rad), 0.0};
}
inline constexpr double kWindHeading = std::numbers::pi / 6;  // 30 deg
}  // namespace detail

/// Hover in 3 m/s wind, climb at 2.5 m/s from 18 s to 22 s while the wind
/// rises to 5 m/s, then hover at the new altitude.
inline ScenarioConfig paper_hover_climb() {
  ScenarioConfig c;
  c.name = "paper-hover-climb";
  c.duration = 50.0;
  c.wind.mean = detail::wind_along(3.0, detail::kWindHeading);
  c.wind.gusts.push_back({18.0, 1e9, detail::wind_along(2.0, detail::kWindHeading)});
  c.wind.sigma = 0.3;
  c.wind.corr_time = 1.0;
  c.references = {
      {0.0, 18.0, {0, 0, 0}, Eigen::Vector3d::Zero(), 0.0},
      {18.0, 22.0, {0, 0, 0}, Eigen::Vector3d(0, 0, -2.5), 0.0},
      {22.0, 50.0, {0, 0, -10.0}, Eigen::Vector3d::Zero(), 0.0},
  };
  c.seed = 2016;
  return c;
}

/// Attitude-command flight (level references, altitude hold) in gusty
/// 3 m/s mean wind.
inline ScenarioConfig attitude_gust() {
  ScenarioConfig c;
  c.name = "attitude-gust";
  c.duration = 60.0;
  c.attitude_hold = true;
  c.wind.mean = detail::wind_along(3.0, detail::kWindHeading);
  c.wind.gusts = {
      {10.0, 13.0, detail::wind_along(1.5, detail::kWindHeading)},
      {25.0, 27.0, detail::wind_along(-1.5, detail::kWindHeading + 0.5)},
      {40.0, 44.0, detail::wind_along(2.0, detail::kWindHeading - 0.4)},
  };
  c.wind.sigma = 0.5;
  c.wind.corr_time = 1.0;
  c.references = {{0.0, 60.0, {0, 0, 0}, Eigen::Vector3d::Zero(), 0.0}};
  c.seed = 2016;
  return c;
}

/// Zero wind, start at trim, hold the trim references.
inline ScenarioConfig hold_trim() {
  ScenarioConfig c;
  c.name = "hold-trim";
  c.duration = 60.0;
  c.references = {{0.0, 60.0, {0, 0, 0}, Eigen::Vector3d::Zero(), 0.0}};
  return c;
}

/// Zero wind, start 2 m off the reference in every axis.
inline ScenarioConfig position_offset() {
  ScenarioConfig c;
  c.name = "position-offset";
  c.duration = 30.0;
  c.references = {{0.0, 30.0, {0, 0, 0}, Eigen::Vector3d::Zero(), 0.0}};
  c.initial_offset[idx::pn] = 2.0;
  c.initial_offset[idx::pe] = 2.0;
  c.initial_offset[idx::pd] = 2.0;
  return c;
}

inline std::vector<std::string> builtin_scenario_names() {
  return {"paper-hover-climb", "attitude-gust", "hold-trim", "position-offset"};
}

inline std::optional<ScenarioConfig> builtin_scenario(const std::string& name) {
  if (name == "paper-hover-climb") return paper_hover_climb();
  if (name == "attitude-gust") return attitude_gust();
  if (name == "hold-trim") return hold_trim();
  if (name == "position-offset") return position_offset();
  return std::nullopt;
}

/// Sections: [scenario] (name, duration, dt, controller, attitude_hold,
/// settle_time, seed, initial_offset, observer_offset,
/// `attitude_step = t dphi dtheta dpsi`), [wind] (mean, sigma,
/// corr_time, repeated `gust = start end du dv dw`), [reference] (repeated
/// `segment = t0 t1 pn pe pd vn ve vd psi`).
inline ScenarioConfig load_scenario(const Config& cfg) {
  ScenarioConfig c;
  c.references.clear();
  for (const auto& e : cfg.entries()) {
    const std::string at = cfg.where(e);
    auto num = [&] { return parse_double(e.value, at); };
    auto nums = [&](std::size_t count) {
      auto v = parse_doubles(e.value, at);
      if (v.size() != count) {
        throw ConfigError(at + ": '" + e.key + "' expects " + std::to_string(count) + " values");
      }
      return v;
    };
    if (e.section == "scenario") {
      if (e.key == "name") c.name = e.value;
      else if (e.key == "duration") c.duration = num();
      else if (e.key == "dt") c.dt = num();
      else if (e.key == "controller") c.controller = parse_controller(e.value);
      else if (e.key == "attitude_hold") c.attitude_hold = num() != 0.0;
      else if (e.key == "settle_time") c.settle_time = num();
      else if (e.key == "seed") c.seed = std::stoull(e.value);
      else if (e.key == "initial_offset") {
        const auto v = nums(kStateDim);
        for (int i = 0; i < kStateDim; ++i) c.initial_offset[i] = v[i];
      } else if (e.key == "attitude_step") {
        const auto v = nums(4);
        c.attitude_step_time = v[0];
        c.attitude_step = {v[1], v[2], v[3]};
      } else if (e.key == "observer_offset") {
        const auto v = nums(3);
        c.observer_offset = {v[0], v[1], v[2]};
      } else {
        throw ConfigError(at + ": unknown key '" + e.key + "' in section [scenario]");
      }
    } else if (e.section == "wind") {
      if (e.key == "mean") {
        const auto v = nums(3);
        c.wind.mean = {v[0], v[1], v[2]};
      } else if (e.key == "sigma") c.wind.sigma = num();
      else if (e.key == "corr_time") c.wind.corr_time = num();
      else if (e.key == "gust") {
        const auto v = nums(5);
        c.wind.gusts.push_back({v[0], v[1], {v[2], v[3], v[4]}});
      } else {
        throw ConfigError(at + ": unknown key '" + e.key + "' in section [wind]");
      }
    } else if (e.section == "reference") {
      if (e.key != "segment") {
        throw ConfigError(at + ": unknown key '" + e.key + "' in section [reference]");
      }
      const auto v = nums(9);
      c.references.push_back(
          {v[0], v[1], {v[2], v[3], v[4]}, Eigen::Vector3d(v[5], v[6], v[7]), v[8]});
    } else {
      throw ConfigError(at + ": unknown section [" + e.section + "] in scenario file");
    }
  }
  c.validate();
  return c;
}

}  // namespace heli
