#pragma once

// Wind = mean + step gusts + first-order Gauss-Markov turbulence. Turbulence
// is generated on a fixed 100 Hz knot grid and linearly interpolated, so the
// signal does not depend on the integration step.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "heli/types.hpp"

namespace heli {

struct Gust {
  double start = 0.0;
  double end = 0.0;
  WindVector delta;
};

struct WindModel {
  WindVector mean;
  std::vector<Gust> gusts;
  double sigma = 0.0;      // turbulence std per axis (m/s)
  double corr_time = 1.0;  // s

  void validate() const {
    if (!(sigma >= 0)) throw std::invalid_argument("turbulence sigma must be >= 0");
    if (!(corr_time > 0)) throw std::invalid_argument("turbulence correlation time must be > 0");
    for (const auto& g : gusts) {
      if (!(g.end > g.start)) throw std::invalid_argument("gust interval must have end > start");
    }
  }
};

class WindField {
 public:
  static constexpr double kKnotPeriod = 0.01;

  WindField(const WindModel& model, double duration, std::uint64_t seed) : model_(model) {
    model_.validate();
    if (model_.sigma == 0.0) return;
    const auto n = static_cast<std::size_t>(std::ceil(duration / kKnotPeriod)) + 2;
    knots_.resize(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double a = std::exp(-kKnotPeriod / model_.corr_time);
    const double b = model_.sigma * std::sqrt(1.0 - a * a);
    Eigen::Vector3d x(normal(rng), normal(rng), normal(rng));
    x *= model_.sigma;
    for (auto& k : knots_) {
      k = x;
      for (int i = 0; i < 3; ++i) x[i] = a * x[i] + b * normal(rng);
    }
  }

  WindVector sample(double t) const {
    Eigen::Vector3d w = model_.mean.vec();
    for (const auto& g : model_.gusts) {
      if (t >= g.start && t < g.end) w += g.delta.vec();
    }
    if (!knots_.empty()) w += turbulence(t);
    return WindVector::from(w);
  }

  Eigen::Vector3d turbulence(double t) const {
    if (knots_.empty()) return Eigen::Vector3d::Zero();
    const double s = std::max(t, 0.0) / kKnotPeriod;
    auto i = static_cast<std::size_t>(s);
    if (i + 1 >= knots_.size()) return knots_.back();
    const double frac = s - static_cast<double>(i);
    return (1.0 - frac) * knots_[i] + frac * knots_[i + 1];
  }

  const std::vector<Eigen::Vector3d>& knots() const { return knots_; }

 private:
  WindModel model_;
  std::vector<Eigen::Vector3d> knots_;
};

}  // namespace heli
