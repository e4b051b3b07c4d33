#pragma once

#include <stdexcept>
#include <string>

#include "heli/types.hpp"

namespace heli {

class NonFiniteStateError : public std::runtime_error {
 public:
  NonFiniteStateError(const std::string& what, long step)
      : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// Classical fourth-order Runge-Kutta for an autonomous right-hand side.
template <class State, class Rhs>
State rk4_integrate(Rhs&& f, const State& x, double dt) {
  const State k1 = f(x);
  const State k2 = f(State(x + 0.5 * dt * k1));
  const State k3 = f(State(x + 0.5 * dt * k2));
  const State k4 = f(State(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// One RK4 step of `derivative(state, inputs, wind)` with inputs and wind held
/// over the step.
template <class Derivative>
StateVector rk4_step(Derivative&& derivative, const StateVector& x,
                     const ControlInputs& inputs, const WindVector& wind, double dt,
                     long step_index = -1) {
  if (!(dt > 0)) throw std::invalid_argument("rk4_step requires dt > 0");
  auto rhs = [&](const StateVector& s) -> StateVector { return derivative(s, inputs, wind); };
  StateVector next = rk4_integrate(rhs, x, dt);
  if (!next.allFinite()) {
    throw NonFiniteStateError("non-finite state at step " + std::to_string(step_index),
                              step_index);
  }
  return next;
}

}  // namespace heli
