#pragma once

namespace cgq {

/// One classical fourth-order Runge-Kutta step of y' = f(y). `State` is any Eigen vector
/// or matrix type; `h` may be negative for backward integration.
template <typename State, typename Field>
State rk4_step(const Field& f, const State& y, double h) {
  const State k1 = f(y);
  const State k2 = f(State(y + (0.5 * h) * k1));
  const State k3 = f(State(y + (0.5 * h) * k2));
  const State k4 = f(State(y + h * k3));
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace cgq
