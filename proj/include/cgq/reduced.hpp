#pragma once

// Two-qubit constrained flows restricted to product states, in the chart
//     c = (1, w1, w2, w1 w2),   w_i = (q_i + i p_i)/sqrt(2),
// i.e. the (unnormalized) product (1, w2) (x) (1, w1). The fourth amplitude fixes the
// third canonical pair: sqrt(2) q3 = q1 q2 - p1 p2, sqrt(2) p3 = p2 q1 + p1 q2.
//
// Per qubit, z_i = (2 - r_i^2)/(2 + r_i^2) and x_i = 2 sqrt(2) q_i / (2 + r_i^2) with
// r_i^2 = q_i^2 + p_i^2, so the chart energies are
//     H_s  = omega (z1 + z2) + mu z1 z2,
//     H_ns = omega (z1 + z2) + mu x1 x2.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "cgq/algebras.hpp"
#include "cgq/core.hpp"
#include "cgq/errors.hpp"
#include "cgq/rk4.hpp"

namespace cgq {

enum class ReducedVariant { symmetric, nonsymmetric };

/// Coordinates ordered (q1, q2, p1, p2).
using ReducedPoint = Eigen::Vector4d;

struct ReducedParams {
  double mu = 1.5;
  double omega = 1.0;
  ReducedVariant variant = ReducedVariant::nonsymmetric;
};

/// symmetric:
///   q1' = [2 mu p1 (r2^2 - 2) - 2 omega p1 d1] / d1,   p1' = [-2 mu q1 (r2^2 - 2) + 2 omega q1 d1] / d1
/// nonsymmetric:
///   q1' = -[4 mu p1 q1 q2 + 2 omega p1 d1] / d1,        p1' = [2 mu q2 (q1^2 - p1^2 - 2) + 2 omega q1 d1] / d1
/// with d1 = 2 + r2^2, and the same with the qubit labels exchanged for (q2', p2').
inline ReducedPoint reduced_two_qubit_field(const ReducedPoint& s, const ReducedParams& par) {
  const double q1 = s(0), q2 = s(1), p1 = s(2), p2 = s(3);
  const double mu = par.mu, w = par.omega;
  const double r1 = q1 * q1 + p1 * p1;
  const double r2 = q2 * q2 + p2 * p2;
  const double d1 = 2.0 + r2;
  const double d2 = 2.0 + r1;
  ReducedPoint f;
  if (par.variant == ReducedVariant::symmetric) {
    f(0) = (2.0 * mu * p1 * (r2 - 2.0) - 2.0 * w * p1 * d1) / d1;
    f(1) = (2.0 * mu * p2 * (r1 - 2.0) - 2.0 * w * p2 * d2) / d2;
    f(2) = (-2.0 * mu * q1 * (r2 - 2.0) + 2.0 * w * q1 * d1) / d1;
    f(3) = (-2.0 * mu * q2 * (r1 - 2.0) + 2.0 * w * q2 * d2) / d2;
  } else {
    f(0) = -(4.0 * mu * p1 * q1 * q2 + 2.0 * w * p1 * d1) / d1;
    f(1) = -(4.0 * mu * p2 * q1 * q2 + 2.0 * w * p2 * d2) / d2;
    f(2) = (2.0 * mu * q2 * (q1 * q1 - p1 * p1 - 2.0) + 2.0 * w * q1 * d1) / d1;
    f(3) = (2.0 * mu * q1 * (q2 * q2 - p2 * p2 - 2.0) + 2.0 * w * q2 * d2) / d2;
  }
  return f;
}

struct ThirdPair {
  double q3 = 0.0;
  double p3 = 0.0;
};

inline ThirdPair chart_third_pair(const ReducedPoint& s) {
  const double r = 1.0 / std::sqrt(2.0);
  return {r * (s(0) * s(1) - s(2) * s(3)), r * (s(3) * s(0) + s(2) * s(1))};
}

/// Unnormalized four-amplitude vector (1, w1, w2, w1 w2).
inline CVector chart_amplitudes(const ReducedPoint& s) {
  const double r = 1.0 / std::sqrt(2.0);
  const Complex w1(r * s(0), r * s(2));
  const Complex w2(r * s(1), r * s(3));
  CVector c(4);
  c << Complex(1.0), w1, w2, w1 * w2;
  return c;
}

inline PureState reconstruct_state(const ReducedPoint& s) { return PureState(chart_amplitudes(s)); }

inline HermitianOperator reduced_hamiltonian(const ReducedParams& par) {
  ModelParams mp;
  mp.omega = par.omega;
  mp.mu = par.mu;
  return model_hamiltonian(par.variant == ReducedVariant::symmetric
                               ? ModelKind::two_qubit_symmetric
                               : ModelKind::two_qubit_nonsymmetric,
                           mp);
}

/// <H> on the reconstructed product state.
inline double reduced_energy(const ReducedPoint& s, const HermitianOperator& h) {
  return expectation(chart_amplitudes(s), h);
}

inline double reduced_energy(const ReducedPoint& s, const ReducedParams& par) {
  return reduced_energy(s, reduced_hamiltonian(par));
}

struct ReducedTrajectory {
  std::vector<double> times;
  std::vector<ReducedPoint> states;
};

/// Fixed-step RK4; `dt` may be negative to run the flow backwards.
inline ReducedTrajectory integrate_reduced(const ReducedParams& par, const ReducedPoint& initial,
                                           double dt, double t_final, long sample_stride = 1) {
  if (!(dt != 0.0) || !std::isfinite(dt)) throw Error("integrate_reduced: dt must be non-zero");
  if (!(t_final > std::abs(dt))) throw Error("integrate_reduced: t_final must exceed |dt|");
  if (sample_stride < 1) throw Error("integrate_reduced: sample stride must be >= 1");
  const long steps = std::lround(t_final / std::abs(dt));
  const auto field = [&par](const ReducedPoint& y) { return reduced_two_qubit_field(y, par); };

  ReducedTrajectory traj;
  ReducedPoint s = initial;
  traj.times.push_back(0.0);
  traj.states.push_back(s);
  for (long k = 1; k <= steps; ++k) {
    s = rk4_step(field, s, dt);
    if (!s.allFinite()) throw IntegrationError(static_cast<double>(k) * dt, "non-finite state");
    if (k % sample_stride == 0 || k == steps) {
      traj.times.push_back(static_cast<double>(k) * dt);
      traj.states.push_back(s);
    }
  }
  return traj;
}

}  // namespace cgq
