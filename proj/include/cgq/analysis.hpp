#pragma once

// Post-processing: Poincare sections of the reduced two-qubit flows, largest-Lyapunov
// estimates, and observable / fluctuation series over trajectories.

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "cgq/constrained.hpp"
#include "cgq/core.hpp"
#include "cgq/errors.hpp"
#include "cgq/open_system.hpp"
#include "cgq/reduced.hpp"
#include "cgq/rk4.hpp"

namespace cgq {

// ---------------------------------------------------------------------------
// Poincare sections q2 = 0, p2 > 0.

struct SectionPoint {
  double q1 = 0.0;
  double p1 = 0.0;
  double time = 0.0;
  std::size_t orbit = 0;
};

struct SectionOptions {
  double dt = 1e-2;
  double t_final = 1e3;
  /// Bisection stops once |q2| is at or below this.
  double tolerance = 1e-9;
  int max_bisections = 200;
};

/// Crossings of q2 = 0 with p2 > 0 along the RK4 orbit from `x0`. Each crossing is refined
/// by bisecting the RK4 sub-step length inside the bracketing step, so the refined point
/// lies on the same discrete flow as the orbit. A negative dt runs the flow backwards.
inline std::vector<SectionPoint> section_crossings(const ReducedParams& par,
                                                   const ReducedPoint& x0,
                                                   const SectionOptions& opt,
                                                   std::size_t orbit = 0) {
  if (!(opt.dt != 0.0)) throw Error("section_crossings: dt must be non-zero");
  const long steps = std::lround(opt.t_final / std::abs(opt.dt));
  const auto field = [&par](const ReducedPoint& y) { return reduced_two_qubit_field(y, par); };

  std::vector<SectionPoint> out;
  ReducedPoint s = x0;
  for (long k = 0; k < steps; ++k) {
    const ReducedPoint next = rk4_step(field, s, opt.dt);
    if (!next.allFinite()) {
      throw IntegrationError(static_cast<double>(k + 1) * opt.dt, "non-finite reduced orbit");
    }
    const double a = s(1);
    const double b = next(1);
    if (a * b <= 0.0 && !(a == 0.0 && k > 0) && a != b) {
      double lo = 0.0;
      double hi = opt.dt;
      ReducedPoint hit = std::abs(a) <= std::abs(b) ? s : next;
      double tau = std::abs(a) <= std::abs(b) ? 0.0 : opt.dt;
      for (int it = 0; it < opt.max_bisections && std::abs(hit(1)) > opt.tolerance; ++it) {
        const double mid = 0.5 * (lo + hi);
        const ReducedPoint m = rk4_step(field, s, mid);
        if ((m(1) <= 0.0) == (a <= 0.0) && m(1) != 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
        hit = m;
        tau = mid;
      }
      if (std::abs(hit(1)) <= opt.tolerance && hit(3) > 0.0) {
        out.push_back({hit(0), hit(2), static_cast<double>(k) * opt.dt + tau, orbit});
      }
    }
    s = next;
  }
  return out;
}

/// Smallest p2 in (0, p_max] with H(q1, q2, 0, p2) = energy, if any. Roots are bracketed
/// by a scan of `scan` cells and polished with TOMS 748.
inline std::optional<double> solve_shell_p2(const HermitianOperator& h, double energy, double q1,
                                            double q2, double p_max = 8.0, int scan = 400) {
  if (scan < 2) throw Error("solve_shell_p2: scan must be at least 2");
  const auto g = [&](double p2) {
    return reduced_energy(ReducedPoint(q1, q2, 0.0, p2), h) - energy;
  };
  double a = p_max / scan;
  double ga = g(a);
  if (ga == 0.0) return a;
  for (int k = 2; k <= scan; ++k) {
    const double b = p_max * k / scan;
    const double gb = g(b);
    if (gb == 0.0) return b;
    if (ga * gb < 0.0) {
      boost::uintmax_t iters = 200;
      const auto bracket = boost::math::tools::toms748_solve(
          g, a, b, ga, gb, boost::math::tools::eps_tolerance<double>(52), iters);
      return 0.5 * (bracket.first + bracket.second);
    }
    a = b;
    ga = gb;
  }
  return std::nullopt;
}

inline std::optional<ReducedPoint> shell_point(const ReducedParams& par, double energy, double q1,
                                               double q2) {
  const auto p2 = solve_shell_p2(reduced_hamiltonian(par), energy, q1, q2);
  if (!p2) return std::nullopt;
  return ReducedPoint(q1, q2, 0.0, *p2);
}

/// Points (q1, q2, 0, p2) with p2 > 0 on the shell H = energy, one per node of a grid over
/// (q1, q2) in [-extent, extent]^2; nodes without a root are skipped.
inline std::vector<ReducedPoint> sample_energy_shell(const ReducedParams& par, double energy,
                                                     int grid = 12, double extent = 2.0) {
  if (grid < 1) throw Error("sample_energy_shell: grid must be positive");
  const HermitianOperator h = reduced_hamiltonian(par);
  std::vector<ReducedPoint> out;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double q1 = grid == 1 ? 0.0 : -extent + 2.0 * extent * i / (grid - 1);
      const double q2 = grid == 1 ? 0.0 : -extent + 2.0 * extent * j / (grid - 1);
      if (const auto p2 = solve_shell_p2(h, energy, q1, q2)) out.emplace_back(q1, q2, 0.0, *p2);
    }
  }
  if (out.empty()) {
    throw Error("sample_energy_shell: no admissible initial condition on the shell H = " +
                std::to_string(energy));
  }
  return out;
}

/// Sections of `n_orbits` orbits whose initial conditions are spread evenly over the
/// shell sample.
inline std::vector<SectionPoint> poincare_section(const ReducedParams& par, double energy,
                                                  std::size_t n_orbits,
                                                  const SectionOptions& opt, int grid = 12) {
  const auto shell = sample_energy_shell(par, energy, grid);
  if (n_orbits < 1) throw Error("poincare_section: need at least one orbit");
  std::vector<SectionPoint> out;
  for (std::size_t o = 0; o < n_orbits; ++o) {
    const std::size_t pick = (o * shell.size()) / n_orbits;
    const auto pts = section_crossings(par, shell[pick], opt, o);
    out.insert(out.end(), pts.begin(), pts.end());
  }
  return out;
}

/// Number of occupied cells of an n x n grid laid over the points' own bounding box.
inline std::size_t box_count(const std::vector<SectionPoint>& pts, int n = 50) {
  if (pts.empty()) return 0;
  if (n < 1) throw Error("box_count: grid must be positive");
  double x0 = pts.front().q1, x1 = x0, y0 = pts.front().p1, y1 = y0;
  for (const auto& p : pts) {
    x0 = std::min(x0, p.q1);
    x1 = std::max(x1, p.q1);
    y0 = std::min(y0, p.p1);
    y1 = std::max(y1, p.p1);
  }
  const double wx = x1 > x0 ? x1 - x0 : 1.0;
  const double wy = y1 > y0 ? y1 - y0 : 1.0;
  std::set<std::pair<int, int>> cells;
  for (const auto& p : pts) {
    const int i = std::min(n - 1, static_cast<int>((p.q1 - x0) / wx * n));
    const int j = std::min(n - 1, static_cast<int>((p.p1 - y0) / wy * n));
    cells.emplace(i, j);
  }
  return cells.size();
}

// ---------------------------------------------------------------------------
// Largest Lyapunov exponent.

struct LyapunovEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  long intervals = 0;
};

struct LyapunovOptions {
  double dt = 1e-2;
  double t_final = 1e4;
  double renorm_dt = 1.0;
  double separation = 1e-8;
};

/// Two-orbit Benettin estimate: a companion orbit at distance `separation` is pulled back
/// to that distance every `renorm_dt`; the estimate is the mean log-stretch per unit time.
template <typename Vec, typename Field>
LyapunovEstimate largest_lyapunov(const Field& f, const Vec& x0, const LyapunovOptions& opt) {
  if (!(opt.dt > 0.0) || !(opt.renorm_dt >= opt.dt) || !(opt.t_final > opt.renorm_dt)) {
    throw Error("largest_lyapunov: need 0 < dt <= renorm_dt < t_final");
  }
  const long per_interval = std::max(1L, std::lround(opt.renorm_dt / opt.dt));
  const double interval = static_cast<double>(per_interval) * opt.dt;
  const long intervals = std::lround(opt.t_final / interval);

  Vec x = x0;
  Vec dir = Vec::Ones(x0.size());
  dir /= dir.norm();
  Vec y = x + opt.separation * dir;

  double sum = 0.0;
  double sum2 = 0.0;
  for (long n = 0; n < intervals; ++n) {
    for (long k = 0; k < per_interval; ++k) {
      x = rk4_step(f, x, opt.dt);
      y = rk4_step(f, y, opt.dt);
    }
    if (!x.allFinite() || !y.allFinite()) {
      throw IntegrationError(static_cast<double>(n + 1) * interval, "non-finite orbit");
    }
    Vec d = y - x;
    const double dist = d.norm();
    if (!(dist > 0.0)) {
      d = dir;
    } else {
      d /= dist;
    }
    const double rate = std::log(std::max(dist, 1e-300) / opt.separation) / interval;
    sum += rate;
    sum2 += rate * rate;
    y = x + opt.separation * d;
  }
  LyapunovEstimate est;
  est.intervals = intervals;
  est.value = sum / static_cast<double>(intervals);
  if (intervals > 1) {
    const double var = std::max(0.0, (sum2 - sum * est.value) / static_cast<double>(intervals - 1));
    est.standard_error = std::sqrt(var / static_cast<double>(intervals));
  }
  return est;
}

inline LyapunovEstimate largest_lyapunov(const ReducedParams& par, const ReducedPoint& x0,
                                         const LyapunovOptions& opt) {
  const auto field = [&par](const ReducedPoint& y) { return reduced_two_qubit_field(y, par); };
  return largest_lyapunov(field, x0, opt);
}

// ---------------------------------------------------------------------------
// Series.

inline std::vector<double> observable_series(const Trajectory& traj, const HermitianOperator& op) {
  std::vector<double> out;
  out.reserve(traj.states.size());
  for (const auto& s : traj.states) out.push_back(expectation(s, op));
  return out;
}

inline std::vector<double> observable_series(const DensityTrajectory& traj,
                                             const HermitianOperator& op) {
  std::vector<double> out;
  out.reserve(traj.states.size());
  for (const auto& r : traj.states) out.push_back(expectation(r, op));
  return out;
}

inline std::vector<double> fluctuation_series(const Trajectory& traj,
                                              const DistinguishedAlgebra& alg) {
  std::vector<double> out;
  out.reserve(traj.states.size());
  for (const auto& s : traj.states) out.push_back(invariant_fluctuation(s, alg));
  return out;
}

inline std::vector<double> fluctuation_series(const DensityTrajectory& traj,
                                              const DistinguishedAlgebra& alg) {
  std::vector<double> out;
  out.reserve(traj.states.size());
  for (const auto& r : traj.states) out.push_back(invariant_fluctuation(r, alg));
  return out;
}

inline std::vector<double> purity_series(const Trajectory& traj, const DistinguishedAlgebra& alg) {
  std::vector<double> out;
  out.reserve(traj.states.size());
  for (const auto& s : traj.states) out.push_back(generalized_purity(s, alg));
  return out;
}

}  // namespace cgq
