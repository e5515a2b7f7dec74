#pragma once

// Purity-constrained Schroedinger flow and its weak-coupling simplification.
//
// Full mode integrates, in canonical coordinates,
//     xdot = omega grad H - lambda grad Phi,   lambda = {Phi, H} / |grad Phi|^2,
// which keeps every level set of Phi invariant. Simplified mode integrates the state
// equation
//     psi' = -i H psi - gamma sum_l (L_l - <L_l>)^2 psi     (radial part removed),
// a projected gradient descent of the invariant fluctuation plus the Schroedinger term.

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "cgq/core.hpp"
#include "cgq/geometry.hpp"
#include "cgq/rk4.hpp"

namespace cgq {

enum class FlowMode { full, simplified };

struct ConstrainedFlowSpec {
  HermitianOperator hamiltonian;
  DistinguishedAlgebra algebra;
  ConstraintForm constraint_form = ConstraintForm::purity;
  FlowMode mode = FlowMode::full;
  /// Strength of the fluctuation drift in simplified mode.
  double coupling = 0.0;
  /// |grad Phi|^2 at or below this makes the multiplier singular.
  double singular_floor = 1e-12;

  ConstrainedFlowSpec(HermitianOperator h, DistinguishedAlgebra alg,
                      ConstraintForm form = ConstraintForm::purity, FlowMode m = FlowMode::full,
                      double gamma = 0.0)
      : hamiltonian(std::move(h)),
        algebra(std::move(alg)),
        constraint_form(form),
        mode(m),
        coupling(gamma) {
    detail::require_dim(hamiltonian.dim(), algebra.dim(), "ConstrainedFlowSpec");
    if (!(coupling >= 0.0)) {
      throw Error("ConstrainedFlowSpec: coupling must be non-negative");
    }
  }

  Index dim() const noexcept { return hamiltonian.dim(); }
};

/// lambda = {Phi, H} / |grad Phi|^2. Throws MultiplierSingular when the denominator is at
/// or below the singular floor, e.g. on the g-coherent manifold itself where grad Phi = 0.
inline double lagrange_multiplier(const RVector& x, const ConstrainedFlowSpec& spec) {
  const auto phi = purity_constraint(x, spec.algebra, spec.constraint_form);
  const RVector grad_h = expectation_with_gradient(x, spec.hamiltonian).gradient;
  const double num = poisson_bracket(phi.gradient, grad_h);
  const double den = phi.gradient.squaredNorm();
  if (!(den > spec.singular_floor)) {
    throw MultiplierSingular(num, den);
  }
  return num / den;
}

inline double lagrange_multiplier(const CanonicalPoint& point, const ConstrainedFlowSpec& spec) {
  return lagrange_multiplier(point.x, spec);
}

/// omega grad H - lambda grad Phi. At a singular point the constraint term is dropped as
/// long as the bracket is consistent with a vanishing gradient (|{Phi,H}| bounded by
/// sqrt(floor) |grad H|, which Cauchy-Schwarz guarantees for finite input); anything
/// else, in practice a non-finite bracket, is rethrown.
inline RVector constrained_field(const RVector& x, const ConstrainedFlowSpec& spec) {
  const auto phi = purity_constraint(x, spec.algebra, spec.constraint_form);
  const RVector grad_h = expectation_with_gradient(x, spec.hamiltonian).gradient;
  RVector field = apply_symplectic(grad_h);
  const double num = phi.gradient.dot(field);
  const double den = phi.gradient.squaredNorm();
  if (den > spec.singular_floor) {
    field -= (num / den) * phi.gradient;
    return field;
  }
  const double zero_tol = std::sqrt(spec.singular_floor) * std::max(1.0, grad_h.norm());
  if (!(std::abs(num) <= zero_tol)) {
    throw MultiplierSingular(num, den);
  }
  return field;
}

inline RVector constrained_field(const CanonicalPoint& point, const ConstrainedFlowSpec& spec) {
  return constrained_field(point.x, spec);
}

/// -i H psi - gamma sum_l (L_l - <L_l>)^2 psi, minus its component along psi.
inline CVector simplified_field(const CVector& psi, const ConstrainedFlowSpec& spec) {
  detail::require_dim(spec.dim(), psi.size(), "simplified_field");
  const double s = psi.squaredNorm();
  CVector v = -kI * spec.hamiltonian.apply(psi);
  for (const auto& l : spec.algebra.generators) {
    const CVector lpsi = l.apply(psi);
    const double mean = psi.dot(lpsi).real() / s;
    const CVector dev = lpsi - mean * psi;
    v -= spec.coupling * (l.apply(dev) - mean * dev);
  }
  v -= (psi.dot(v).real() / s) * psi;
  return v;
}

inline CVector simplified_field(const PureState& psi, const ConstrainedFlowSpec& spec) {
  return simplified_field(psi.amplitudes(), spec);
}

// ---------------------------------------------------------------------------
// Weak-coupling test [H, L] = lambda L.

struct WcaEntry {
  Complex lambda;
  double residual = 0.0;
};

struct WcaReport {
  std::vector<WcaEntry> entries;
  bool satisfied = true;
};

/// Least-squares lambda_l = <L_l, [H, L_l]>_HS / <L_l, L_l>_HS and the Frobenius norm of
/// [H, L_l] - lambda_l L_l. Accepts non-Hermitian L (ladder operators).
inline WcaReport wca_check(const CMatrix& h, const std::vector<CMatrix>& ls, double tol) {
  WcaReport report;
  for (const auto& l : ls) {
    detail::require_dim(h.rows(), l.rows(), "wca_check");
    const CMatrix c = h * l - l * h;
    const double ll = l.squaredNorm();
    const Complex lambda = ll > 0.0 ? (l.adjoint() * c).trace() / ll : Complex(0.0);
    const double residual = (c - lambda * l).norm();
    report.entries.push_back({lambda, residual});
    report.satisfied = report.satisfied && residual < tol;
  }
  return report;
}

inline WcaReport wca_check(const HermitianOperator& h, const DistinguishedAlgebra& alg,
                           double tol) {
  std::vector<CMatrix> ls;
  for (const auto& l : alg.generators) ls.push_back(l.matrix());
  return wca_check(h.matrix(), ls, tol);
}

// ---------------------------------------------------------------------------
// Integration.

struct FlowDiagnostics {
  /// NaN when the algebra has no bound for the chosen constraint form.
  double phi = 0.0;
  double purity = 0.0;
  double fluctuation = 0.0;
  double energy = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<PureState> states;
  std::vector<FlowDiagnostics> diagnostics;
  /// Largest |(||psi|| - 1)| seen after an RK4 step, before renormalization.
  double max_norm_defect = 0.0;
  /// Newton iterations spent on constraint projection.
  long projection_iterations = 0;
};

struct IntegrationOptions {
  double dt = 1e-3;
  double t_final = 1.0;
  /// Record every `sample_stride`-th step (step 0 is always recorded).
  long sample_stride = 1;
  bool projection = false;
  /// Projection kicks in when |Phi| exceeds this...
  double projection_trigger = 1e-9;
  /// ...and iterates Newton steps along grad Phi until |Phi| is below this.
  double projection_target = 1e-10;
  int max_newton_steps = 100;
};

inline FlowDiagnostics flow_diagnostics(const CVector& psi, const ConstrainedFlowSpec& spec) {
  FlowDiagnostics d;
  d.purity = generalized_purity(psi, spec.algebra);
  d.fluctuation = invariant_fluctuation(psi, spec.algebra);
  d.energy = expectation(psi, spec.hamiltonian);
  const auto& bound = spec.constraint_form == ConstraintForm::purity ? spec.algebra.purity_max
                                                                      : spec.algebra.fluctuation_min;
  if (bound) {
    d.phi = spec.constraint_form == ConstraintForm::purity ? d.purity - *bound
                                                            : d.fluctuation - *bound;
  } else {
    d.phi = std::numeric_limits<double>::quiet_NaN();
  }
  return d;
}

namespace detail {

inline long step_count(const IntegrationOptions& opt) {
  if (!(opt.dt > 0.0)) throw Error("integration: dt must be positive");
  if (!(opt.t_final > opt.dt)) throw Error("integration: t_final must exceed dt");
  if (opt.sample_stride < 1) throw Error("integration: sample stride must be >= 1");
  return std::lround(opt.t_final / opt.dt);
}

/// Newton iterations x -= Phi grad Phi / |grad Phi|^2 followed by renormalization.
/// Phi is quadratic around its maximum, so each iteration cuts |Phi| by about 4.
inline long project_onto_constraint(RVector& x, const ConstrainedFlowSpec& spec,
                                    const IntegrationOptions& opt) {
  auto phi = purity_constraint(x, spec.algebra, spec.constraint_form);
  if (std::abs(phi.value) <= opt.projection_trigger) return 0;
  long iterations = 0;
  const double target_norm = std::sqrt(2.0);
  while (std::abs(phi.value) > opt.projection_target && iterations < opt.max_newton_steps) {
    const double g2 = phi.gradient.squaredNorm();
    if (!(g2 > 0.0)) break;
    x -= (phi.value / g2) * phi.gradient;
    x *= target_norm / x.norm();
    phi = purity_constraint(x, spec.algebra, spec.constraint_form);
    ++iterations;
  }
  return iterations;
}

}  // namespace detail

/// Fixed-step RK4 of the flow. After every step the state is renormalized and,
/// with projection enabled, pulled back to Phi = 0.
inline Trajectory integrate_flow(const ConstrainedFlowSpec& spec, const PureState& initial,
                                 const IntegrationOptions& opt) {
  detail::require_dim(spec.dim(), initial.dim(), "integrate_flow");
  const long steps = detail::step_count(opt);
  if (opt.projection && spec.mode == FlowMode::full) {
    // Fail early if the bound is missing.
    (void)purity_constraint(to_canonical(initial).x, spec.algebra, spec.constraint_form);
  }

  Trajectory traj;
  auto record = [&](long k, const CVector& psi) {
    traj.times.push_back(static_cast<double>(k) * opt.dt);
    traj.states.emplace_back(psi);
    traj.diagnostics.push_back(flow_diagnostics(psi, spec));
  };

  if (spec.mode == FlowMode::full) {
    RVector x = to_canonical(initial).x;
    const double target_norm = std::sqrt(2.0);
    const auto field = [&spec](const RVector& y) { return constrained_field(y, spec); };
    record(0, amplitudes_of(x));
    for (long k = 1; k <= steps; ++k) {
      x = rk4_step(field, x, opt.dt);
      if (!x.allFinite()) {
        throw IntegrationError(static_cast<double>(k) * opt.dt, "non-finite state");
      }
      const double norm = x.norm();
      traj.max_norm_defect = std::max(traj.max_norm_defect, std::abs(norm / target_norm - 1.0));
      x *= target_norm / norm;
      if (opt.projection) {
        traj.projection_iterations += detail::project_onto_constraint(x, spec, opt);
      }
      if (k % opt.sample_stride == 0 || k == steps) record(k, amplitudes_of(x));
    }
  } else {
    CVector psi = initial.amplitudes();
    const auto field = [&spec](const CVector& y) { return simplified_field(y, spec); };
    record(0, psi);
    for (long k = 1; k <= steps; ++k) {
      psi = rk4_step(field, psi, opt.dt);
      if (!psi.allFinite()) {
        throw IntegrationError(static_cast<double>(k) * opt.dt, "non-finite state");
      }
      const double norm = psi.norm();
      traj.max_norm_defect = std::max(traj.max_norm_defect, std::abs(norm - 1.0));
      psi /= norm;
      if (k % opt.sample_stride == 0 || k == steps) record(k, psi);
    }
  }
  return traj;
}

}  // namespace cgq
