#pragma once

// Real canonical picture of a pure state: x = (q, p) in R^{2N} with
//   q_i = (c_i^* + c_i)/sqrt(2),   p_i = i (c_i^* - c_i)/sqrt(2),
// i.e. c = (q + i p)/sqrt(2), and the standard symplectic form [[0, 1], [-1, 0]].
// Gradients are taken of Rayleigh-quotient expectations, so they are orthogonal to x
// and every Hamiltonian or constrained field built from them is tangent to the sphere.

#include <cmath>
#include <optional>

#include "cgq/core.hpp"

namespace cgq {

struct CanonicalPoint {
  RVector x;

  Index half_dim() const noexcept { return x.size() / 2; }
  auto q() const { return x.head(half_dim()); }
  auto p() const { return x.tail(half_dim()); }
};

inline CanonicalPoint to_canonical(const CVector& c) {
  const Index n = c.size();
  RVector x(2 * n);
  const double s = std::sqrt(2.0);
  x.head(n) = s * c.real();
  x.tail(n) = s * c.imag();
  return {std::move(x)};
}

inline CanonicalPoint to_canonical(const PureState& psi) { return to_canonical(psi.amplitudes()); }

/// Unnormalized amplitudes c = (q + i p)/sqrt(2).
inline CVector amplitudes_of(const RVector& x) {
  if (x.size() % 2 != 0 || x.size() == 0) {
    throw Error("canonical point must have even, non-zero length");
  }
  const Index n = x.size() / 2;
  CVector c(n);
  const double s = 1.0 / std::sqrt(2.0);
  for (Index i = 0; i < n; ++i) c(i) = Complex(s * x(i), s * x(n + i));
  return c;
}

inline PureState from_canonical(const CanonicalPoint& point) {
  if (!(point.x.squaredNorm() > 0.0)) {
    throw Error("from_canonical: zero point");
  }
  return PureState(amplitudes_of(point.x));
}

/// Applies the standard symplectic matrix: (v_q, v_p) -> (v_p, -v_q).
inline RVector apply_symplectic(const RVector& v) {
  const Index n = v.size() / 2;
  RVector out(v.size());
  out.head(n) = v.tail(n);
  out.tail(n) = -v.head(n);
  return out;
}

inline Eigen::MatrixXd symplectic_matrix(Index n) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  w.topRightCorner(n, n).setIdentity();
  w.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  return w;
}

struct ValueGradient {
  double value = 0.0;
  RVector gradient;
};

namespace detail {

inline double checked_norm2(const CVector& c, const char* where) {
  const double s = c.squaredNorm();
  if (!(s > 0.0)) throw Error(std::string(where) + ": zero point");
  return s;
}

/// sqrt(2)/s * (Re v, Im v): the real gradient of Re<c|.|c>/s given v = (L - <L>) c.
inline RVector pack_gradient(const CVector& v, double s) {
  const Index n = v.size();
  RVector g(2 * n);
  const double f = std::sqrt(2.0) / s;
  g.head(n) = f * v.real();
  g.tail(n) = f * v.imag();
  return g;
}

}  // namespace detail

/// <L>(x) and its gradient. For ||c|| = 1 the gradient is sqrt(2) (Re, Im) of
/// (L - <L>) c; the subtracted term is what keeps it orthogonal to x.
inline ValueGradient expectation_with_gradient(const RVector& x, const HermitianOperator& op) {
  const CVector c = amplitudes_of(x);
  detail::require_dim(op.dim(), c.size(), "expectation_gradient");
  const double s = detail::checked_norm2(c, "expectation_gradient");
  const CVector lc = op.apply(c);
  const double mean = c.dot(lc).real() / s;
  return {mean, detail::pack_gradient(lc - mean * c, s)};
}

inline RVector expectation_gradient(const CanonicalPoint& point, const HermitianOperator& op) {
  return expectation_with_gradient(point.x, op).gradient;
}

/// omega grad <H>. Pushed through c = (q + i p)/sqrt(2) this is -i (H - <H>) c: the
/// Schroedinger velocity with the global-phase rate <H> removed.
inline RVector hamiltonian_vector_field(const CanonicalPoint& point, const HermitianOperator& h) {
  return apply_symplectic(expectation_gradient(point, h));
}

/// omega^{ij} dF_i dG_j = dF_q . dG_p - dF_p . dG_q
inline double poisson_bracket(const RVector& grad_f, const RVector& grad_g) {
  if (grad_f.size() != grad_g.size()) {
    throw DimensionMismatch(static_cast<std::size_t>(grad_f.size()),
                            static_cast<std::size_t>(grad_g.size()), "poisson_bracket");
  }
  return grad_f.dot(apply_symplectic(grad_g));
}

enum class ConstraintForm {
  /// Phi = P_g - purity_max
  purity,
  /// Phi = Delta_g - fluctuation_min
  fluctuation,
};

/// Phi and its gradient for the chosen form. Phi <= 0 everywhere and attains 0 exactly on
/// the g-coherent states, so its gradient vanishes there.
inline ValueGradient purity_constraint(const RVector& x, const DistinguishedAlgebra& alg,
                                       ConstraintForm form = ConstraintForm::purity) {
  const CVector c = amplitudes_of(x);
  detail::require_dim(alg.dim(), c.size(), "purity_constraint");
  const double s = detail::checked_norm2(c, "purity_constraint");
  const Index n = c.size();

  if (form == ConstraintForm::purity) {
    if (!alg.purity_max) {
      throw Error("purity_constraint: algebra '" + alg.label + "' has no purity bound");
    }
    double purity = 0.0;
    CVector acc = CVector::Zero(n);
    for (const auto& l : alg.generators) {
      const CVector lc = l.apply(c);
      const double mean = c.dot(lc).real() / s;
      purity += mean * mean;
      acc += (2.0 * mean) * (lc - mean * c);
    }
    return {purity - *alg.purity_max, detail::pack_gradient(acc, s)};
  }

  if (!alg.fluctuation_min) {
    throw Error("purity_constraint: algebra '" + alg.label + "' has no fluctuation bound");
  }
  double fluct = 0.0;
  CVector acc = CVector::Zero(n);
  for (const auto& l : alg.generators) {
    const CVector lc = l.apply(c);
    const CVector llc = l.apply(lc);
    const double mean = c.dot(lc).real() / s;
    const double second = lc.squaredNorm() / s;
    fluct += second - mean * mean;
    // grad <L^2> - 2 <L> grad <L>
    acc += (llc - second * c) - (2.0 * mean) * (lc - mean * c);
  }
  return {fluct - *alg.fluctuation_min, detail::pack_gradient(acc, s)};
}

inline ValueGradient purity_constraint(const CanonicalPoint& point, const DistinguishedAlgebra& alg,
                                       ConstraintForm form = ConstraintForm::purity) {
  return purity_constraint(point.x, alg, form);
}

}  // namespace cgq
