#pragma once

// Finite-dimensional states, operators and the coarse-graining measures built on a
// distinguished algebra of observables (generalized purity, invariant fluctuation,
// g-reduced state).

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cgq/errors.hpp"

namespace cgq {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using SparseCMatrix = Eigen::SparseMatrix<Complex>;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

namespace detail {

inline void require_dim(Index expected, Index got, const char* where) {
  if (expected != got) {
    throw DimensionMismatch(static_cast<std::size_t>(expected), static_cast<std::size_t>(got),
                            where);
  }
}

inline double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const CMatrix& m) {
  return max_abs(m - m.adjoint());
}

inline bool all_finite(const CVector& v) {
  return v.allFinite();
}

}  // namespace detail

/// Normalized complex amplitude vector, dimension >= 2.
class PureState {
public:
  explicit PureState(CVector amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() < 2) {
      throw Error("PureState: dimension must be at least 2");
    }
    if (!detail::all_finite(amplitudes_)) {
      throw Error("PureState: non-finite amplitude");
    }
    const double n = amplitudes_.norm();
    if (!(n > 0.0)) {
      throw Error("PureState: zero vector cannot be normalized");
    }
    amplitudes_ /= n;
  }

  static PureState basis(Index dim, Index k) {
    CVector v = CVector::Zero(dim);
    v(k) = 1.0;
    return PureState(std::move(v));
  }

  const CVector& amplitudes() const noexcept { return amplitudes_; }
  Index dim() const noexcept { return amplitudes_.size(); }
  Complex operator()(Index i) const { return amplitudes_(i); }

private:
  CVector amplitudes_;
};

/// Dense Hermitian matrix. A sparse copy is kept for the matrix-vector products that
/// dominate the open-system integrators.
class HermitianOperator {
public:
  explicit HermitianOperator(CMatrix matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols()) {
      throw Error("HermitianOperator: matrix must be square");
    }
    if (matrix_.rows() < 1) {
      throw Error("HermitianOperator: empty matrix");
    }
    const double defect = detail::hermiticity_defect(matrix_);
    if (!(defect <= 1e-12 * std::max(1.0, detail::max_abs(matrix_)))) {
      throw NotHermitian(defect);
    }
    sparse_ = matrix_.sparseView();
    sparse_.makeCompressed();
  }

  const CMatrix& matrix() const noexcept { return matrix_; }
  const SparseCMatrix& sparse() const noexcept { return sparse_; }
  Index dim() const noexcept { return matrix_.rows(); }

  CVector apply(const CVector& v) const { return sparse_ * v; }

private:
  CMatrix matrix_;
  SparseCMatrix sparse_;
};

/// Hermitian, unit-trace matrix. Positivity is deliberately not enforced here: the
/// g-reduced state can have negative eigenvalues.
class DensityMatrix {
public:
  explicit DensityMatrix(CMatrix matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1) {
      throw Error("DensityMatrix: matrix must be square and non-empty");
    }
    if (!matrix_.allFinite()) {
      throw Error("DensityMatrix: non-finite entry");
    }
    const double defect = detail::hermiticity_defect(matrix_);
    if (defect > 1e-10) {
      throw NotHermitian(defect);
    }
    const Complex tr = matrix_.trace();
    if (std::abs(tr - 1.0) > 1e-10) {
      throw Error("DensityMatrix: trace " + std::to_string(tr.real()) + " differs from 1");
    }
  }

  static DensityMatrix projector(const PureState& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
  }

  static DensityMatrix maximally_mixed(Index dim) {
    return DensityMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
  }

  const CMatrix& matrix() const noexcept { return matrix_; }
  Index dim() const noexcept { return matrix_.rows(); }

  double purity() const { return matrix_.cwiseAbs2().sum(); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

private:
  CMatrix matrix_;
};

/// Ordered generators L_l of the distinguished observables plus whatever bounds on the
/// purity and fluctuation are known for them.
struct DistinguishedAlgebra {
  std::vector<HermitianOperator> generators;
  std::string label;
  std::optional<double> purity_max;
  std::optional<double> fluctuation_min;

  DistinguishedAlgebra(std::vector<HermitianOperator> gens, std::string name,
                       std::optional<double> pmax = std::nullopt,
                       std::optional<double> fmin = std::nullopt)
      : generators(std::move(gens)),
        label(std::move(name)),
        purity_max(pmax),
        fluctuation_min(fmin) {
    if (generators.empty()) {
      throw Error("DistinguishedAlgebra '" + label + "': no generators");
    }
    for (const auto& g : generators) {
      detail::require_dim(generators.front().dim(), g.dim(), "DistinguishedAlgebra");
    }
  }

  Index dim() const noexcept { return generators.front().dim(); }
  std::size_t size() const noexcept { return generators.size(); }
};

// ---------------------------------------------------------------------------
// Expectations. Every expectation is a Rayleigh quotient, so all measures are
// homogeneous of degree zero in the amplitudes.

inline double expectation(const CVector& amplitudes, const HermitianOperator& op) {
  detail::require_dim(op.dim(), amplitudes.size(), "expectation");
  const double norm2 = amplitudes.squaredNorm();
  if (!(norm2 > 0.0)) {
    throw Error("expectation: zero vector");
  }
  const Complex value = amplitudes.dot(op.apply(amplitudes)) / norm2;
  if (std::abs(value.imag()) > 1e-12 * std::max(1.0, std::abs(value.real()))) {
    throw NotHermitian(std::abs(value.imag()));
  }
  return value.real();
}

inline double expectation(const PureState& state, const HermitianOperator& op) {
  return expectation(state.amplitudes(), op);
}

/// <L^2> - <L>^2, clamped at zero.
inline double variance(const CVector& amplitudes, const HermitianOperator& op) {
  detail::require_dim(op.dim(), amplitudes.size(), "variance");
  const double norm2 = amplitudes.squaredNorm();
  if (!(norm2 > 0.0)) {
    throw Error("variance: zero vector");
  }
  const CVector lv = op.apply(amplitudes);
  const double mean = amplitudes.dot(lv).real() / norm2;
  const double second = lv.squaredNorm() / norm2;
  return std::max(0.0, second - mean * mean);
}

inline double variance(const PureState& state, const HermitianOperator& op) {
  return variance(state.amplitudes(), op);
}

inline double generalized_purity(const CVector& amplitudes, const DistinguishedAlgebra& alg) {
  detail::require_dim(alg.dim(), amplitudes.size(), "generalized_purity");
  double sum = 0.0;
  for (const auto& l : alg.generators) {
    const double e = expectation(amplitudes, l);
    sum += e * e;
  }
  return sum;
}

inline double generalized_purity(const PureState& state, const DistinguishedAlgebra& alg) {
  return generalized_purity(state.amplitudes(), alg);
}

inline double invariant_fluctuation(const CVector& amplitudes, const DistinguishedAlgebra& alg) {
  detail::require_dim(alg.dim(), amplitudes.size(), "invariant_fluctuation");
  double sum = 0.0;
  for (const auto& l : alg.generators) {
    sum += variance(amplitudes, l);
  }
  return sum;
}

inline double invariant_fluctuation(const PureState& state, const DistinguishedAlgebra& alg) {
  return invariant_fluctuation(state.amplitudes(), alg);
}

// Mixed-state versions: Tr[rho L] and sum_l Tr[rho L_l^2] - Tr[rho L_l]^2.

inline double expectation(const DensityMatrix& rho, const HermitianOperator& op) {
  detail::require_dim(op.dim(), rho.dim(), "expectation");
  return (op.sparse() * rho.matrix()).trace().real();
}

inline double generalized_purity(const DensityMatrix& rho, const DistinguishedAlgebra& alg) {
  detail::require_dim(alg.dim(), rho.dim(), "generalized_purity");
  double sum = 0.0;
  for (const auto& l : alg.generators) {
    const double e = expectation(rho, l);
    sum += e * e;
  }
  return sum;
}

inline double invariant_fluctuation(const DensityMatrix& rho, const DistinguishedAlgebra& alg) {
  detail::require_dim(alg.dim(), rho.dim(), "invariant_fluctuation");
  double sum = 0.0;
  for (const auto& l : alg.generators) {
    const CMatrix lr = l.sparse() * rho.matrix();
    const double mean = lr.trace().real();
    const double second = (l.sparse() * lr).trace().real();
    sum += second - mean * mean;
  }
  return std::max(0.0, sum);
}

// ---------------------------------------------------------------------------
// Known extremal values of the measures.

enum class AlgebraKind { su2, two_qubit_local, two_mode_quadrature, custom };

inline AlgebraKind parse_algebra_kind(std::string_view name) {
  if (name == "su2") return AlgebraKind::su2;
  if (name == "two-qubit-local") return AlgebraKind::two_qubit_local;
  if (name == "two-mode-quadrature") return AlgebraKind::two_mode_quadrature;
  if (name == "custom") return AlgebraKind::custom;
  throw Error("unknown algebra kind '" + std::string(name) + "'");
}

struct AlgebraDescriptor {
  AlgebraKind kind = AlgebraKind::custom;
  /// Representation dimension 2j+1, used by su2 only.
  Index dim = 0;
  std::optional<double> fluctuation_min;
  std::optional<double> purity_max;
};

struct PurityBounds {
  std::optional<double> fluctuation_min;
  std::optional<double> purity_max;
};

/// Minimum invariant fluctuation and maximum generalized purity. For su(2) spin j these
/// are j and j^2 (so that they add up to the Casimir j(j+1)); the two-qubit local
/// algebra in Pauli units gives 4 and 2. The quadrature algebra {q1,q2,p1,p2} has
/// unbounded expectations, so only its fluctuation minimum (one per mode) is defined.
inline PurityBounds purity_bounds(const AlgebraDescriptor& desc) {
  switch (desc.kind) {
    case AlgebraKind::su2: {
      if (desc.dim < 2) {
        throw Error("purity_bounds: su2 requires dim >= 2");
      }
      const double j = 0.5 * static_cast<double>(desc.dim - 1);
      return {j, j * j};
    }
    case AlgebraKind::two_qubit_local:
      return {4.0, 2.0};
    case AlgebraKind::two_mode_quadrature:
      return {2.0, std::nullopt};
    case AlgebraKind::custom:
      if (!desc.fluctuation_min && !desc.purity_max) {
        throw Error("purity_bounds: custom algebra without user-supplied bounds");
      }
      return {desc.fluctuation_min, desc.purity_max};
  }
  throw Error("purity_bounds: unknown algebra kind");
}

// ---------------------------------------------------------------------------
// Reduced state and distances.

/// Hilbert-Schmidt orthogonal projection of rho onto span{1, L_1, ..., L_m}. Matches
/// every Tr[rho L_l] and the trace, but can be non-positive.
inline DensityMatrix g_reduced_state(const DensityMatrix& rho, const DistinguishedAlgebra& alg) {
  detail::require_dim(alg.dim(), rho.dim(), "g_reduced_state");
  const Index n = rho.dim();
  std::vector<CMatrix> basis;
  basis.reserve(alg.size() + 1);

  auto add = [&basis](CMatrix m) {
    for (const auto& e : basis) {
      const double overlap = (e.adjoint() * m).trace().real();
      m -= overlap * e;
    }
    const double norm = m.norm();
    if (norm > 1e-10) {
      basis.push_back(m / norm);
    }
  };
  add(CMatrix::Identity(n, n));
  for (const auto& l : alg.generators) {
    add(l.matrix());
  }

  CMatrix reduced = CMatrix::Zero(n, n);
  for (const auto& e : basis) {
    reduced += (e.adjoint() * rho.matrix()).trace().real() * e;
  }
  // Remove roundoff asymmetry and trace drift accumulated by the projection sums.
  reduced = 0.5 * (reduced + reduced.adjoint()).eval();
  reduced /= reduced.trace().real();
  return DensityMatrix(std::move(reduced));
}

inline double hs_distance(const DensityMatrix& a, const DensityMatrix& b) {
  detail::require_dim(a.dim(), b.dim(), "hs_distance");
  return (a.matrix() - b.matrix()).norm();
}

}  // namespace cgq
