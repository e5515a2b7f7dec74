#pragma once

// Operator families and model Hamiltonians: su(2) spin-j matrices, Pauli algebras,
// a truncated two-mode Fock space with its quadratures and Schwinger generators, the
// two-mode Bose-Hubbard Hamiltonian and a few small model Hamiltonians.

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "cgq/core.hpp"

namespace cgq {

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

struct Su2Generators {
  HermitianOperator jx;
  HermitianOperator jy;
  HermitianOperator jz;

  std::vector<HermitianOperator> as_vector() const { return {jx, jy, jz}; }
};

/// Angular-momentum matrices for spin j = (dim-1)/2 in the J_z eigenbasis ordered
/// m = j, j-1, ..., -j. J_+ has non-negative real matrix elements.
inline Su2Generators su2_generators(Index dim) {
  if (dim < 2) {
    throw Error("su2_generators: dim must be at least 2");
  }
  const double j = 0.5 * static_cast<double>(dim - 1);
  CMatrix jz = CMatrix::Zero(dim, dim);
  CMatrix jp = CMatrix::Zero(dim, dim);
  for (Index k = 0; k < dim; ++k) {
    const double m = j - static_cast<double>(k);
    jz(k, k) = m;
    if (k > 0) {
      // <m+1| J_+ |m>, with |m+1> at index k-1.
      jp(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
  }
  const CMatrix jm = jp.adjoint();
  return {HermitianOperator(0.5 * (jp + jm)), HermitianOperator(-0.5 * kI * (jp - jm)),
          HermitianOperator(jz)};
}

inline DistinguishedAlgebra su2_algebra(Index dim) {
  const auto bounds = purity_bounds({AlgebraKind::su2, dim, {}, {}});
  return DistinguishedAlgebra(su2_generators(dim).as_vector(),
                              "su2(dim=" + std::to_string(dim) + ")", bounds.purity_max,
                              bounds.fluctuation_min);
}

namespace pauli {

inline CMatrix x() {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
inline CMatrix y() {
  CMatrix m(2, 2);
  m << 0.0, -kI, kI, 0.0;
  return m;
}
inline CMatrix z() {
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

}  // namespace pauli

/// Single qubit with generators {sigma_x, sigma_y, sigma_z}. Every pure state has
/// purity 1 and fluctuation 2 here.
inline DistinguishedAlgebra qubit_algebra() {
  return DistinguishedAlgebra({HermitianOperator(pauli::x()), HermitianOperator(pauli::y()),
                               HermitianOperator(pauli::z())},
                              "qubit-pauli", 1.0, 2.0);
}

/// sigma^1_{x,y,z} (x) 1 and 1 (x) sigma^2_{x,y,z}, basis |00>,|01>,|10>,|11> with the
/// first qubit most significant.
inline DistinguishedAlgebra two_qubit_local_algebra() {
  const CMatrix id = CMatrix::Identity(2, 2);
  std::vector<HermitianOperator> gens;
  for (const CMatrix& s : {pauli::x(), pauli::y(), pauli::z()}) {
    gens.emplace_back(kron(s, id));
  }
  for (const CMatrix& s : {pauli::x(), pauli::y(), pauli::z()}) {
    gens.emplace_back(kron(id, s));
  }
  const auto bounds = purity_bounds({AlgebraKind::two_qubit_local, 0, {}, {}});
  return DistinguishedAlgebra(std::move(gens), "two-qubit-local", bounds.purity_max,
                              bounds.fluctuation_min);
}

// ---------------------------------------------------------------------------
// Two bosonic modes truncated at n_max quanta each.

struct FockSpace {
  int cutoff = 8;

  explicit FockSpace(int n_max) : cutoff(n_max) {
    if (n_max < 1) {
      throw Error("FockSpace: cutoff must be at least 1");
    }
  }

  Index per_mode() const noexcept { return cutoff + 1; }
  Index dim() const noexcept { return per_mode() * per_mode(); }
  Index index(int n1, int n2) const noexcept { return n1 * per_mode() + n2; }
  int n1_of(Index k) const noexcept { return static_cast<int>(k / per_mode()); }
  int n2_of(Index k) const noexcept { return static_cast<int>(k % per_mode()); }
};

inline PureState fock_state(const FockSpace& space, int n1, int n2) {
  if (n1 < 0 || n2 < 0 || n1 > space.cutoff || n2 > space.cutoff) {
    throw Error("fock_state: occupation outside the truncated space");
  }
  return PureState::basis(space.dim(), space.index(n1, n2));
}

struct FockOperators {
  CMatrix a1;
  CMatrix a2;
  HermitianOperator q1;
  HermitianOperator q2;
  HermitianOperator p1;
  HermitianOperator p2;
  HermitianOperator n1;
  HermitianOperator n2;
};

namespace detail {

inline CMatrix truncated_annihilator(Index per_mode) {
  CMatrix a = CMatrix::Zero(per_mode, per_mode);
  for (Index n = 1; n < per_mode; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

}  // namespace detail

/// a_j, q_j = (a_j^dagger + a_j)/sqrt(2), p_j = i(a_j^dagger - a_j)/sqrt(2), n_j.
inline FockOperators fock_operators(const FockSpace& space) {
  const CMatrix a = detail::truncated_annihilator(space.per_mode());
  const CMatrix id = CMatrix::Identity(space.per_mode(), space.per_mode());
  CMatrix a1 = kron(a, id);
  CMatrix a2 = kron(id, a);
  const double s = 1.0 / std::sqrt(2.0);
  CMatrix q1 = s * (a1.adjoint() + a1);
  CMatrix q2 = s * (a2.adjoint() + a2);
  CMatrix p1 = s * kI * (a1.adjoint() - a1);
  CMatrix p2 = s * kI * (a2.adjoint() - a2);
  CMatrix n1 = CMatrix::Zero(space.dim(), space.dim());
  CMatrix n2 = CMatrix::Zero(space.dim(), space.dim());
  for (Index k = 0; k < space.dim(); ++k) {
    n1(k, k) = space.n1_of(k);
    n2(k, k) = space.n2_of(k);
  }
  return {std::move(a1),
          std::move(a2),
          HermitianOperator(std::move(q1)),
          HermitianOperator(std::move(q2)),
          HermitianOperator(std::move(p1)),
          HermitianOperator(std::move(p2)),
          HermitianOperator(std::move(n1)),
          HermitianOperator(std::move(n2))};
}

/// Schwinger realization: J_x = (a1^+ a2 + a2^+ a1)/2, J_y = i(a1^+ a2 - a2^+ a1)/2,
/// J_z = (n2 - n1)/2. With these signs J_+ = a2^+ a1, so on the sector of N quanta
/// ordered by n1 = 0..N (m = N/2 - n1) the matrices coincide entry for entry with
/// su2_generators(N + 1); see SectorEmbedding.
inline Su2Generators schwinger_generators(const FockSpace& space) {
  const Index d = space.dim();
  CMatrix hop = CMatrix::Zero(d, d);  // a2^+ a1
  CMatrix jz = CMatrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) {
    const int n1 = space.n1_of(k);
    const int n2 = space.n2_of(k);
    jz(k, k) = 0.5 * (n2 - n1);
    if (n1 > 0 && n2 < space.cutoff) {
      hop(space.index(n1 - 1, n2 + 1), k) = std::sqrt(static_cast<double>(n1) * (n2 + 1));
    }
  }
  const CMatrix up = hop.adjoint();  // a1^+ a2
  return {HermitianOperator(0.5 * (up + hop)), HermitianOperator(0.5 * kI * (up - hop)),
          HermitianOperator(jz)};
}

/// The (N+1)-dimensional sector of fixed total occupation N, basis ordered n1 = 0..N.
class SectorEmbedding {
public:
  SectorEmbedding(const FockSpace& space, int total) : space_(space), total_(total) {
    if (total < 0 || total > space.cutoff) {
      throw Error("SectorEmbedding: sector N=" + std::to_string(total) +
                  " is not fully inside the truncated space");
    }
    for (int n1 = 0; n1 <= total; ++n1) {
      indices_.push_back(space.index(n1, total - n1));
    }
  }

  int total() const noexcept { return total_; }
  Index dim() const noexcept { return static_cast<Index>(indices_.size()); }
  const std::vector<Index>& indices() const noexcept { return indices_; }

  CMatrix restrict(const CMatrix& full) const {
    detail::require_dim(space_.dim(), full.rows(), "SectorEmbedding::restrict");
    CMatrix out(dim(), dim());
    for (Index i = 0; i < dim(); ++i) {
      for (Index j = 0; j < dim(); ++j) {
        out(i, j) = full(indices_[i], indices_[j]);
      }
    }
    return out;
  }

  /// Largest |entry| coupling the sector to its complement.
  double leakage(const CMatrix& full) const {
    double worst = 0.0;
    std::vector<bool> inside(static_cast<std::size_t>(space_.dim()), false);
    for (Index k : indices_) inside[static_cast<std::size_t>(k)] = true;
    for (Index k : indices_) {
      for (Index r = 0; r < space_.dim(); ++r) {
        if (!inside[static_cast<std::size_t>(r)]) {
          worst = std::max({worst, std::abs(full(r, k)), std::abs(full(k, r))});
        }
      }
    }
    return worst;
  }

  CVector embed(const CVector& sector_vector) const {
    detail::require_dim(dim(), sector_vector.size(), "SectorEmbedding::embed");
    CVector out = CVector::Zero(space_.dim());
    for (Index i = 0; i < dim(); ++i) out(indices_[i]) = sector_vector(i);
    return out;
  }

private:
  FockSpace space_;
  int total_;
  std::vector<Index> indices_;
};

struct BoseHubbardParams {
  double epsilon1 = 0.0;
  double epsilon2 = 0.0;
  double alpha = 1.0;
  double mu = 0.1;
};

/// eps1 n1 + eps2 n2 + alpha (a1^+ a2 + a2^+ a1) + mu (a1^+2 a1^2 + a2^+2 a2^2).
/// The quartic term is n(n-1) per mode and is written on the diagonal directly, so the
/// matrix is exactly block diagonal over total-number sectors.
inline HermitianOperator bose_hubbard_hamiltonian(const FockSpace& space,
                                                  const BoseHubbardParams& p) {
  const Index d = space.dim();
  CMatrix h = CMatrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) {
    const double n1 = space.n1_of(k);
    const double n2 = space.n2_of(k);
    h(k, k) = p.epsilon1 * n1 + p.epsilon2 * n2 + p.mu * (n1 * (n1 - 1.0) + n2 * (n2 - 1.0));
    if (n1 > 0 && n2 < space.cutoff) {
      const Index r = space.index(static_cast<int>(n1) - 1, static_cast<int>(n2) + 1);
      const double amp = p.alpha * std::sqrt(n1 * (n2 + 1.0));
      h(r, k) += amp;
      h(k, r) += amp;
    }
  }
  return HermitianOperator(std::move(h));
}

/// {q1, q2, p1, p2}; only the fluctuation bound (1 per mode) exists.
inline DistinguishedAlgebra quadrature_algebra(const FockSpace& space) {
  auto ops = fock_operators(space);
  const auto bounds = purity_bounds({AlgebraKind::two_mode_quadrature, 0, {}, {}});
  return DistinguishedAlgebra({ops.q1, ops.q2, ops.p1, ops.p2}, "H4", bounds.purity_max,
                              bounds.fluctuation_min);
}

/// Schwinger J's on the whole truncated space. No bounds are attached because the
/// extremal values depend on the occupation sector (j = N/2).
inline DistinguishedAlgebra schwinger_algebra(const FockSpace& space) {
  return DistinguishedAlgebra(schwinger_generators(space).as_vector(), "su2");
}

/// Spin coherent state obtained by rotating |j, m=j> to polar angle theta, azimuth phi.
inline PureState spin_coherent_state(Index dim, double theta, double phi) {
  if (dim < 2) throw Error("spin_coherent_state: dim must be at least 2");
  const int two_j = static_cast<int>(dim - 1);
  CVector c(dim);
  const double ch = std::cos(0.5 * theta);
  const double sh = std::sin(0.5 * theta);
  for (int k = 0; k <= two_j; ++k) {
    // |m> with m = j - k; amplitude sqrt(C(2j, k)) cos^(2j-k) sin^k e^{i k phi}.
    const double binom = std::exp(std::lgamma(two_j + 1.0) - std::lgamma(k + 1.0) -
                                  std::lgamma(two_j - k + 1.0));
    c(k) = std::sqrt(binom) * std::pow(ch, two_j - k) * std::pow(sh, k) *
           std::polar(1.0, static_cast<double>(k) * phi);
  }
  return PureState(std::move(c));
}

// ---------------------------------------------------------------------------
// Model Hamiltonians.

enum class ModelKind {
  /// omega (s1z + s2z) + mu s1z s2z
  two_qubit_symmetric,
  /// omega (s1z + s2z) + mu s1x s2x
  two_qubit_nonsymmetric,
  /// J_z - 2 J_x + mu J_z^2 in dimension `dim`
  spin_nonlinear,
  /// -2 alpha J_x + 2 epsilon J_z + mu J_z^2, the Bose-Hubbard dimer as printed in su(2)
  /// form. The exact restriction of the Fock-space Hamiltonian to a fixed-N sector is
  /// 2 alpha J_x + epsilon J_z + 2 mu J_z^2 + const, so this form is not used by the
  /// scenarios.
  bose_hubbard_su2,
};

inline ModelKind parse_model_kind(std::string_view name) {
  if (name == "two-qubit-symmetric") return ModelKind::two_qubit_symmetric;
  if (name == "two-qubit-nonsymmetric") return ModelKind::two_qubit_nonsymmetric;
  if (name == "spin-nonlinear") return ModelKind::spin_nonlinear;
  if (name == "bose-hubbard-su2") return ModelKind::bose_hubbard_su2;
  throw Error("unknown model kind '" + std::string(name) + "'");
}

struct ModelParams {
  double omega = 1.0;
  double mu = 0.0;
  double alpha = 1.0;
  double epsilon = 0.0;
  Index dim = 3;
};

inline HermitianOperator model_hamiltonian(ModelKind kind, const ModelParams& p) {
  const CMatrix id = CMatrix::Identity(2, 2);
  switch (kind) {
    case ModelKind::two_qubit_symmetric:
      return HermitianOperator(p.omega * (kron(pauli::z(), id) + kron(id, pauli::z())) +
                               p.mu * kron(pauli::z(), pauli::z()));
    case ModelKind::two_qubit_nonsymmetric:
      return HermitianOperator(p.omega * (kron(pauli::z(), id) + kron(id, pauli::z())) +
                               p.mu * kron(pauli::x(), pauli::x()));
    case ModelKind::spin_nonlinear: {
      const auto j = su2_generators(p.dim);
      const CMatrix& jz = j.jz.matrix();
      return HermitianOperator(jz - 2.0 * j.jx.matrix() + p.mu * jz * jz);
    }
    case ModelKind::bose_hubbard_su2: {
      const auto j = su2_generators(p.dim);
      const CMatrix& jz = j.jz.matrix();
      return HermitianOperator(-2.0 * p.alpha * j.jx.matrix() + 2.0 * p.epsilon * jz +
                               p.mu * jz * jz);
    }
  }
  throw Error("model_hamiltonian: unknown kind");
}

}  // namespace cgq
