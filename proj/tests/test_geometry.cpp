#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cgq/algebras.hpp"
#include "cgq/geometry.hpp"
#include "cgq/rk4.hpp"
#include "scenarios.hpp"

using namespace cgq;
using cgq::cli::gradient_error;
using cgq::cli::random_canonical_point;

TEST(Canonical, QubitConventions) {
  auto x = to_canonical(PureState::basis(2, 0)).x;
  EXPECT_NEAR(x(0), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(x(1), 0.0);
  EXPECT_EQ(x(2), 0.0);
  EXPECT_EQ(x(3), 0.0);
  CVector v = CVector::Zero(2);
  v(0) = kI;
  x = to_canonical(PureState(v)).x;
  EXPECT_EQ(x(0), 0.0);
  EXPECT_NEAR(x(2), std::sqrt(2.0), 1e-15);
}

TEST(Canonical, RoundTripAndNorm) {
  std::mt19937_64 rng(1);
  for (int n = 0; n < 20; ++n) {
    const RVector x = random_canonical_point(rng, 4);
    EXPECT_NEAR(x.squaredNorm(), 2.0, 1e-12);
    const PureState s = from_canonical({x});
    EXPECT_LT((to_canonical(s).x - x).norm(), 1e-12);
  }
  EXPECT_THROW(from_canonical({RVector::Zero(4)}), Error);
}

TEST(Symplectic, Structure) {
  const auto w = symplectic_matrix(3);
  EXPECT_LT((w * w + Eigen::MatrixXd::Identity(6, 6)).norm(), 1e-15);
  EXPECT_LT((w + w.transpose()).norm(), 1e-15);
  RVector v = RVector::LinSpaced(6, 1.0, 6.0);
  EXPECT_LT((apply_symplectic(v) - w * v).norm(), 1e-15);
}

TEST(ExpectationGradient, EigenstateIsCritical) {
  const HermitianOperator sz(pauli::z());
  const auto p = to_canonical(PureState::basis(2, 0));
  const RVector g = expectation_gradient(p, sz);
  EXPECT_LT(g.norm(), 1e-15);
}

TEST(ExpectationGradient, OrthogonalToPointAndMatchesDifferences) {
  std::mt19937_64 rng(2);
  const HermitianOperator sx(pauli::x());
  for (int n = 0; n < 100; ++n) {
    const RVector x = random_canonical_point(rng, 2);
    const RVector g = expectation_with_gradient(x, sx).gradient;
    EXPECT_LT(std::abs(g.dot(x)), 1e-12);
    EXPECT_LT(gradient_error([&](const RVector& y) { return expectation_with_gradient(y, sx).value; },
                             x, g),
              1e-6);
  }
}

TEST(HamiltonianField, EnergyConservedAndSchroedingerEquivalent) {
  std::mt19937_64 rng(3);
  const auto j = su2_generators(4);
  const HermitianOperator h(j.jz.matrix() - 0.7 * j.jx.matrix() +
                            0.3 * j.jz.matrix() * j.jz.matrix());
  for (int n = 0; n < 20; ++n) {
    const RVector x = random_canonical_point(rng, 4);
    const auto p = CanonicalPoint{x};
    const RVector gh = expectation_gradient(p, h);
    EXPECT_LT(std::abs(poisson_bracket(gh, gh)), 1e-15);
    // Pushed through c = (q + ip)/sqrt(2), the field is -i(H - <H>)c.
    const CVector c = amplitudes_of(x);
    const double e = expectation(c, h);
    const CVector expected = -kI * (h.apply(c) - e * c);
    EXPECT_LT((amplitudes_of(hamiltonian_vector_field(p, h)) - expected).norm(), 1e-10);
  }
}

TEST(HamiltonianField, QubitPropagatorOracle) {
  const HermitianOperator h(pauli::z());
  CVector plus(2);
  plus << 1.0, 1.0;
  RVector x = to_canonical(PureState(plus)).x;
  const auto f = [&h](const RVector& y) { return hamiltonian_vector_field({y}, h); };
  double worst = 0.0;
  const double dt = 1e-3;
  for (int k = 1; k <= 10000; ++k) {
    x = rk4_step(f, x, dt);
    const double t = k * dt;
    // exp(-i sz t)|+> up to the global phase exp(i<H>t) = 1.
    CVector exact(2);
    exact << std::polar(1.0, -t), std::polar(1.0, t);
    exact /= std::sqrt(2.0);
    worst = std::max(worst, (amplitudes_of(x) - exact).norm());
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(HamiltonianField, EigenstateIsStationary) {
  const auto j = su2_generators(3);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(j.jx.matrix());
  const PureState s(es.eigenvectors().col(0));
  EXPECT_LT(hamiltonian_vector_field(to_canonical(s), j.jx).norm(), 1e-14);
}

TEST(PurityConstraint, Examples) {
  const auto alg = su2_algebra(3);
  const auto coherent = spin_coherent_state(3, 0.8, 0.2);
  const auto phi = purity_constraint(to_canonical(coherent), alg);
  EXPECT_NEAR(phi.value, 0.0, 1e-12);
  EXPECT_LT(phi.gradient.norm(), 1e-7);

  CVector b = CVector::Zero(4);
  b(0) = b(3) = 1.0;
  EXPECT_NEAR(purity_constraint(to_canonical(PureState(b)), two_qubit_local_algebra()).value, -2.0,
              1e-14);

  std::mt19937_64 rng(4);
  for (int n = 0; n < 20; ++n) {
    const auto q = purity_constraint(CanonicalPoint{random_canonical_point(rng, 2)}, qubit_algebra());
    EXPECT_NEAR(q.value, 0.0, 1e-14);
    EXPECT_LT(q.gradient.norm(), 1e-14);
  }
}

TEST(PurityConstraint, MissingBoundThrows) {
  FockSpace space(2);
  const auto alg = quadrature_algebra(space);
  const RVector x = to_canonical(fock_state(space, 1, 0)).x;
  EXPECT_THROW(purity_constraint(x, alg, ConstraintForm::purity), Error);
  EXPECT_NO_THROW(purity_constraint(x, alg, ConstraintForm::fluctuation));
  EXPECT_THROW(purity_constraint(x, schwinger_algebra(space), ConstraintForm::fluctuation), Error);
}

TEST(PurityConstraint, NeverPositiveAndTangentGradient) {
  std::mt19937_64 rng(6);
  for (const auto& alg : {su2_algebra(2), su2_algebra(3), su2_algebra(5), two_qubit_local_algebra()}) {
    for (int n = 0; n < 100; ++n) {
      const RVector x = random_canonical_point(rng, alg.dim());
      const auto p = purity_constraint(x, alg);
      const auto f = purity_constraint(x, alg, ConstraintForm::fluctuation);
      EXPECT_LE(p.value, 1e-9);
      EXPECT_GE(f.value, -1e-9);
      EXPECT_LT(std::abs(p.gradient.dot(x)), 1e-10);
      EXPECT_LT(std::abs(f.gradient.dot(x)), 1e-10);
    }
  }
}

TEST(PurityConstraint, GradientsMatchCentralDifferences) {
  std::mt19937_64 rng(7);
  for (const auto& alg : cli::gradient_check_algebras()) {
    for (int n = 0; n < 100; ++n) {
      const RVector x = random_canonical_point(rng, alg.dim());
      for (auto form : {ConstraintForm::purity, ConstraintForm::fluctuation}) {
        if (form == ConstraintForm::purity && !alg.purity_max) continue;
        const auto vg = purity_constraint(x, alg, form);
        const double err = gradient_error(
            [&](const RVector& y) { return purity_constraint(y, alg, form).value; }, x, vg.gradient);
        EXPECT_LT(err, 1e-6) << alg.label;
      }
    }
  }
}

TEST(PurityConstraint, FormsAreOppositeForSu2) {
  std::mt19937_64 rng(8);
  const auto alg = su2_algebra(4);
  for (int n = 0; n < 20; ++n) {
    const RVector x = random_canonical_point(rng, 4);
    const auto p = purity_constraint(x, alg, ConstraintForm::purity);
    const auto f = purity_constraint(x, alg, ConstraintForm::fluctuation);
    EXPECT_NEAR(p.value + f.value, 0.0, 1e-12);
    EXPECT_LT((p.gradient + f.gradient).norm(), 1e-12);
  }
}

TEST(PoissonBracket, Antisymmetry) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  RVector a(6), b(6);
  for (int i = 0; i < 6; ++i) {
    a(i) = g(rng);
    b(i) = g(rng);
  }
  EXPECT_DOUBLE_EQ(poisson_bracket(a, b), -poisson_bracket(b, a));
  EXPECT_EQ(poisson_bracket(a, a), 0.0);
  EXPECT_THROW(poisson_bracket(a, RVector::Zero(4)), DimensionMismatch);
}

TEST(PoissonBracket, QubitAndSpinOneExamples) {
  std::mt19937_64 rng(10);
  const auto q = qubit_algebra();
  for (int n = 0; n < 10; ++n) {
    const RVector x = random_canonical_point(rng, 2);
    const auto phi = purity_constraint(x, q);
    const RVector gh = expectation_with_gradient(x, HermitianOperator(pauli::x() + 0.3 * pauli::z())).gradient;
    EXPECT_NEAR(poisson_bracket(phi.gradient, gh), 0.0, 1e-14);
  }
  ModelParams p;
  p.mu = 0.0;
  const auto h = model_hamiltonian(ModelKind::spin_nonlinear, p);
  const auto alg = su2_algebra(3);
  for (double theta : {0.3, 1.2, 2.5}) {
    const RVector x = to_canonical(spin_coherent_state(3, theta, 0.7)).x;
    const double b = poisson_bracket(purity_constraint(x, alg).gradient,
                                     expectation_with_gradient(x, h).gradient);
    EXPECT_NEAR(b, 0.0, 1e-12);
  }
}

TEST(PurityConstraint, ProductStatesSaturateLocalBound) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  const auto alg = two_qubit_local_algebra();
  for (int n = 0; n < 20; ++n) {
    CVector a(2), b(2);
    a << Complex(g(rng), g(rng)), Complex(g(rng), g(rng));
    b << Complex(g(rng), g(rng)), Complex(g(rng), g(rng));
    const CVector prod = kron(CMatrix(a), CMatrix(b));
    EXPECT_NEAR(generalized_purity(prod, alg), 2.0, 1e-12);
    // Sum (q^2 + p^2) = 2 <psi|psi> for the unnormalized point.
    EXPECT_NEAR(to_canonical(prod).x.squaredNorm(), 2.0 * prod.squaredNorm(), 1e-12);
  }
}
