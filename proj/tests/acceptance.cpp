#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "scenarios.hpp"

using namespace cgq;
using namespace cgq::cli;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void info(const std::string& id, const std::string& msg) {
  std::cout << "  info " << id << " " << msg << "\n";
}

std::string s6(double v) { return short_number(v); }

HermitianOperator random_hermitian(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  return HermitianOperator(0.5 * (a + a.adjoint()));
}

// --------------------------------------------------------------------------

Outcome c01() {
  const auto t0 = Clock::now();
  const auto run = constraint_drift(0.5, 1e-3, 50.0, 1);
  const double elapsed = seconds_since(t0);
  double free = 0.0, projected = 0.0;
  for (std::size_t k = 0; k < run.free.times.size(); ++k) {
    free = std::max(free, std::abs(run.free.diagnostics[k].phi));
    projected = std::max(projected, std::abs(run.projected.diagnostics[k].phi));
  }
  info("c01", "newton iterations " + std::to_string(run.projected.projection_iterations));
  return {free <= 1e-6 && projected <= 1e-9 && elapsed < 10.0,
          "max|Phi| free " + s6(free) + " (<= 1e-6), projected " + s6(projected) +
              " (<= 1e-9), " + s6(elapsed) + " s (< 10)"};
}

Outcome c02() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int n = 0; n < 10; ++n) {
    const auto h = random_hermitian(rng, 2);
    ConstrainedFlowSpec spec(h, qubit_algebra());
    const PureState psi0 = from_canonical({random_canonical_point(rng, 2)});
    IntegrationOptions o;
    o.dt = 1e-3;
    o.t_final = 10.0;
    o.sample_stride = 10;
    const auto traj = integrate_flow(spec, psi0, o);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
    const double e = expectation(psi0, h);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const double t = traj.times[k];
      const CVector ph = (-kI * t * es.eigenvalues().cast<Complex>()).array().exp();
      const CVector exact =
          es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint() * psi0.amplitudes();
      const CVector got = traj.states[k].amplitudes() * std::polar(1.0, -e * t);
      worst = std::max(worst, (got - exact).norm());
    }
  }
  return {worst <= 1e-8, "max |psi - exp(-iHt) psi0| over 10 Hamiltonians " + s6(worst) +
                             " (<= 1e-8)"};
}

Outcome c03() {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (Index dim : {2, 3, 5}) {
    const auto alg = su2_algebra(dim);
    const double j = 0.5 * static_cast<double>(dim - 1);
    for (int n = 0; n < 1000; ++n) {
      const CVector c = amplitudes_of(random_canonical_point(rng, dim));
      const double err =
          std::abs(generalized_purity(c, alg) + invariant_fluctuation(c, alg) - j * (j + 1.0));
      worst = std::max(worst, err);
    }
  }
  return {worst <= 1e-10, "max |P + Delta - j(j+1)| " + s6(worst) + " (<= 1e-10)"};
}

Outcome c04() {
  ScenarioConfig c;
  c.seed = 4;
  const auto r = run_gradient_check(c);
  double worst = 0.0;
  for (const auto& row : r.table.rows) {
    const double e = std::stod(row.back());
    worst = std::max(worst, e);
    info("c04", row[0] + " " + row[2] + " " + s6(e));
  }
  return {worst <= 1e-6, "max relative gradient error " + s6(worst) + " (<= 1e-6)"};
}

Outcome c05() {
  const auto t0 = Clock::now();
  const double energy = 1.5;
  const ReducedParams sym{1.5, 1.0, ReducedVariant::symmetric};
  const ReducedParams ns{1.5, 1.0, ReducedVariant::nonsymmetric};
  LyapunovOptions lo;
  lo.dt = 1e-2;
  lo.t_final = 1e4;
  const auto ls = largest_lyapunov(sym, reduced_initial_point(sym, energy), lo);
  const auto ln = largest_lyapunov(ns, reduced_initial_point(ns, energy), lo);
  SectionOptions so;
  so.dt = 1e-2;
  so.t_final = 2e4;
  const auto ps = section_crossings(sym, reduced_initial_point(sym, energy), so);
  const auto pn = section_crossings(ns, reduced_initial_point(ns, energy), so);
  const auto bs = box_count(ps);
  const auto bn = box_count(pn);
  const double ratio = static_cast<double>(bn) / static_cast<double>(std::max<std::size_t>(bs, 1));
  const double elapsed = seconds_since(t0);
  info("c05", "section points symmetric " + std::to_string(ps.size()) + ", nonsymmetric " +
                  std::to_string(pn.size()));
  info("c05", "lyapunov standard errors " + s6(ls.standard_error) + ", " + s6(ln.standard_error));
  for (double mu : {1.1, 1.3}) {
    const ReducedParams p{mu, 1.0, ReducedVariant::nonsymmetric};
    LyapunovOptions quick = lo;
    quick.t_final = 2e3;
    double best = 0.0;
    const auto shell = sample_energy_shell(p, energy, 6);
    for (const auto& x : shell) best = std::max(best, largest_lyapunov(p, x, quick).value);
    info("c05", "nonsymmetric mu=" + s6(mu) + ": largest exponent over " +
                    std::to_string(shell.size()) + " shell orbits " + s6(best));
  }
  return {ls.value < 5e-3 && ln.value > 1e-2 && ratio >= 5.0 && elapsed < 120.0,
          "lyapunov symmetric " + s6(ls.value) + " (< 5e-3), nonsymmetric " + s6(ln.value) +
              " (> 1e-2); boxes " + std::to_string(bn) + "/" + std::to_string(bs) + " = " +
              s6(ratio) + " (>= 5); " + s6(elapsed) + " s (< 120)"};
}

Outcome c06() {
  double worst = 0.0;
  for (auto v : {ReducedVariant::symmetric, ReducedVariant::nonsymmetric}) {
    const ReducedParams par{1.5, 1.0, v};
    const auto h = reduced_hamiltonian(par);
    const auto x0 = reduced_initial_point(par, 1.5);
    const auto traj = integrate_reduced(par, x0, 1e-3, 1e3, 100);
    double drift = 0.0;
    for (const auto& s : traj.states) drift = std::max(drift, std::abs(reduced_energy(s, h) - 1.5));
    info("c06", std::string(v == ReducedVariant::symmetric ? "symmetric" : "nonsymmetric") +
                    " max|H - E| " + s6(drift));
    worst = std::max(worst, drift);
  }
  return {worst <= 1e-6, "max chart-energy drift over T = 1000 " + s6(worst) + " (<= 1e-6)"};
}

Outcome c07() {
  const double dt = 1e-3;
  const auto w = wiener_moments(7, 100000, dt);
  const double second = std::abs(w.second_moment - dt);
  return {w.mean_abs <= w.mean_bound && w.square_abs <= w.mean_bound && second <= w.second_bound,
          "|E dW| " + s6(w.mean_abs) + ", |E dW^2| " + s6(w.square_abs) + " (<= " +
              s6(w.mean_bound) + "); |E|dW|^2 - dt| " + s6(second) + " (<= " +
              s6(w.second_bound) + ")"};
}

EnsembleOptions ensemble(double t_final, std::uint64_t seed) {
  EnsembleOptions eo;
  eo.dt = 1e-3;
  eo.t_final = t_final;
  eo.sample_stride = 100;
  eo.n_paths = 200;
  eo.base_seed = seed;
  return eo;
}

Outcome c08() {
  const auto t0 = Clock::now();
  const auto bh = bose_hubbard_setup(LindbladSet::J, 8, 0.1, 1.0, 0.0, 0.9);
  const auto rows = qsd_vs_lindblad(bh, ensemble(10.0, 8));
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  std::size_t violations = 0;
  for (const auto& r : rows) {
    if (r.hs > 3.0 * r.se) ++violations;
    if (r.se > 0.0) worst = std::max(worst, r.hs / r.se);
  }
  info("c08", "terminal HS distance " + s6(rows.back().hs) + ", jackknife SE " + s6(rows.back().se));
  return {violations == 0 && elapsed < 300.0,
          "max HS/SE " + s6(worst) + " (<= 3), violations " + std::to_string(violations) + "/" +
              std::to_string(rows.size()) + "; " + s6(elapsed) + " s (< 300)"};
}

struct PointerRun {
  double median_su2 = 0.0, mean_su2 = 0.0, median_h4 = 0.0, mean_h4 = 0.0;
  double rho_su2 = 0.0, rho_h4 = 0.0;
};

PointerRun pointer_run(LindbladSet set, int cutoff) {
  const auto bh = bose_hubbard_setup(set, cutoff, 0.1, 1.0, 0.0, 0.9);
  const double t_final = default_horizon(set);
  const auto ens = run_qsd_ensemble(bh.initial, bh.spec, ensemble(t_final, 9), {bh.su2, bh.h4});
  const std::size_t k = ens.samples() - 1;
  PointerRun r;
  r.median_su2 = ens.median_fluctuation(0, k);
  r.mean_su2 = ens.mean_fluctuation(0, k);
  r.median_h4 = ens.median_fluctuation(1, k);
  r.mean_h4 = ens.mean_fluctuation(1, k);
  LindbladOptions lo;
  lo.dt = 5e-3;
  lo.t_final = t_final;
  lo.sample_stride = 100000;
  const auto rho = integrate_lindblad(DensityMatrix::projector(bh.initial), bh.spec, lo);
  r.rho_su2 = invariant_fluctuation(rho.states.back(), bh.su2);
  r.rho_h4 = invariant_fluctuation(rho.states.back(), bh.h4);
  return r;
}

Outcome c09() {
  const double min_su2 = 2.0;  // j = 2
  const double min_h4 = 2.0;
  const auto bh = bose_hubbard_setup(LindbladSet::J, 8, 0.1, 1.0, 0.0, 0.9);
  const double initial = invariant_fluctuation(bh.initial, bh.su2);
  const auto j = pointer_run(LindbladSet::J, 8);
  const auto q = pointer_run(LindbladSet::quadrature, default_cutoff(LindbladSet::quadrature));
  info("c09", "initial Delta_su2 of |2,2> " + s6(initial));
  info("c09", "J: Delta_su2 median " + s6(j.median_su2) + " mean " + s6(j.mean_su2) +
                  "; Delta_H4 median " + s6(j.median_h4) + " mean " + s6(j.mean_h4));
  info("c09", "quadrature: Delta_H4 median " + s6(q.median_h4) + " mean " + s6(q.mean_h4) +
                  "; Delta_su2 median " + s6(q.median_su2) + " mean " + s6(q.mean_su2));
  info("c09", "Delta of the Lindblad density itself: J su2 " + s6(j.rho_su2) + ", H4 " +
                  s6(j.rho_h4) + "; quadrature su2 " + s6(q.rho_su2) + ", H4 " + s6(q.rho_h4));
  const bool j_ok = std::abs(initial - 6.0) < 1e-12 && j.median_su2 <= 1.1 * min_su2 &&
                    j.mean_su2 <= 1.1 * min_su2 && j.median_h4 > 2.0 * min_h4 &&
                    j.mean_h4 > 2.0 * min_h4;
  const bool q_ok = q.median_h4 <= 1.15 * min_h4 && q.mean_h4 <= 1.15 * min_h4 &&
                    q.median_su2 > 2.0 * min_su2 && q.mean_su2 > 2.0 * min_su2;
  return {j_ok && q_ok, std::string("J runs ") + (j_ok ? "ordered" : "NOT ordered") +
                            " (Delta_su2 <= 2.2, Delta_H4 > 4), quadrature runs " +
                            (q_ok ? "ordered" : "NOT ordered") +
                            " (Delta_H4 <= 2.3, Delta_su2 > 4)"};
}

Outcome c10() {
  double worst = 0.0;
  for (double eps : {0.0, 1.0}) {
    const auto cmp = compare_pointer(0.2, eps, 0.1, 1.0, 1e-3, 10.0, 10);
    info("c10", "epsilon " + s6(eps) + ": sup|Tr(rho Jz) - <Jz>| " + s6(cmp.sup_difference));
    worst = std::max(worst, cmp.sup_difference);
  }
  return {worst <= 0.1, "sup-norm difference " + s6(worst) + " (<= 0.1)"};
}

Outcome c11() {
  ConstrainedFlowSpec spec(HermitianOperator(CMatrix::Zero(3, 3)), su2_algebra(3),
                           ConstraintForm::purity, FlowMode::simplified, 1.0);
  std::mt19937_64 rng(11);
  double worst_rise = -1.0;
  double worst_end = 0.0;
  for (int n = 0; n < 20; ++n) {
    const PureState psi0 = from_canonical({random_canonical_point(rng, 3)});
    IntegrationOptions o;
    o.dt = 1e-3;
    o.t_final = 10.0;
    o.sample_stride = 1;
    const auto traj = integrate_flow(spec, psi0, o);
    for (std::size_t k = 1; k < traj.diagnostics.size(); ++k) {
      worst_rise = std::max(worst_rise,
                            traj.diagnostics[k].fluctuation - traj.diagnostics[k - 1].fluctuation);
    }
    worst_end = std::max(worst_end, traj.diagnostics.back().fluctuation);
  }
  info("c11", "largest terminal Delta_su2 " + s6(worst_end) + " (minimum 1)");
  return {worst_rise <= 1e-10, "largest per-step increase of Delta_su2 " + s6(worst_rise) +
                                   " (<= 1e-10)"};
}

Outcome c12() {
  double worst = 0.0;
  for (auto set : {LindbladSet::J, LindbladSet::quadrature}) {
    const auto a = pointer_run(set, 8);
    const auto b = pointer_run(set, 16);
    const double d = std::max({std::abs(a.median_su2 - b.median_su2), std::abs(a.mean_su2 - b.mean_su2),
                               std::abs(a.median_h4 - b.median_h4), std::abs(a.mean_h4 - b.mean_h4)});
    info("c12", std::string(set == LindbladSet::J ? "J" : "quadrature") +
                    ": max terminal change 8 -> 16 " + s6(d) + " (Delta_H4 median " +
                    s6(a.median_h4) + " -> " + s6(b.median_h4) + ")");
    worst = std::max(worst, d);
  }
  return {worst < 1e-3, "max change of terminal fluctuations, cutoff 8 -> 16: " + s6(worst) +
                            " (< 1e-3)"};
}

const std::map<std::string, std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::map<std::string, std::pair<std::string, std::function<Outcome()>>> table = {
      {"c01", {"constraint conservation", c01}},
      {"c02", {"qubit flow is Schroedinger", c02}},
      {"c03", {"Casimir identity", c03}},
      {"c04", {"gradient checks", c04}},
      {"c05", {"regular/chaotic dichotomy", c05}},
      {"c06", {"reduced energy conservation", c06}},
      {"c07", {"Wiener statistics", c07}},
      {"c08", {"QSD-Lindblad consistency", c08}},
      {"c09", {"pointer-state convergence", c09}},
      {"c10", {"constrained equation vs Lindblad", c10}},
      {"c11", {"variance contraction", c11}},
      {"c12", {"Fock truncation adequacy", c12}},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> ids;
  for (int i = 1; i < argc; ++i) ids.emplace_back(argv[i]);
  if (ids.empty()) {
    for (const auto& [id, entry] : criteria()) ids.push_back(id);
  }
  int failures = 0;
  for (const auto& id : ids) {
    const auto it = criteria().find(id);
    if (it == criteria().end()) {
      std::cerr << "unknown criterion '" << id << "'\n";
      return 2;
    }
    Outcome out;
    try {
      out = it->second.second();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    std::cout << (out.pass ? "[PASS] " : "[FAIL] ") << id << " " << it->second.first << ": "
              << out.detail << std::endl;
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
