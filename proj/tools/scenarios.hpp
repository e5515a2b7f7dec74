#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "cgq/cgq.hpp"

namespace cgq::cli {

class UnknownScenario : public Error {
 public:
  explicit UnknownScenario(const std::string& name) : Error("unknown scenario '" + name + "'") {}
};

struct ScenarioConfig {
  std::string scenario;
  std::string out;
  std::uint64_t seed = 1729;

  std::optional<double> dt;
  std::optional<double> t_final;
  std::optional<long> stride;
  std::optional<std::size_t> paths;
  std::optional<std::size_t> orbits;
  std::optional<int> cutoff;

  std::optional<double> mu;
  double omega = 1.0;
  double alpha = 1.0;
  double epsilon = 0.0;
  std::optional<double> gamma;
  double energy = 1.5;
  std::string system = "ns";
  std::string lindblads = "J";

  void validate() const {
    auto finite = [](const char* name, std::optional<double> v) {
      if (v && !std::isfinite(*v)) throw ConfigError(std::string(name) + " must be finite");
    };
    finite("dt", dt);
    finite("t-final", t_final);
    finite("mu", mu);
    finite("gamma", gamma);
    finite("omega", omega);
    finite("alpha", alpha);
    finite("epsilon", epsilon);
    finite("energy", energy);
    if (dt && !(*dt > 0.0)) throw ConfigError("dt must be positive");
    if (t_final && dt && !(*t_final > *dt)) throw ConfigError("t-final must exceed dt");
    if (stride && *stride < 1) throw ConfigError("stride must be at least 1");
    if (paths && *paths < 1) throw ConfigError("paths must be at least 1");
    if (orbits && *orbits < 1) throw ConfigError("orbits must be at least 1");
    if (cutoff && *cutoff < 1) throw ConfigError("cutoff must be at least 1");
    if (gamma && *gamma < 0.0) throw ConfigError("gamma must be non-negative");
    if (system != "s" && system != "ns") throw ConfigError("system must be 's' or 'ns'");
    if (lindblads != "J" && lindblads != "quadrature") {
      throw ConfigError("lindblads must be 'J' or 'quadrature'");
    }
  }
};

// ---------------------------------------------------------------------------
// CSV

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string format_number(long v) { return std::to_string(v); }
inline std::string format_number(std::size_t v) { return std::to_string(v); }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  template <typename... Ts>
  void add(const Ts&... values) {
    rows.push_back({cell(values)...});
  }

  void write(std::ostream& os) const {
    write_row(os, header);
    for (const auto& r : rows) write_row(os, r);
  }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <typename T>
  static std::string cell(const T& v) {
    return format_number(v);
  }

  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }

  static void write_row(std::ostream& os, const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) os << ',';
      os << quote(r[i]);
    }
    os << '\n';
  }
};

struct ScenarioResult {
  Table table;
  std::string summary;
};

inline std::string short_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Shared setups

/// Initial point for the reduced flows: q1 = q2 = 0.5, p1 = 0, p2 > 0 on the shell.
inline ReducedPoint reduced_initial_point(const ReducedParams& par, double energy) {
  const auto x = shell_point(par, energy, 0.5, 0.5);
  if (!x) {
    throw ConfigError("no shell point with q1 = q2 = 0.5 at energy " + short_number(energy));
  }
  return *x;
}

inline ReducedParams reduced_params(const ScenarioConfig& c) {
  return {c.mu.value_or(1.5), c.omega,
          c.system == "s" ? ReducedVariant::symmetric : ReducedVariant::nonsymmetric};
}

enum class LindbladSet { J, quadrature };

struct BoseHubbardSetup {
  FockSpace space;
  LindbladSpec spec;
  PureState initial;
  DistinguishedAlgebra su2;
  DistinguishedAlgebra h4;
};

inline int default_cutoff(LindbladSet set) { return set == LindbladSet::J ? 8 : 16; }
inline double default_horizon(LindbladSet set) { return set == LindbladSet::J ? 10.0 : 1.5; }

/// Hamiltonian of the two-mode dimer with Lindblads {Jx, Jy, Jz} or {q1, q2, p1, p2}.
/// J runs start from |2,2>; quadrature runs from the equatorial su(2) coherent state of
/// the N = 4 sector.
inline BoseHubbardSetup bose_hubbard_setup(LindbladSet set, int cutoff, double mu, double alpha,
                                           double epsilon, double gamma) {
  FockSpace space(cutoff);
  if (cutoff < 4) throw ConfigError("cutoff must be at least 4 for the N = 4 scenarios");
  auto h = bose_hubbard_hamiltonian(space, {0.0, epsilon, alpha, mu});
  auto ops = fock_operators(space);
  auto j = schwinger_generators(space);
  std::vector<HermitianOperator> ls =
      set == LindbladSet::J ? j.as_vector()
                            : std::vector<HermitianOperator>{ops.q1, ops.q2, ops.p1, ops.p2};
  PureState psi0 = set == LindbladSet::J
                       ? fock_state(space, 2, 2)
                       : PureState(SectorEmbedding(space, 4).embed(
                             spin_coherent_state(5, std::numbers::pi / 2.0, 0.0).amplitudes()));
  return {space, LindbladSpec(std::move(h), std::move(ls), gamma), std::move(psi0),
          schwinger_algebra(space), quadrature_algebra(space)};
}

inline LindbladSet lindblad_set(const ScenarioConfig& c) {
  return c.lindblads == "J" ? LindbladSet::J : LindbladSet::quadrature;
}

inline BoseHubbardSetup bose_hubbard_setup(const ScenarioConfig& c) {
  const auto set = lindblad_set(c);
  return bose_hubbard_setup(set, c.cutoff.value_or(default_cutoff(set)), c.mu.value_or(0.1),
                            c.alpha, c.epsilon, c.gamma.value_or(0.9));
}

/// Lindblad step that divides `interval` into whole steps no longer than `max_dt`.
inline LindbladOptions lindblad_grid(double interval, double t_final, double max_dt = 5e-3) {
  LindbladOptions o;
  const long sub = std::max(1L, static_cast<long>(std::ceil(interval / max_dt - 1e-9)));
  o.dt = interval / static_cast<double>(sub);
  o.sample_stride = sub;
  o.t_final = t_final;
  return o;
}

struct PointerSetup {
  HermitianOperator hamiltonian;
  Su2Generators j;
  PureState initial;
};

/// N = 2 sector of the dimer (spin 1) with the |1, -1> initial state.
inline PointerSetup pointer_setup(double mu, double alpha, double epsilon) {
  FockSpace space(2);
  SectorEmbedding sector(space, 2);
  auto full = bose_hubbard_hamiltonian(space, {0.0, epsilon, alpha, mu});
  return {HermitianOperator(sector.restrict(full.matrix())), su2_generators(3),
          PureState::basis(3, 2)};
}

struct PointerComparison {
  std::vector<double> times;
  std::vector<double> lindblad;
  std::vector<double> constrained;
  double sup_difference = 0.0;
};

inline PointerComparison compare_pointer(double gamma, double epsilon, double mu, double alpha,
                                         double dt, double t_final, long stride) {
  const auto ps = pointer_setup(mu, alpha, epsilon);
  const auto ls = ps.j.as_vector();
  LindbladSpec lspec(ps.hamiltonian, ls, gamma);
  LindbladOptions lo;
  lo.dt = dt;
  lo.t_final = t_final;
  lo.sample_stride = stride;
  const auto rho = integrate_lindblad(DensityMatrix::projector(ps.initial), lspec, lo);

  ConstrainedFlowSpec fspec(ps.hamiltonian, su2_algebra(3), ConstraintForm::purity,
                            FlowMode::simplified, gamma);
  IntegrationOptions fo;
  fo.dt = dt;
  fo.t_final = t_final;
  fo.sample_stride = stride;
  const auto flow = integrate_flow(fspec, ps.initial, fo);

  PointerComparison out;
  out.times = rho.times;
  out.lindblad = observable_series(rho, ps.j.jz);
  out.constrained = observable_series(flow, ps.j.jz);
  for (std::size_t k = 0; k < out.times.size(); ++k) {
    out.sup_difference = std::max(out.sup_difference, std::abs(out.lindblad[k] - out.constrained[k]));
  }
  return out;
}

struct DriftRun {
  Trajectory free;
  Trajectory projected;
};

/// Spin-1 J_z - 2 J_x + mu J_z^2 from the coherent state at (theta, phi) = (0.7, 0.3).
inline DriftRun constraint_drift(double mu, double dt, double t_final, long stride) {
  ModelParams mp;
  mp.mu = mu;
  mp.dim = 3;
  ConstrainedFlowSpec spec(model_hamiltonian(ModelKind::spin_nonlinear, mp), su2_algebra(3));
  const auto psi0 = spin_coherent_state(3, 0.7, 0.3);
  IntegrationOptions o;
  o.dt = dt;
  o.t_final = t_final;
  o.sample_stride = stride;
  DriftRun run{integrate_flow(spec, psi0, o), {}};
  o.projection = true;
  run.projected = integrate_flow(spec, psi0, o);
  return run;
}

// ---------------------------------------------------------------------------
// Scenarios

inline ScenarioResult run_timeseries(const ScenarioConfig& c) {
  const auto par = reduced_params(c);
  const auto x0 = reduced_initial_point(par, c.energy);
  const double dt = c.dt.value_or(1e-3);
  const auto traj = integrate_reduced(par, x0, dt, c.t_final.value_or(100.0), c.stride.value_or(10));
  const auto h = reduced_hamiltonian(par);
  const auto local = two_qubit_local_algebra();

  ScenarioResult r;
  r.table.header = {"t", "q1", "q2", "p1", "p2", "H", "Phi"};
  double drift = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const auto& s = traj.states[k];
    const CVector amp = chart_amplitudes(s);
    const double e = expectation(amp, h);
    const double phi = generalized_purity(amp, local) - *local.purity_max;
    drift = std::max(drift, std::abs(e - c.energy));
    r.table.add(traj.times[k], s(0), s(1), s(2), s(3), e, phi);
  }
  r.summary = "timeseries system=" + c.system + " mu=" + short_number(par.mu) +
              " samples=" + std::to_string(traj.times.size()) +
              " max|H-E|=" + short_number(drift);
  return r;
}

inline ScenarioResult run_poincare(const ScenarioConfig& c) {
  const auto par = reduced_params(c);
  SectionOptions so;
  so.dt = c.dt.value_or(1e-2);
  so.t_final = c.t_final.value_or(2000.0);
  const auto pts = poincare_section(par, c.energy, c.orbits.value_or(8), so);
  ScenarioResult r;
  r.table.header = {"q1", "p1", "t", "orbit"};
  for (const auto& p : pts) r.table.add(p.q1, p.p1, p.time, p.orbit);
  r.summary = "poincare system=" + c.system + " mu=" + short_number(par.mu) +
              " points=" + std::to_string(pts.size()) +
              " boxes50=" + std::to_string(box_count(pts));
  return r;
}

inline EnsembleOptions ensemble_options(const ScenarioConfig& c, LindbladSet set) {
  EnsembleOptions eo;
  eo.dt = c.dt.value_or(1e-3);
  eo.t_final = c.t_final.value_or(default_horizon(set));
  eo.sample_stride = c.stride.value_or(100);
  eo.n_paths = c.paths.value_or(200);
  eo.base_seed = c.seed;
  return eo;
}

inline ScenarioResult run_qsd_fluctuation(const ScenarioConfig& c) {
  const auto set = lindblad_set(c);
  const auto bh = bose_hubbard_setup(c);
  const auto ens = run_qsd_ensemble(bh.initial, bh.spec, ensemble_options(c, set), {bh.su2, bh.h4});
  ScenarioResult r;
  r.table.header = {"t",          "delta_su2_mean", "delta_su2_median", "delta_h4_mean",
                    "delta_h4_median", "purity_su2_mean", "delta_su2_path0", "delta_h4_path0"};
  for (std::size_t k = 0; k < ens.samples(); ++k) {
    double pur = 0.0;
    for (const auto& p : ens.paths) pur += p.purity[0][k];
    pur /= static_cast<double>(ens.size());
    r.table.add(ens.times[k], ens.mean_fluctuation(0, k), ens.median_fluctuation(0, k),
                ens.mean_fluctuation(1, k), ens.median_fluctuation(1, k), pur,
                ens.paths[0].fluctuation[0][k], ens.paths[0].fluctuation[1][k]);
  }
  const std::size_t last = ens.samples() - 1;
  r.summary = "qsd-fluctuation lindblads=" + c.lindblads + " paths=" + std::to_string(ens.size()) +
              " terminal median delta_su2=" + short_number(ens.median_fluctuation(0, last)) +
              " delta_h4=" + short_number(ens.median_fluctuation(1, last));
  return r;
}

inline ScenarioResult run_lindblad_fluctuation(const ScenarioConfig& c) {
  const auto set = lindblad_set(c);
  const auto bh = bose_hubbard_setup(c);
  const double t_final = c.t_final.value_or(default_horizon(set));
  LindbladOptions lo;
  lo.dt = c.dt.value_or(5e-3);
  lo.t_final = t_final;
  lo.sample_stride = c.stride.value_or(20);
  const auto traj = integrate_lindblad(DensityMatrix::projector(bh.initial), bh.spec, lo);
  ScenarioResult r;
  r.table.header = {"t", "delta_su2", "delta_h4", "purity_su2", "purity"};
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const auto& rho = traj.states[k];
    r.table.add(traj.times[k], invariant_fluctuation(rho, bh.su2), invariant_fluctuation(rho, bh.h4),
                generalized_purity(rho, bh.su2), rho.purity());
  }
  const auto& end = traj.states.back();
  r.summary = "lindblad-fluctuation lindblads=" + c.lindblads +
              " terminal delta_su2=" + short_number(invariant_fluctuation(end, bh.su2)) +
              " delta_h4=" + short_number(invariant_fluctuation(end, bh.h4)) +
              " min_eig=" + short_number(traj.min_eigenvalue);
  return r;
}

inline ScenarioResult run_compare_pointer(const ScenarioConfig& c) {
  const auto cmp = compare_pointer(c.gamma.value_or(0.2), c.epsilon, c.mu.value_or(0.1), c.alpha,
                                   c.dt.value_or(1e-3), c.t_final.value_or(10.0),
                                   c.stride.value_or(10));
  ScenarioResult r;
  r.table.header = {"t", "lindblad_jz", "constrained_jz"};
  for (std::size_t k = 0; k < cmp.times.size(); ++k) {
    r.table.add(cmp.times[k], cmp.lindblad[k], cmp.constrained[k]);
  }
  r.summary = "compare-pointer epsilon=" + short_number(c.epsilon) +
              " sup|diff|=" + short_number(cmp.sup_difference);
  return r;
}

/// Relative error of analytic gradients against central differences of step h.
inline double gradient_error(const std::function<double(const RVector&)>& f, const RVector& x,
                             const RVector& analytic, double h = 1e-6) {
  RVector fd(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    RVector a = x, b = x;
    a(i) += h;
    b(i) -= h;
    fd(i) = (f(a) - f(b)) / (2.0 * h);
  }
  const double scale = analytic.norm();
  return (fd - analytic).norm() / (scale > 1e-8 ? scale : 1.0);
}

inline RVector random_canonical_point(std::mt19937_64& rng, Index dim) {
  std::normal_distribution<double> normal;
  CVector c(dim);
  for (Index i = 0; i < dim; ++i) c(i) = Complex(normal(rng), normal(rng));
  return to_canonical(PureState(c)).x;
}

inline std::vector<DistinguishedAlgebra> gradient_check_algebras() {
  return {su2_algebra(2), su2_algebra(3), su2_algebra(5), two_qubit_local_algebra(),
          quadrature_algebra(FockSpace(3))};
}

inline ScenarioResult run_gradient_check(const ScenarioConfig& c) {
  std::mt19937_64 rng(c.seed);
  const std::size_t points = c.paths.value_or(100);
  ScenarioResult r;
  r.table.header = {"algebra", "dim", "quantity", "points", "max_rel_error"};
  double worst = 0.0;
  for (const auto& alg : gradient_check_algebras()) {
    double e_obs = 0.0, e_pur = 0.0, e_flu = 0.0;
    for (std::size_t n = 0; n < points; ++n) {
      const RVector x = random_canonical_point(rng, alg.dim());
      for (const auto& l : alg.generators) {
        e_obs = std::max(e_obs, gradient_error([&](const RVector& y) {
                  return expectation_with_gradient(y, l).value;
                }, x, expectation_with_gradient(x, l).gradient));
      }
      if (alg.purity_max) {
        e_pur = std::max(e_pur, gradient_error([&](const RVector& y) {
                  return purity_constraint(y, alg, ConstraintForm::purity).value;
                }, x, purity_constraint(x, alg, ConstraintForm::purity).gradient));
      }
      e_flu = std::max(e_flu, gradient_error([&](const RVector& y) {
                return purity_constraint(y, alg, ConstraintForm::fluctuation).value;
              }, x, purity_constraint(x, alg, ConstraintForm::fluctuation).gradient));
    }
    const auto dim = static_cast<std::size_t>(alg.dim());
    r.table.add(alg.label, dim, "expectation", points, e_obs);
    if (alg.purity_max) r.table.add(alg.label, dim, "phi_purity", points, e_pur);
    r.table.add(alg.label, dim, "phi_fluctuation", points, e_flu);
    worst = std::max({worst, e_obs, e_pur, e_flu});
  }
  r.summary = "gradient-check max relative error=" + short_number(worst);
  return r;
}

inline ScenarioResult run_constraint_drift(const ScenarioConfig& c) {
  const auto run = constraint_drift(c.mu.value_or(0.5), c.dt.value_or(1e-3),
                                    c.t_final.value_or(50.0), c.stride.value_or(100));
  ScenarioResult r;
  r.table.header = {"t", "phi_free", "phi_projected", "energy_free"};
  double m0 = 0.0, m1 = 0.0;
  for (std::size_t k = 0; k < run.free.times.size(); ++k) {
    const double a = run.free.diagnostics[k].phi;
    const double b = run.projected.diagnostics[k].phi;
    m0 = std::max(m0, std::abs(a));
    m1 = std::max(m1, std::abs(b));
    r.table.add(run.free.times[k], a, b, run.free.diagnostics[k].energy);
  }
  r.summary = "constraint-drift max|phi| free=" + short_number(m0) +
              " projected=" + short_number(m1);
  return r;
}

struct WienerMoments {
  double mean_abs = 0.0;
  double square_abs = 0.0;
  double second_moment = 0.0;
  double mean_bound = 0.0;
  double second_bound = 0.0;
};

inline WienerMoments wiener_moments(std::uint64_t seed, std::size_t draws, double dt) {
  Rng rng(seed);
  Complex sum(0.0), sum_sq(0.0);
  double sum_abs2 = 0.0;
  for (std::size_t n = 0; n < draws; ++n) {
    const Complex w = sample_wiener(rng, 1, dt).dw(0);
    sum += w;
    sum_sq += w * w;
    sum_abs2 += std::norm(w);
  }
  const double m = static_cast<double>(draws);
  return {std::abs(sum / m), std::abs(sum_sq / m), sum_abs2 / m, 5.0 * std::sqrt(dt / m),
          5.0 * dt / std::sqrt(m)};
}

inline ScenarioResult run_wiener_moments(const ScenarioConfig& c) {
  const double dt = c.dt.value_or(1e-3);
  const std::size_t draws = c.paths.value_or(100000);
  const auto w = wiener_moments(c.seed, draws, dt);
  ScenarioResult r;
  r.table.header = {"statistic", "value", "bound"};
  r.table.add("abs_mean_dW", w.mean_abs, w.mean_bound);
  r.table.add("abs_mean_dW2", w.square_abs, w.mean_bound);
  r.table.add("abs_mean_absdW2_minus_dt", std::abs(w.second_moment - dt), w.second_bound);
  const bool ok = w.mean_abs <= w.mean_bound && w.square_abs <= w.mean_bound &&
                  std::abs(w.second_moment - dt) <= w.second_bound;
  r.summary = std::string("wiener-moments draws=") + std::to_string(draws) +
              (ok ? " within bounds" : " OUTSIDE bounds");
  return r;
}

struct ConsistencyRow {
  double t = 0.0;
  double hs = 0.0;
  double se = 0.0;
};

inline std::vector<ConsistencyRow> qsd_vs_lindblad(const BoseHubbardSetup& bh,
                                                   const EnsembleOptions& eo) {
  const auto ens = run_qsd_ensemble(bh.initial, bh.spec, eo);
  const double interval = static_cast<double>(eo.sample_stride) * eo.dt;
  const auto lo = lindblad_grid(interval, eo.t_final);
  const auto rho = integrate_lindblad(DensityMatrix::projector(bh.initial), bh.spec, lo);
  if (rho.times.size() != ens.samples()) {
    throw Error("qsd-vs-lindblad: sample grids differ");
  }
  std::vector<ConsistencyRow> out;
  for (std::size_t k = 0; k < ens.samples(); ++k) {
    const auto mean = ens.mean_density(k);
    out.push_back({ens.times[k], hs_distance(mean, rho.states[k]), ens.jackknife_hs_error(k, mean)});
  }
  return out;
}

inline ScenarioResult run_qsd_vs_lindblad(const ScenarioConfig& c) {
  const auto set = lindblad_set(c);
  const auto rows = qsd_vs_lindblad(bose_hubbard_setup(c), ensemble_options(c, set));
  ScenarioResult r;
  r.table.header = {"t", "hs_distance", "jackknife_se"};
  double worst = 0.0;
  for (const auto& row : rows) {
    r.table.add(row.t, row.hs, row.se);
    if (row.se > 0.0) worst = std::max(worst, row.hs / row.se);
  }
  r.summary = "qsd-vs-lindblad lindblads=" + c.lindblads +
              " max hs/se=" + short_number(worst);
  return r;
}

using ScenarioFn = ScenarioResult (*)(const ScenarioConfig&);

inline const std::map<std::string, ScenarioFn>& scenario_table() {
  static const std::map<std::string, ScenarioFn> table = {
      {"timeseries", run_timeseries},
      {"poincare", run_poincare},
      {"qsd-fluctuation", run_qsd_fluctuation},
      {"lindblad-fluctuation", run_lindblad_fluctuation},
      {"compare-pointer", run_compare_pointer},
      {"gradient-check", run_gradient_check},
      {"constraint-drift", run_constraint_drift},
      {"wiener-moments", run_wiener_moments},
      {"qsd-vs-lindblad", run_qsd_vs_lindblad},
  };
  return table;
}

inline ScenarioResult run_scenario(const ScenarioConfig& c) {
  const auto& table = scenario_table();
  const auto it = table.find(c.scenario);
  if (it == table.end()) throw UnknownScenario(c.scenario);
  c.validate();
  return it->second(c);
}

}  // namespace cgq::cli
