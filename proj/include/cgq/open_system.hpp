#pragma once

// Hermitian-Lindblad master equation and its diffusive (QSD) unraveling. The rate gamma
// enters as sqrt(gamma) L_l on every Lindblad operator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "cgq/core.hpp"
#include "cgq/errors.hpp"
#include "cgq/rk4.hpp"

namespace cgq {

struct LindbladSpec {
  HermitianOperator hamiltonian;
  std::vector<HermitianOperator> lindblads;
  double gamma = 0.0;

  LindbladSpec(HermitianOperator h, std::vector<HermitianOperator> ls, double rate)
      : hamiltonian(std::move(h)), lindblads(std::move(ls)), gamma(rate) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
      throw Error("LindbladSpec: gamma must be finite and non-negative");
    }
    for (const auto& l : lindblads) {
      detail::require_dim(hamiltonian.dim(), l.dim(), "LindbladSpec");
      squares_.push_back(SparseCMatrix(l.sparse() * l.sparse()));
    }
  }

  Index dim() const noexcept { return hamiltonian.dim(); }
  std::size_t size() const noexcept { return lindblads.size(); }
  const SparseCMatrix& square(std::size_t l) const { return squares_.at(l); }

 private:
  std::vector<SparseCMatrix> squares_;
};

/// -i[H, rho] + gamma sum_l (L rho L - {L^2, rho}/2).
inline CMatrix lindblad_rhs(const CMatrix& rho, const LindbladSpec& spec) {
  detail::require_dim(spec.dim(), rho.rows(), "lindblad_rhs");
  detail::require_dim(spec.dim(), rho.cols(), "lindblad_rhs");
  const SparseCMatrix& h = spec.hamiltonian.sparse();
  const CMatrix h_rho = h * rho;
  CMatrix out = -kI * (h_rho - h_rho.adjoint());
  if (spec.gamma == 0.0) return out;
  CMatrix diss = CMatrix::Zero(rho.rows(), rho.cols());
  for (std::size_t l = 0; l < spec.size(); ++l) {
    const SparseCMatrix& op = spec.lindblads[l].sparse();
    const CMatrix l_rho = op * rho;
    const CMatrix l2_rho = spec.square(l) * rho;
    // (L rho L) = (L (L rho)^dagger)^dagger for Hermitian rho and L.
    diss += CMatrix(op * l_rho.adjoint()).adjoint() - 0.5 * (l2_rho + l2_rho.adjoint());
  }
  out += spec.gamma * diss;
  return out;
}

inline CMatrix lindblad_rhs(const DensityMatrix& rho, const LindbladSpec& spec) {
  return lindblad_rhs(rho.matrix(), spec);
}

struct DensityTrajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  double max_trace_drift = 0.0;
  double max_hermiticity_defect = 0.0;
  double min_eigenvalue = 1.0;
};

struct LindbladOptions {
  double dt = 5e-3;
  double t_final = 10.0;
  long sample_stride = 1;
  /// Samples whose smallest eigenvalue falls below this raise an IntegrationError.
  double positivity_floor = -1e-8;
};

/// RK4 on the master equation. Every sample is checked for trace, Hermiticity and
/// positivity; the state is symmetrized after each step.
inline DensityTrajectory integrate_lindblad(const DensityMatrix& rho0, const LindbladSpec& spec,
                                            const LindbladOptions& opt) {
  detail::require_dim(spec.dim(), rho0.dim(), "integrate_lindblad");
  if (!(opt.dt > 0.0)) throw Error("integrate_lindblad: dt must be positive");
  if (!(opt.t_final > opt.dt)) throw Error("integrate_lindblad: t_final must exceed dt");
  if (opt.sample_stride < 1) throw Error("integrate_lindblad: sample stride must be >= 1");
  const long steps = std::lround(opt.t_final / opt.dt);
  const auto field = [&spec](const CMatrix& r) { return lindblad_rhs(r, spec); };

  DensityTrajectory traj;
  CMatrix rho = rho0.matrix();
  auto record = [&](long k) {
    const double t = static_cast<double>(k) * opt.dt;
    traj.max_trace_drift = std::max(traj.max_trace_drift, std::abs(rho.trace() - Complex(1.0)));
    traj.max_hermiticity_defect =
        std::max(traj.max_hermiticity_defect, detail::hermiticity_defect(rho));
    std::optional<DensityMatrix> checked;
    try {
      checked.emplace(rho);
    } catch (const Error& e) {
      throw IntegrationError(t, e.what());
    }
    DensityMatrix& sample = *checked;
    const double lo = sample.min_eigenvalue();
    traj.min_eigenvalue = std::min(traj.min_eigenvalue, lo);
    if (lo < opt.positivity_floor) {
      throw IntegrationError(t, "density matrix lost positivity (min eigenvalue " +
                                    std::to_string(lo) + ")");
    }
    traj.times.push_back(t);
    traj.states.push_back(std::move(sample));
  };

  record(0);
  for (long k = 1; k <= steps; ++k) {
    rho = rk4_step(field, rho, opt.dt);
    if (!rho.allFinite()) {
      throw IntegrationError(static_cast<double>(k) * opt.dt, "non-finite density matrix");
    }
    rho = 0.5 * (rho + rho.adjoint()).eval();
    if (k % opt.sample_stride == 0 || k == steps) record(k);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Complex Wiener increments.

using Rng = std::mt19937_64;

struct WienerIncrement {
  CVector dw;
  double dt = 0.0;
};

/// Each component is (g1 + i g2) sqrt(dt/2) with g1, g2 independent standard normals.
inline WienerIncrement sample_wiener(Rng& rng, Index m, double dt) {
  if (!(dt > 0.0)) throw Error("sample_wiener: dt must be positive");
  std::normal_distribution<double> normal;
  const double scale = std::sqrt(0.5 * dt);
  WienerIncrement inc{CVector(m), dt};
  for (Index l = 0; l < m; ++l) {
    const double g1 = normal(rng);
    const double g2 = normal(rng);
    inc.dw(l) = Complex(scale * g1, scale * g2);
  }
  return inc;
}

namespace detail {

/// Euler-Maruyama update of the unnormalized amplitudes in place; returns the norm
/// before renormalization.
inline double qsd_advance(CVector& psi, const LindbladSpec& spec, const CVector& dw, double dt) {
  const double s = psi.squaredNorm();
  CVector drift = -kI * (spec.hamiltonian.sparse() * psi);
  CVector noise = CVector::Zero(psi.size());
  const double sg = std::sqrt(spec.gamma);
  for (std::size_t l = 0; l < spec.size(); ++l) {
    const CVector lpsi = spec.lindblads[l].sparse() * psi;
    const double mean = psi.dot(lpsi).real() / s;
    drift += spec.gamma * (2.0 * mean * lpsi - spec.square(l) * psi - (mean * mean) * psi);
    noise += (sg * dw(static_cast<Index>(l))) * (lpsi - mean * psi);
  }
  psi += dt * drift + noise;
  const double norm = psi.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) return norm;
  psi /= norm;
  return norm;
}

}  // namespace detail

/// One Euler-Maruyama step of
///   dpsi = [-iH + gamma sum (2<L>L - L^2 - <L>^2)] psi dt + sqrt(gamma) sum (L - <L>) psi dW,
/// followed by renormalization.
inline PureState qsd_step(const PureState& psi, const LindbladSpec& spec,
                          const WienerIncrement& inc) {
  detail::require_dim(spec.dim(), psi.dim(), "qsd_step");
  detail::require_dim(static_cast<Index>(spec.size()), inc.dw.size(), "qsd_step");
  CVector v = psi.amplitudes();
  const double norm = detail::qsd_advance(v, spec, inc.dw, inc.dt);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw IntegrationError(0.0, "qsd_step: non-finite state");
  return PureState(std::move(v));
}

// ---------------------------------------------------------------------------
// Ensembles.

struct EnsembleOptions {
  double dt = 1e-3;
  double t_final = 10.0;
  long sample_stride = 100;
  std::size_t n_paths = 200;
  std::uint64_t base_seed = 0;
  /// Number of worker threads; 0 reads CGQ_WORKERS and falls back to 1.
  unsigned workers = 0;
};

struct PathRecord {
  std::uint64_t seed = 0;
  std::vector<PureState> states;
  /// fluctuation[a][sample], purity[a][sample] for each monitored algebra a.
  std::vector<std::vector<double>> fluctuation;
  std::vector<std::vector<double>> purity;
};

struct Ensemble {
  std::vector<double> times;
  std::vector<PathRecord> paths;
  std::vector<std::string> monitor_labels;

  std::size_t size() const noexcept { return paths.size(); }
  std::size_t samples() const noexcept { return times.size(); }

  /// (1/M) sum_k |psi_k><psi_k| at sample `k`, accumulated in path order.
  DensityMatrix mean_density(std::size_t k) const {
    const Index n = paths.front().states.at(k).dim();
    CMatrix rho = CMatrix::Zero(n, n);
    for (const auto& p : paths) {
      const CVector& c = p.states[k].amplitudes();
      rho.noalias() += c * c.adjoint();
    }
    rho /= static_cast<double>(paths.size());
    return DensityMatrix(0.5 * (rho + rho.adjoint()));
  }

  /// Jackknife standard error, in HS norm, of the ensemble-mean density at sample `k`.
  double jackknife_hs_error(std::size_t k) const { return jackknife_hs_error(k, mean_density(k)); }

  double jackknife_hs_error(std::size_t k, const DensityMatrix& mean) const {
    const std::size_t m = paths.size();
    if (m < 2) return 0.0;
    const CMatrix& rho = mean.matrix();
    const double tr2 = rho.squaredNorm();
    double sum = 0.0;
    for (const auto& p : paths) {
      const CVector& c = p.states[k].amplitudes();
      const double overlap = c.dot(rho * c).real();
      sum += std::max(0.0, 1.0 - 2.0 * overlap + tr2);
    }
    return std::sqrt(sum / (static_cast<double>(m) * static_cast<double>(m - 1)));
  }

  std::vector<double> fluctuation_column(std::size_t algebra, std::size_t k) const {
    std::vector<double> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(p.fluctuation.at(algebra).at(k));
    return out;
  }

  double mean_fluctuation(std::size_t algebra, std::size_t k) const {
    double sum = 0.0;
    for (const auto& p : paths) sum += p.fluctuation.at(algebra).at(k);
    return sum / static_cast<double>(paths.size());
  }

  double median_fluctuation(std::size_t algebra, std::size_t k) const {
    auto v = fluctuation_column(algebra, k);
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
  }
};

inline unsigned worker_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CGQ_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(std::min(v, 256UL));
  }
  return 1;
}

/// Runs `n_paths` independent QSD paths; path k is seeded with base_seed ^ k. The result
/// does not depend on the worker count.
inline Ensemble run_qsd_ensemble(const PureState& psi0, const LindbladSpec& spec,
                                 const EnsembleOptions& opt,
                                 const std::vector<DistinguishedAlgebra>& monitors = {}) {
  detail::require_dim(spec.dim(), psi0.dim(), "run_qsd_ensemble");
  if (opt.n_paths < 1) throw Error("run_qsd_ensemble: need at least one path");
  if (!(opt.dt > 0.0)) throw Error("run_qsd_ensemble: dt must be positive");
  if (!(opt.t_final > opt.dt)) throw Error("run_qsd_ensemble: t_final must exceed dt");
  if (opt.sample_stride < 1) throw Error("run_qsd_ensemble: sample stride must be >= 1");
  for (const auto& a : monitors) detail::require_dim(spec.dim(), a.dim(), "run_qsd_ensemble");

  const long steps = std::lround(opt.t_final / opt.dt);
  Ensemble ens;
  for (long k = 0; k <= steps; ++k) {
    if (k % opt.sample_stride == 0 || k == steps) {
      ens.times.push_back(static_cast<double>(k) * opt.dt);
    }
  }
  for (const auto& a : monitors) ens.monitor_labels.push_back(a.label);
  ens.paths.resize(opt.n_paths);

  auto run_path = [&](std::size_t index) {
    PathRecord& rec = ens.paths[index];
    rec.seed = opt.base_seed ^ static_cast<std::uint64_t>(index);
    rec.fluctuation.assign(monitors.size(), {});
    rec.purity.assign(monitors.size(), {});
    Rng rng(rec.seed);
    CVector psi = psi0.amplitudes();
    auto record = [&]() {
      for (std::size_t a = 0; a < monitors.size(); ++a) {
        rec.fluctuation[a].push_back(invariant_fluctuation(psi, monitors[a]));
        rec.purity[a].push_back(generalized_purity(psi, monitors[a]));
      }
      rec.states.emplace_back(psi);
    };
    record();
    const Index m = static_cast<Index>(spec.size());
    for (long k = 1; k <= steps; ++k) {
      const auto inc = sample_wiener(rng, m, opt.dt);
      const double norm = detail::qsd_advance(psi, spec, inc.dw, opt.dt);
      if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw IntegrationError(static_cast<double>(k) * opt.dt, "QSD path " +
                                                                   std::to_string(index) +
                                                                   " became non-finite");
      }
      if (k % opt.sample_stride == 0 || k == steps) record();
    }
  };

  const unsigned workers =
      std::min<unsigned>(worker_count(opt.workers), static_cast<unsigned>(opt.n_paths));
  if (workers <= 1) {
    for (std::size_t i = 0; i < opt.n_paths; ++i) run_path(i);
    return ens;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < opt.n_paths; i += workers) run_path(i);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return ens;
}

}  // namespace cgq
