// SPDX-License-Identifier: Apache-2.0
//
// Cost functions over noisy circuits, parameter-shift gradients, BFGS, and
// the multistart / gamma-sweep / reoptimisation workflows built on them.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "nvqa/channels.hpp"
#include "nvqa/circuits.hpp"
#include "nvqa/measures.hpp"
#include "nvqa/parallel.hpp"
#include "nvqa/randstates.hpp"

namespace nvqa {

struct EnergyObjective {
  PauliSum hamiltonian;
};

struct InfidelityObjective {
  DensityMatrix target;  // pure
};

using Objective = std::variant<EnergyObjective, InfidelityObjective>;

/// A circuit, a noise model and what to minimise. Immutable; cheap to copy.
class CostFn {
 public:
  CostFn(Circuit circuit, NoiseSpec noise, Objective objective)
      : circuit_(std::move(circuit)), noise_(std::move(noise)), objective_(std::move(objective)) {
    if (noise_.n_qubits() != circuit_.n_qubits()) {
      throw std::invalid_argument("CostFn: noise spec does not match circuit width");
    }
    if (const auto* e = std::get_if<EnergyObjective>(&objective_)) {
      if (e->hamiltonian.n_qubits() != circuit_.n_qubits()) {
        throw std::invalid_argument("CostFn: Hamiltonian does not match circuit width");
      }
      reference_ = ground_truth(e->hamiltonian).state;
    } else {
      const auto& t = std::get<InfidelityObjective>(objective_).target;
      if (t.n_qubits() != circuit_.n_qubits()) {
        throw std::invalid_argument("CostFn: target does not match circuit width");
      }
      if (!is_pure(t)) throw std::invalid_argument("CostFn: infidelity target must be pure");
      reference_ = t;
    }
  }

  const Circuit& circuit() const { return circuit_; }
  const NoiseSpec& noise() const { return noise_; }
  const Objective& objective() const { return objective_; }
  int n_params() const { return circuit_.n_params(); }

  /// Pure state used for the fidelity measure: the ground state for energy
  /// objectives, the target otherwise.
  const DensityMatrix& reference() const { return *reference_; }

  DensityMatrix state(const Eigen::VectorXd& params) const { return evaluate(circuit_, params, noise_); }

  double cost_of(const DensityMatrix& rho) const {
    if (const auto* e = std::get_if<EnergyObjective>(&objective_)) return energy(rho, e->hamiltonian);
    return infidelity(*reference_, rho);
  }

  double operator()(const Eigen::VectorXd& params) const { return cost_of(state(params)); }

  QualityRecord quality(const DensityMatrix& rho) const {
    QualityRecord q;
    if (const auto* e = std::get_if<EnergyObjective>(&objective_)) q.energy = energy(rho, e->hamiltonian);
    q.fidelity = fidelity(*reference_, rho);
    if (rho.n_qubits() >= 2) q.concurrence = max_pairwise_concurrence(rho);
    return q;
  }

  CostFn with_noise(NoiseSpec noise) const {
    CostFn out = *this;
    if (noise.n_qubits() != circuit_.n_qubits()) {
      throw std::invalid_argument("CostFn::with_noise: noise spec does not match circuit width");
    }
    out.noise_ = std::move(noise);
    return out;
  }

  CostFn noiseless() const { return with_noise(NoiseSpec::none(circuit_.n_qubits())); }

 private:
  Circuit circuit_;
  NoiseSpec noise_;
  Objective objective_;
  std::optional<DensityMatrix> reference_;
};

/// Parameter-shift gradient: dC/dt_i = [C(t_i + pi/2) - C(t_i - pi/2)] / 2.
/// Exact because each parameter enters through a single Ry(t) = exp(-i t Y/2)
/// and the noise does not depend on the parameters.
inline Eigen::VectorXd gradient(const CostFn& cf, const Eigen::VectorXd& params) {
  constexpr double shift = std::numbers::pi / 2.0;
  Eigen::VectorXd g(params.size());
  Eigen::VectorXd p = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    p[i] = params[i] + shift;
    const double plus = cf(p);
    p[i] = params[i] - shift;
    const double minus = cf(p);
    p[i] = params[i];
    g[i] = 0.5 * (plus - minus);
  }
  return g;
}

// ---------------------------------------------------------------------------
// BFGS
// ---------------------------------------------------------------------------

struct BfgsOptions {
  double grad_tol = 1e-8;
  int max_iterations = 1000;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 60;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd g;
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
};

/// Dense inverse-Hessian BFGS with a backtracking Armijo line search. The
/// objective value never increases across accepted steps. When the quasi-Newton
/// direction cannot satisfy Armijo the inverse Hessian is reset once to the
/// identity; a second failure ends the run with the best point so far.
template <class Fn, class Grad>
BfgsResult bfgs(Fn&& f, Grad&& grad, Eigen::VectorXd x0, const BfgsOptions& opts = {}) {
  const Eigen::Index n = x0.size();
  BfgsResult r;
  r.x = std::move(x0);
  r.f = f(r.x);
  r.g = grad(r.x);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  bool h_is_identity = true;

  for (r.iterations = 0; r.iterations < opts.max_iterations; ++r.iterations) {
    if (r.g.norm() <= opts.grad_tol) {
      r.converged = true;
      return r;
    }
    Eigen::VectorXd dir = -h * r.g;
    double slope = r.g.dot(dir);
    if (!(slope < 0.0)) {
      h.setIdentity();
      h_is_identity = true;
      dir = -r.g;
      slope = r.g.dot(dir);
    }

    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    for (int k = 0; k <= opts.max_backtracks; ++k) {
      x_new = r.x + t * dir;
      f_new = f(x_new);
      if (f_new <= r.f + opts.armijo_c * t * slope) {
        accepted = true;
        break;
      }
      t *= opts.shrink;
    }
    if (!accepted) {
      if (!h_is_identity) {
        h.setIdentity();
        h_is_identity = true;
        continue;
      }
      r.line_search_failed = true;
      return r;
    }

    Eigen::VectorXd g_new = grad(x_new);
    const Eigen::VectorXd s = x_new - r.x;
    const Eigen::VectorXd y = g_new - r.g;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      if (h_is_identity) h *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = h * y;
      // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T, expanded.
      h += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
           rho * (hy * s.transpose() + s * hy.transpose());
      h_is_identity = false;
    }
    r.x = std::move(x_new);
    r.f = f_new;
    r.g = std::move(g_new);
  }
  r.converged = r.g.norm() <= opts.grad_tol;
  return r;
}

// ---------------------------------------------------------------------------
// Circuit optimisation
// ---------------------------------------------------------------------------

struct OptResult {
  Eigen::VectorXd params;  // radians, canonical [0, 2*pi)
  double cost = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  QualityRecord quality;
};

inline OptResult make_result(const CostFn& cf, const Eigen::VectorXd& params, int iterations,
                             double grad_norm, double grad_tol) {
  OptResult out;
  out.params = canonical_angles(params);
  const DensityMatrix rho = cf.state(out.params);
  out.cost = cf.cost_of(rho);
  out.grad_norm = grad_norm;
  out.iterations = iterations;
  out.converged = grad_norm <= grad_tol;
  out.quality = cf.quality(rho);
  return out;
}

inline OptResult minimize(const CostFn& cf, const Eigen::VectorXd& theta0, const BfgsOptions& opts = {}) {
  if (theta0.size() != cf.n_params()) {
    throw std::invalid_argument("minimize: starting point has " + std::to_string(theta0.size()) +
                                " entries, circuit has " + std::to_string(cf.n_params()) +
                                " parameters");
  }
  const auto r = bfgs([&](const Eigen::VectorXd& x) { return cf(x); },
                      [&](const Eigen::VectorXd& x) { return gradient(cf, x); }, theta0, opts);
  OptResult out;
  // Angles are wrapped into [0, 2*pi); the cost is periodic, so reported cost
  // and gradient are those of the BFGS iterate.
  out.params = canonical_angles(r.x);
  out.cost = r.f;
  out.grad_norm = r.g.norm();
  out.iterations = r.iterations;
  out.converged = r.converged;
  out.quality = cf.quality(cf.state(r.x));
  return out;
}

/// Normalised Hilbert-Schmidt overlap Tr[rho sigma] / sqrt(Tr rho^2 Tr sigma^2).
/// Equals 1 exactly when the two states coincide; reduces to the fidelity for
/// pure states.
inline double state_overlap(const DensityMatrix& a, const DensityMatrix& b) {
  const double ab = (a.matrix().cwiseProduct(b.matrix().transpose())).sum().real();
  return ab / std::sqrt(a.purity() * b.purity());
}

struct MultistartOptions {
  int n_starts = 100;
  std::uint64_t seed = 0;
  BfgsOptions bfgs;
  double cost_tol = 1e-6;           // |dC| below which two minima may coincide
  double overlap_tol = 1e-6;        // ... and state overlap at least 1 - overlap_tol
  double accept_grad_norm = 1e-5;   // runs stopping above this are not minima
  int threads = default_thread_count();
};

/// Collapses results onto distinct minima (same cost AND same output state),
/// keeping the lowest-cost representative, sorted by cost.
inline std::vector<OptResult> deduplicate_minima(const CostFn& cf, std::vector<OptResult> runs,
                                                 const MultistartOptions& opts) {
  std::vector<OptResult> reps;
  std::vector<DensityMatrix> rep_states;
  for (auto& r : runs) {
    if (!(r.converged || r.grad_norm <= opts.accept_grad_norm)) continue;
    DensityMatrix rho = cf.state(r.params);
    bool merged = false;
    for (std::size_t k = 0; k < reps.size(); ++k) {
      if (std::abs(reps[k].cost - r.cost) <= opts.cost_tol &&
          state_overlap(rep_states[k], rho) >= 1.0 - opts.overlap_tol) {
        if (r.cost < reps[k].cost) {
          reps[k] = std::move(r);
          rep_states[k] = std::move(rho);
        }
        merged = true;
        break;
      }
    }
    if (!merged) {
      reps.push_back(std::move(r));
      rep_states.push_back(std::move(rho));
    }
  }
  std::stable_sort(reps.begin(), reps.end(),
                   [](const OptResult& a, const OptResult& b) { return a.cost < b.cost; });
  return reps;
}

/// Starting point i is drawn from RngStream(seed, i), uniform on [0, 2*pi)^P.
inline Eigen::VectorXd random_angles(int n_params, std::uint64_t seed, std::uint64_t stream) {
  RngStream rng(seed, stream);
  Eigen::VectorXd x(n_params);
  for (int i = 0; i < n_params; ++i) x[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return x;
}

/// Every BFGS run from n_starts random points, in start order.
inline std::vector<OptResult> multistart_runs(const CostFn& cf, const MultistartOptions& opts) {
  if (opts.n_starts < 1) throw std::invalid_argument("multistart: n_starts must be >= 1");
  std::vector<std::optional<OptResult>> slots(static_cast<std::size_t>(opts.n_starts));
  parallel_for(
      slots.size(),
      [&](std::size_t i) {
        slots[i] = minimize(cf, random_angles(cf.n_params(), opts.seed, i), opts.bfgs);
      },
      opts.threads);
  std::vector<OptResult> runs;
  runs.reserve(slots.size());
  for (auto& s : slots) runs.push_back(std::move(*s));
  return runs;
}

/// Distinct local minima found from n_starts random starting points.
inline std::vector<OptResult> multistart(const CostFn& cf, const MultistartOptions& opts) {
  return deduplicate_minima(cf, multistart_runs(cf, opts), opts);
}

/// Lowest-cost run over the starts (whether or not it passed the minimum
/// acceptance test).
inline OptResult best_of(const CostFn& cf, const MultistartOptions& opts) {
  auto runs = multistart_runs(cf, opts);
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].cost < runs[best].cost) best = i;
  }
  return std::move(runs[best]);
}

enum class SweepMode { track, restart };

struct SweepPoint {
  double gamma = 0.0;
  std::vector<OptResult> minima;
};

/// Minima at each gamma. `base` fixes circuit, objective, noise kind and
/// per-qubit scale; only gamma varies. In track mode the first gamma is a
/// multistart and every later gamma warm-starts from the previous minima, so
/// branches can be followed through transitions.
inline std::vector<SweepPoint> sweep_gamma(const CostFn& base, std::span<const double> gammas,
                                           SweepMode mode, const MultistartOptions& opts) {
  if (!std::is_sorted(gammas.begin(), gammas.end())) {
    throw std::invalid_argument("sweep_gamma: gammas must be sorted ascending");
  }
  std::vector<SweepPoint> out;
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    const CostFn cf = base.with_noise(base.noise().with_gamma(gammas[gi]));
    SweepPoint pt{gammas[gi], {}};
    if (mode == SweepMode::restart || gi == 0) {
      pt.minima = multistart(cf, opts);
    } else {
      const auto& prev = out.back().minima;
      std::vector<OptResult> runs(prev.size());
      parallel_for(
          prev.size(), [&](std::size_t k) { runs[k] = minimize(cf, prev[k].params, opts.bfgs); },
          opts.threads);
      pt.minima = deduplicate_minima(cf, std::move(runs), opts);
    }
    out.push_back(std::move(pt));
  }
  return out;
}

struct ReoptPair {
  OptResult non_reopt;  // noiseless optimum evaluated with noise
  OptResult reopt;      // BFGS with noise started from the noiseless optimum
};

/// Both modes from a given noiseless optimum.
inline ReoptPair reoptimize_pair(const CostFn& cf, const OptResult& noiseless_optimum,
                                 const BfgsOptions& opts = {}) {
  ReoptPair out;
  out.non_reopt = make_result(cf, noiseless_optimum.params, 0,
                              gradient(cf, noiseless_optimum.params).norm(), opts.grad_tol);
  out.reopt = minimize(cf, noiseless_optimum.params, opts);
  return out;
}

/// Finds the noiseless optimum (best of a multistart) and runs both modes.
inline ReoptPair reoptimize_pair(const CostFn& cf, const MultistartOptions& opts) {
  return reoptimize_pair(cf, best_of(cf.noiseless(), opts), opts.bfgs);
}

}  // namespace nvqa
