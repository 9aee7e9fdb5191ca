// SPDX-License-Identifier: Apache-2.0
//
// Fast self-checks of the simulator's invariants, run by `nvqa verify`.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nvqa/channels.hpp"
#include "nvqa/circuits.hpp"
#include "nvqa/degen.hpp"
#include "nvqa/measures.hpp"
#include "nvqa/noisemodel.hpp"
#include "nvqa/optimize.hpp"
#include "nvqa/randstates.hpp"

namespace nvqa {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // worst observed error (or the measured quantity)
  double tolerance = 0.0;
};

namespace detail {

inline Matrix kron2(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CheckResult make_check(std::string name, double value, double tol) {
  return {std::move(name), value <= tol, value, tol};
}

}  // namespace detail

inline std::vector<CheckResult> verify_invariants(std::uint64_t seed = 7) {
  std::vector<CheckResult> out;

  double worst = 0.0;
  for (auto kind : kAllNoiseKinds)
    for (int i = 0; i <= 100; ++i) worst = std::max(worst, make_channel(kind, i / 100.0).completeness_error());
  out.push_back(detail::make_check("kraus completeness, 101-point gamma grid", worst, 1e-12));

  // Product channel against the explicit 2-qubit tensor Kraus set.
  worst = 0.0;
  for (auto kind : kAllNoiseKinds) {
    const auto ch = make_channel(kind, 0.37);
    for (std::uint64_t s = 0; s < 10; ++s) {
      RngStream rng(seed, s);
      const auto rho = sample_real_haar_state(2, rng);
      Matrix oracle = Matrix::Zero(4, 4);
      for (const auto& a : ch.kraus())
        for (const auto& b : ch.kraus()) {
          const Matrix k = detail::kron2(Matrix(a), Matrix(b));
          oracle += k * rho.matrix() * k.adjoint();
        }
      worst = std::max(worst, (apply_product_channel(rho, NoiseSpec::uniform(kind, 0.37, 2)).matrix() - oracle)
                                  .cwiseAbs()
                                  .maxCoeff());
    }
  }
  out.push_back(detail::make_check("product channel vs tensor Kraus set", worst, 1e-12));

  // Parameter shift against central differences.
  worst = 0.0;
  for (auto kind : kAllNoiseKinds) {
    RngStream rng(seed, 100);
    const CostFn cf(build_hea(2), NoiseSpec::uniform(kind, 0.1, 4), InfidelityObjective{sample_real_haar_state(4, rng)});
    const auto theta = random_angles(cf.n_params(), seed, 101);
    const auto g = gradient(cf, theta);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      Eigen::VectorXd p = theta, m = theta;
      p[i] += 1e-6;
      m[i] -= 1e-6;
      worst = std::max(worst, std::abs(g[i] - (cf(p) - cf(m)) / 2e-6));
    }
  }
  out.push_back(detail::make_check("parameter shift vs finite difference", worst, 1e-6));

  // Global depolarising closed form against repeated application.
  worst = 0.0;
  for (int n = 1; n <= 3; ++n) {
    RngStream rng(seed, 200 + static_cast<std::uint64_t>(n));
    const auto psi = sample_real_haar_state(n, rng);
    Matrix rho = psi.matrix();
    const double g = 0.07;
    const auto dim = static_cast<double>(rho.rows());
    for (int k = 0; k < 5; ++k) rho = (1.0 - g) * rho + g * Matrix::Identity(rho.rows(), rho.cols()) / dim;
    const double sim = 1.0 - (psi.matrix() * rho).trace().real();
    worst = std::max(worst, std::abs(sim - global_depol_infidelity(g, 5, n)));
  }
  out.push_back(detail::make_check("global depolarising closed form", worst, 1e-12));

  // Degeneracy maps are verified inside the generator; it throws on failure.
  try {
    const auto group = generate_degeneracy_maps(build_hea(2));
    out.push_back({"degeneracy maps verified (HEA L=2, " + std::to_string(group.maps.size()) + " maps)", true, 0.0, 1e-10});
  } catch (const std::exception&) {
    out.push_back({"degeneracy maps verified (HEA L=2)", false, 1.0, 1e-10});
  }

  // Noiseless 2-qubit VQE reaches the exact ground energy.
  MultistartOptions opts;
  opts.n_starts = 10;
  opts.seed = seed;
  const auto best = best_of(CostFn(build_2q_circuit(TwoQubitVariant::a), NoiseSpec::none(2),
                                   EnergyObjective{transverse_ising_2q()}),
                            opts);
  out.push_back(detail::make_check("2-qubit VQE ground energy", std::abs(best.cost + std::sqrt(5.0)), 1e-6));
  return out;
}

}  // namespace nvqa
