// SPDX-License-Identifier: Apache-2.0
//
// First-order stochastic model of infidelity propagation through d identical
// noise channels:
//   mean relative infidelity      ~ alpha * gamma * d
//   variance of rel. infidelity   ~ beta * gamma^2 * d^2   (fully correlated layers)
// alpha and beta are the mean and variance, over target states, of
// -d/dgamma Tr[rho_T Lambda(rho_T)] at gamma = 0.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvqa/channels.hpp"
#include "nvqa/measures.hpp"
#include "nvqa/parallel.hpp"
#include "nvqa/randstates.hpp"

namespace nvqa {

/// Exact infidelity after d interleaved global depolarising channels on N
/// qubits: (1 - (1 - gamma)^d) (1 - 2^-N).
inline double global_depol_infidelity(double gamma, int d, int n_qubits) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("global_depol_infidelity: gamma outside [0, 1]");
  if (d < 0) throw std::invalid_argument("global_depol_infidelity: d must be >= 0");
  return (1.0 - std::pow(1.0 - gamma, d)) * (1.0 - std::ldexp(1.0, -n_qubits));
}

/// First-order expansion (1 - 2^-N) d gamma.
inline double global_depol_infidelity_linear(double gamma, int d, int n_qubits) {
  return (1.0 - std::ldexp(1.0, -n_qubits)) * d * gamma;
}

/// d/dgamma Tr[rho_T Lambda_gamma(rho_T)] at gamma = 0, with Lambda the product
/// channel of `kind` on every qubit.
///
/// Negative gamma is not a valid channel, so instead of a central difference
/// this uses the second-order one-sided stencil
///   f'(0) ~ (-3 f(0) + 4 f(eps) - f(2 eps)) / (2 eps),
/// which has the same O(eps^2) truncation error.
inline double linear_action_overlap_derivative(NoiseKind kind, const DensityMatrix& target,
                                               double eps = 1e-5) {
  if (!is_pure(target)) throw std::invalid_argument("linear_action_overlap_derivative: target must be pure");
  if (!(eps > 0.0 && 2.0 * eps <= 1.0)) throw std::invalid_argument("linear_action_overlap_derivative: bad eps");
  auto overlap = [&](double g) {
    return fidelity(target, apply_product_channel(target, NoiseSpec::uniform(kind, g, target.n_qubits())));
  };
  // fidelity() clamps to [0, 1]; f(0) = Tr[rho_T^2] = 1 for a pure target.
  const double f0 = target.purity();
  return (-3.0 * f0 + 4.0 * overlap(eps) - overlap(2.0 * eps)) / (2.0 * eps);
}

inline double linear_action_overlap_derivative(const KrausChannel& ch, const DensityMatrix& target,
                                               double eps = 1e-5) {
  return linear_action_overlap_derivative(ch.kind(), target, eps);
}

/// Draws one target state on n qubits from a stream.
using StateSampler = std::function<DensityMatrix(int, RngStream&)>;

inline StateSampler haar_sampler() { return [](int n, RngStream& r) { return sample_real_haar_state(n, r); }; }
inline StateSampler product_sampler() { return [](int n, RngStream& r) { return sample_real_product_state(n, r); }; }

struct ModelParams {
  double alpha = 0.0;
  double beta = 0.0;
  double stderr_alpha = 0.0;
  double stderr_beta = 0.0;
  int n_samples = 0;
  NoiseKind kind = NoiseKind::phase;
  int n_qubits = 0;
};

/// Sample mean/variance of -f'(0) over targets. Sample i uses RngStream(seed, i).
inline ModelParams estimate_alpha_beta(NoiseKind kind, int n_qubits, const StateSampler& sampler,
                                       int n_samples, std::uint64_t seed, double eps = 1e-5) {
  if (n_samples < 100) throw std::invalid_argument("estimate_alpha_beta: need at least 100 samples");
  std::vector<double> r(static_cast<std::size_t>(n_samples));
  parallel_for(r.size(), [&](std::size_t i) {
    RngStream rng(seed, i);
    r[i] = -linear_action_overlap_derivative(kind, sampler(n_qubits, rng), eps);
  });

  const double n = static_cast<double>(n_samples);
  double mean = 0.0;
  for (double v : r) mean += v;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : r) {
    const double c = v - mean;
    m2 += c * c;
    m4 += c * c * c * c;
  }
  const double var = m2 / (n - 1.0);
  m4 /= n;

  ModelParams p;
  p.alpha = mean;
  p.beta = var;
  p.stderr_alpha = std::sqrt(var / n);
  // Standard error of the sample variance.
  p.stderr_beta = std::sqrt(std::max(0.0, (m4 - var * var * (n - 3.0) / (n - 1.0)) / n));
  p.n_samples = n_samples;
  p.kind = kind;
  p.n_qubits = n_qubits;
  return p;
}

struct ModelPrediction {
  double mean_rel_infidelity = 0.0;
  double std_rel_infidelity = 0.0;
  bool beyond_linear_regime = false;  // alpha * gamma * d > 0.5
};

inline ModelPrediction predict(const ModelParams& params, double gamma, int d) {
  const double x = gamma * d;
  return {params.alpha * x, std::sqrt(params.beta) * x, params.alpha * x > 0.5};
}

struct AlphaScalingPoint {
  int n_qubits = 0;
  double alpha = 0.0;
  double stderr_alpha = 0.0;
};

/// alpha(n) for product-state targets, expected to follow n * alpha(1).
inline std::vector<AlphaScalingPoint> alpha_scaling_check(NoiseKind kind, std::span<const int> n_list,
                                                          int samples, std::uint64_t seed) {
  std::vector<AlphaScalingPoint> out;
  for (int n : n_list) {
    const auto p = estimate_alpha_beta(kind, n, product_sampler(), samples, seed + static_cast<std::uint64_t>(n));
    out.push_back({n, p.alpha, p.stderr_alpha});
  }
  return out;
}

}  // namespace nvqa
