// SPDX-License-Identifier: Apache-2.0
//
// Real Haar-random pure states and the deterministic RNG streams that feed
// every sampler and multistart in the library.
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "nvqa/qstate.hpp"

namespace nvqa {

/// Deterministic random stream identified by (seed, stream_id). Distinct ids
/// give independent sequences, so work can be split across threads without
/// changing results.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32), 0x6e76u};
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::mt19937_64& engine() { return engine_; }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return normal_(engine_); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Haar-distributed real orthogonal d x d matrix: QR of a Gaussian matrix with
/// the column signs fixed so that diag(R) > 0.
inline Eigen::MatrixXd sample_haar_orthogonal(Eigen::Index d, RngStream& rng) {
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

/// First column of a Haar orthogonal matrix: a uniformly random real unit vector.
inline Eigen::VectorXd sample_real_haar_vector(int n_qubits, RngStream& rng) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("sample_real_haar_state: n_qubits must be in [1, 10]");
  }
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  return sample_haar_orthogonal(d, rng).col(0);
}

inline DensityMatrix sample_real_haar_state(int n_qubits, RngStream& rng) {
  const Eigen::VectorXcd v = sample_real_haar_vector(n_qubits, rng).cast<cplx>();
  return DensityMatrix::from_pure(v);
}

/// Tensor product of independent single-qubit real Haar states.
inline DensityMatrix sample_real_product_state(int n_qubits, RngStream& rng) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("sample_real_product_state: n_qubits must be in [1, 10]");
  }
  Eigen::VectorXcd psi(1);
  psi[0] = 1.0;
  for (int q = 0; q < n_qubits; ++q) {
    const Eigen::VectorXd v = sample_real_haar_vector(1, rng);
    Eigen::VectorXcd next(psi.size() * 2);
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      next[2 * i] = psi[i] * v[0];
      next[2 * i + 1] = psi[i] * v[1];
    }
    psi = std::move(next);
  }
  return DensityMatrix::from_pure(psi);
}

}  // namespace nvqa
