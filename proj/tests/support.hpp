// SPDX-License-Identifier: Apache-2.0
//
// Test-only helpers and independent oracles. Nothing in here calls the
// library's fast kernels for the quantity it is checking.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "nvqa/channels.hpp"
#include "nvqa/optimize.hpp"
#include "nvqa/qstate.hpp"

namespace nvqa::test {

inline Eigen::VectorXcd random_pure_vector(int n_qubits, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  Eigen::VectorXcd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = cplx{nd(gen), nd(gen)};
  return v / v.norm();
}

inline DensityMatrix random_pure(int n_qubits, std::mt19937_64& gen) {
  return DensityMatrix::from_pure(random_pure_vector(n_qubits, gen));
}

/// Full-rank mixed state G G^dagger / Tr with complex Gaussian G.
inline DensityMatrix random_mixed(int n_qubits, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  Matrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = cplx{nd(gen), nd(gen)};
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(n_qubits, rho);
}

/// Haar-ish random single-qubit unitary from a random Hermitian generator.
inline Eigen::Matrix2cd random_unitary_1q(std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Eigen::Matrix2cd h;
  h << nd(gen), cplx{nd(gen), nd(gen)}, 0, nd(gen);
  h(1, 0) = std::conj(h(0, 1));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h);
  Eigen::Vector2cd phases;
  for (int i = 0; i < 2; ++i) phases[i] = std::exp(cplx{0.0, es.eigenvalues()[i]});
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Kronecker product of dense matrices.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Operator on qubit q of n via explicit Kronecker products (qubit 0 leftmost).
inline Matrix embed_by_kron(const Matrix& op, int n_qubits, int q) {
  Matrix out = Matrix::Identity(1, 1);
  for (int k = 0; k < n_qubits; ++k) out = kron(out, k == q ? op : Matrix::Identity(2, 2));
  return out;
}

/// Brute-force product channel: the full tensor-product Kraus set
/// {E_i1 (x) E_i2 (x) ... } applied as sum_k K rho K^dagger.
inline Matrix tensor_kraus_oracle(const Matrix& rho, int n_qubits, const KrausChannel& ch) {
  std::vector<Matrix> ops = {Matrix::Identity(1, 1)};
  for (int q = 0; q < n_qubits; ++q) {
    std::vector<Matrix> next;
    for (const auto& a : ops)
      for (const auto& e : ch.kraus()) next.push_back(kron(a, Matrix(e)));
    ops = std::move(next);
  }
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (const auto& k : ops) out += k * rho * k.adjoint();
  return out;
}

/// Global depolarising channel (1 - gamma) rho + gamma 1 / 2^N.
inline Matrix global_depolarise(const Matrix& rho, double gamma) {
  const auto d = static_cast<double>(rho.rows());
  return (1.0 - gamma) * rho + gamma * Matrix::Identity(rho.rows(), rho.cols()) / d;
}

/// Central finite-difference gradient.
inline Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                                  const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd p = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    p[i] = x[i] + h;
    const double fp = f(p);
    p[i] = x[i] - h;
    const double fm = f(p);
    p[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace nvqa::test
