// SPDX-License-Identifier: Apache-2.0
//
// State-quality functionals: energy, fidelity against a pure reference,
// concurrence, maximum pairwise concurrence, and exact ground truth.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nvqa/pauli.hpp"
#include "nvqa/qstate.hpp"

namespace nvqa {

/// Energy, fidelity and concurrence of one prepared state. Entries that do not
/// apply (no Hamiltonian, single qubit) are NaN.
struct QualityRecord {
  double energy = std::numeric_limits<double>::quiet_NaN();
  double fidelity = std::numeric_limits<double>::quiet_NaN();
  double concurrence = std::numeric_limits<double>::quiet_NaN();
};

/// Z1 Z2 + X1 + X2 (transverse-field Ising form).
inline PauliSum transverse_ising_2q() {
  return PauliSum(2, {{1.0, "ZZ"}, {1.0, "XI"}, {1.0, "IX"}});
}

/// Z1 Z3 + (X1 X2 + Y1 Y2 + X3 X4 + Y3 Y4) / 2. Shares its ground-state
/// energy with transverse_ising_2q().
inline PauliSum impurity_4q() {
  return PauliSum(4, {{1.0, "ZIZI"},
                      {0.5, "XXII"},
                      {0.5, "YYII"},
                      {0.5, "IIXX"},
                      {0.5, "IIYY"}});
}

inline double energy(const DensityMatrix& rho, const PauliSum& h) { return expectation(rho, h); }

inline bool is_pure(const DensityMatrix& rho, double tol = 1e-8) {
  return std::abs(rho.purity() - 1.0) <= tol;
}

/// Tr[sigma rho], valid because sigma is pure.
inline double fidelity(const DensityMatrix& sigma_pure, const DensityMatrix& rho) {
  if (sigma_pure.n_qubits() != rho.n_qubits()) {
    throw std::invalid_argument("fidelity: qubit-count mismatch");
  }
  if (!is_pure(sigma_pure)) {
    throw std::invalid_argument("fidelity: reference state must be pure (purity " +
                                std::to_string(sigma_pure.purity()) + ")");
  }
  const cplx f = (sigma_pure.matrix().cwiseProduct(rho.matrix().transpose())).sum();
  if (std::abs(f.imag()) > 1e-8) {
    throw std::runtime_error("fidelity: imaginary residue " + std::to_string(f.imag()));
  }
  return std::clamp(f.real(), 0.0, 1.0);
}

inline double infidelity(const DensityMatrix& sigma_pure, const DensityMatrix& rho) {
  return 1.0 - fidelity(sigma_pure, rho);
}

/// Wootters concurrence max(0, l1 - l2 - l3 - l4). The l_i are the square
/// roots of the eigenvalues of rho * rho~, which equal the eigenvalues of
/// sqrt(sqrt(rho) rho~ sqrt(rho)) without needing a matrix square root.
inline double concurrence(const DensityMatrix& rho) {
  if (rho.n_qubits() != 2) {
    throw std::invalid_argument("concurrence: expects a 2-qubit state, got " +
                                std::to_string(rho.n_qubits()));
  }
  // sigma_y (x) sigma_y is real: anti-diagonal (-1, 1, 1, -1).
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const Eigen::Matrix4cd r = rho.matrix();
  const Eigen::Matrix4cd flipped = yy * r.conjugate() * yy;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(r * flipped, false);
  std::array<double, 4> lam{};
  for (int i = 0; i < 4; ++i) {
    const cplx mu = es.eigenvalues()[i];
    if (std::abs(mu.imag()) > 1e-6) {
      throw std::runtime_error("concurrence: complex eigenvalue of rho*rho~ (" +
                               std::to_string(mu.imag()) + ")");
    }
    lam[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, mu.real()));
  }
  std::sort(lam.begin(), lam.end(), std::greater<>());
  return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

/// Maximum of the concurrence over every two-qubit marginal.
inline double max_pairwise_concurrence(const DensityMatrix& rho) {
  const int n = rho.n_qubits();
  if (n < 2) throw std::invalid_argument("max_pairwise_concurrence: needs at least 2 qubits");
  if (n == 2) return concurrence(rho);
  double best = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      best = std::max(best, concurrence(partial_trace(rho, {a, b})));
    }
  }
  return best;
}

struct GroundTruth {
  double energy = 0.0;
  DensityMatrix state;   // projector onto the lowest eigenvector
  int degeneracy = 1;    // dimension of the lowest eigenspace (1e-9 window)
  bool degenerate() const { return degeneracy > 1; }
};

inline GroundTruth ground_truth(const PauliSum& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
  const auto& ev = es.eigenvalues();
  const double e0 = ev[0];
  int deg = 1;
  while (deg < ev.size() && ev[deg] - e0 <= 1e-9) ++deg;
  const Eigen::VectorXcd psi = es.eigenvectors().col(0);
  return {e0, DensityMatrix::from_pure(psi), deg};
}

}  // namespace nvqa
