// SPDX-License-Identifier: Apache-2.0
//
// Dense N-qubit density matrices and the linear-algebra primitives the rest
// of the library is built on.
//
// Convention: qubit 0 is the leftmost tensor factor, i.e. the most
// significant bit of a computational-basis index.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nvqa/pauli.hpp"

namespace nvqa {

inline constexpr int kMaxQubits = 10;

/// Tolerances used by the invariant checks.
struct StateTolerance {
  double hermitian = 1e-12;
  double trace = 1e-10;
  double positivity = 1e-10;
};

/// Result of DensityMatrix::check(); every field is a measured deviation.
struct StateReport {
  double hermiticity_error = 0.0;  // max |rho - rho^dagger|
  double trace_error = 0.0;        // |Tr rho - 1|
  double min_eigenvalue = 0.0;
  double purity = 0.0;

  bool valid(const StateTolerance& tol = {}) const {
    return hermiticity_error <= tol.hermitian && trace_error <= tol.trace &&
           min_eigenvalue >= -tol.positivity;
  }
};

class DensityMatrix {
 public:
  DensityMatrix(int n_qubits, Matrix data) : n_qubits_(n_qubits), data_(std::move(data)) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
      throw std::invalid_argument("DensityMatrix: n_qubits must be in [1, 10], got " +
                                  std::to_string(n_qubits));
    }
    const auto d = static_cast<Eigen::Index>(std::size_t{1} << n_qubits);
    if (data_.rows() != d || data_.cols() != d) {
      throw std::invalid_argument("DensityMatrix: matrix shape does not match 2^n_qubits");
    }
  }

  /// |psi><psi| for a normalised amplitude vector of length 2^n.
  static DensityMatrix from_pure(const Eigen::VectorXcd& psi) {
    const auto d = static_cast<std::size_t>(psi.size());
    if (d < 2 || (d & (d - 1)) != 0) {
      throw std::invalid_argument("DensityMatrix::from_pure: length must be a power of two");
    }
    const int n = std::countr_zero(d);
    return DensityMatrix(n, psi * psi.adjoint());
  }

  static DensityMatrix maximally_mixed(int n_qubits) {
    const auto d = static_cast<Eigen::Index>(std::size_t{1} << n_qubits);
    return DensityMatrix(n_qubits, Matrix::Identity(d, d) / static_cast<double>(d));
  }

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return data_.rows(); }
  const Matrix& matrix() const { return data_; }
  cplx operator()(Eigen::Index i, Eigen::Index j) const { return data_(i, j); }

  double trace() const { return data_.trace().real(); }
  double purity() const { return (data_ * data_).trace().real(); }

  /// (rho + rho^dagger) / 2. Used to remove Hermiticity drift; eigenvalues are
  /// never clipped.
  DensityMatrix symmetrized() const {
    return DensityMatrix(n_qubits_, (data_ + data_.adjoint()) * 0.5);
  }

  StateReport check() const {
    StateReport r;
    r.hermiticity_error = (data_ - data_.adjoint()).cwiseAbs().maxCoeff();
    r.trace_error = std::abs(data_.trace() - cplx{1.0, 0.0});
    Eigen::SelfAdjointEigenSolver<Matrix> es((data_ + data_.adjoint()) * 0.5,
                                             Eigen::EigenvaluesOnly);
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    r.purity = purity();
    return r;
  }

 private:
  int n_qubits_;
  Matrix data_;
};

// ---------------------------------------------------------------------------
// In-place kernels. These operate on raw matrices and are what the circuit
// evaluator uses in its inner loop; the public functions below wrap them.
// ---------------------------------------------------------------------------
namespace detail {

/// 4x4 superoperator of a single-qubit map on the row-major block
/// (b00, b01, b10, b11): out_ab = sum_k sum_cd K_ac b_cd conj(K_bd).
using Superop1q = Eigen::Matrix4cd;

inline Superop1q superop_from_kraus(std::span<const Eigen::Matrix2cd> kraus) {
  Superop1q s = Superop1q::Zero();
  for (const auto& k : kraus) {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d) s(2 * a + b, 2 * c + d) += k(a, c) * std::conj(k(b, d));
  }
  return s;
}

/// Applies a single-qubit superoperator to qubit q of an n-qubit matrix.
inline void apply_superop_1q(Matrix& m, int n_qubits, const Superop1q& s, int q) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  const std::size_t mask = qubit_mask(n_qubits, q);
  // All supported channels have a real superoperator that mixes only the
  // populations (00, 11) and rescales the coherences (01, 10).
  const bool sparse_real = s.imag().isZero(0.0) && s(0, 1) == 0.0 && s(0, 2) == 0.0 && s(1, 0) == 0.0 &&
                           s(1, 2) == 0.0 && s(1, 3) == 0.0 && s(2, 0) == 0.0 && s(2, 1) == 0.0 &&
                           s(2, 3) == 0.0 && s(3, 1) == 0.0 && s(3, 2) == 0.0;
  if (sparse_real) {
    const double p00 = s(0, 0).real(), p03 = s(0, 3).real(), p30 = s(3, 0).real(), p33 = s(3, 3).real();
    const double c01 = s(1, 1).real(), c10 = s(2, 2).real();
    for (std::size_t j0 = 0; j0 < dim; ++j0) {
      if (j0 & mask) continue;
      const auto j1 = static_cast<Eigen::Index>(j0 | mask);
      const auto jj0 = static_cast<Eigen::Index>(j0);
      for (std::size_t i0 = 0; i0 < dim; ++i0) {
        if (i0 & mask) continue;
        const auto i1 = static_cast<Eigen::Index>(i0 | mask);
        const auto ii0 = static_cast<Eigen::Index>(i0);
        const cplx a = m(ii0, jj0), d = m(i1, j1);
        m(ii0, jj0) = p00 * a + p03 * d;
        m(i1, j1) = p30 * a + p33 * d;
        m(ii0, j1) *= c01;
        m(i1, jj0) *= c10;
      }
    }
    return;
  }
  for (std::size_t j0 = 0; j0 < dim; ++j0) {
    if (j0 & mask) continue;
    const std::size_t j1 = j0 | mask;
    for (std::size_t i0 = 0; i0 < dim; ++i0) {
      if (i0 & mask) continue;
      const std::size_t i1 = i0 | mask;
      const Eigen::Vector4cd b{m(i0, j0), m(i0, j1), m(i1, j0), m(i1, j1)};
      const Eigen::Vector4cd o = s * b;
      m(i0, j0) = o[0];
      m(i0, j1) = o[1];
      m(i1, j0) = o[2];
      m(i1, j1) = o[3];
    }
  }
}

/// rho -> R rho R^T for a real 2x2 R on qubit q (rows first, then columns).
inline void apply_real_1q(Matrix& m, int n_qubits, const Eigen::Matrix2d& r, int q) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  const std::size_t mask = qubit_mask(n_qubits, q);
  const auto d = static_cast<Eigen::Index>(dim);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (std::size_t i0 = 0; i0 < dim; ++i0) {
      if (i0 & mask) continue;
      const auto a = static_cast<Eigen::Index>(i0), b = static_cast<Eigen::Index>(i0 | mask);
      const cplx x = m(a, j), y = m(b, j);
      m(a, j) = r(0, 0) * x + r(0, 1) * y;
      m(b, j) = r(1, 0) * x + r(1, 1) * y;
    }
  }
  for (std::size_t j0 = 0; j0 < dim; ++j0) {
    if (j0 & mask) continue;
    const auto a = static_cast<Eigen::Index>(j0), b = static_cast<Eigen::Index>(j0 | mask);
    for (Eigen::Index i = 0; i < d; ++i) {
      const cplx x = m(i, a), y = m(i, b);
      m(i, a) = r(0, 0) * x + r(0, 1) * y;
      m(i, b) = r(1, 0) * x + r(1, 1) * y;
    }
  }
}

/// rho -> CX rho CX, control c, target t.
inline void apply_cx(Matrix& m, int n_qubits, int control, int target) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  const std::size_t cm = qubit_mask(n_qubits, control);
  const std::size_t tm = qubit_mask(n_qubits, target);
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & cm) && !(i & tm)) m.row(static_cast<Eigen::Index>(i)).swap(m.row(static_cast<Eigen::Index>(i | tm)));
  }
  for (std::size_t j = 0; j < dim; ++j) {
    if ((j & cm) && !(j & tm)) m.col(static_cast<Eigen::Index>(j)).swap(m.col(static_cast<Eigen::Index>(j | tm)));
  }
}

inline void check_qubit(int n_qubits, int q, const char* what) {
  if (q < 0 || q >= n_qubits) {
    throw std::invalid_argument(std::string(what) + ": qubit index " + std::to_string(q) +
                                " out of range for " + std::to_string(n_qubits) + " qubits");
  }
}

inline void check_distinct_targets(int n_qubits, std::span<const int> targets, const char* what) {
  for (std::size_t a = 0; a < targets.size(); ++a) {
    check_qubit(n_qubits, targets[a], what);
    for (std::size_t b = a + 1; b < targets.size(); ++b) {
      if (targets[a] == targets[b]) {
        throw std::invalid_argument(std::string(what) + ": duplicate qubit index");
      }
    }
  }
}

/// Extracts the bits of `index` at the listed qubits, first listed = MSB.
inline std::size_t gather_bits(std::size_t index, int n_qubits, std::span<const int> qubits) {
  std::size_t out = 0;
  for (int q : qubits) out = (out << 1) | ((index & qubit_mask(n_qubits, q)) ? 1U : 0U);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline DensityMatrix zero_state(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("zero_state: n_qubits must be in [1, 10]");
  }
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << n_qubits);
  Matrix m = Matrix::Zero(d, d);
  m(0, 0) = 1.0;
  return DensityMatrix(n_qubits, std::move(m));
}

/// Embeds a k-qubit operator acting on `targets` (first target = MSB of the
/// operator's index) into the full 2^n space.
inline Matrix embed_operator(const Matrix& op, int n_qubits, std::span<const int> targets) {
  detail::check_distinct_targets(n_qubits, targets, "embed_operator");
  const auto k = static_cast<int>(targets.size());
  if (op.rows() != (Eigen::Index{1} << k) || op.cols() != op.rows()) {
    throw std::invalid_argument("embed_operator: operator size does not match target count");
  }
  std::size_t target_mask = 0;
  for (int q : targets) target_mask |= detail::qubit_mask(n_qubits, q);
  const std::size_t dim = std::size_t{1} << n_qubits;
  Matrix full = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      if ((r & ~target_mask) != (c & ~target_mask)) continue;
      full(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          op(static_cast<Eigen::Index>(detail::gather_bits(r, n_qubits, targets)),
             static_cast<Eigen::Index>(detail::gather_bits(c, n_qubits, targets)));
    }
  }
  return full;
}

/// U rho U^dagger with U embedded on the target qubits.
inline DensityMatrix apply_unitary(const DensityMatrix& rho, const Matrix& u,
                                   std::span<const int> targets) {
  if (u.rows() != u.cols()) throw std::invalid_argument("apply_unitary: U must be square");
  const double err =
      (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
  if (err > 1e-12) {
    throw std::invalid_argument("apply_unitary: operator is not unitary (deviation " +
                                std::to_string(err) + ")");
  }
  if (targets.size() == 1) {
    detail::check_qubit(rho.n_qubits(), targets[0], "apply_unitary");
    const Eigen::Matrix2cd u2 = u;
    Matrix m = rho.matrix();
    detail::apply_superop_1q(m, rho.n_qubits(), detail::superop_from_kraus({&u2, 1}), targets[0]);
    return DensityMatrix(rho.n_qubits(), std::move(m));
  }
  const Matrix full = embed_operator(u, rho.n_qubits(), targets);
  return DensityMatrix(rho.n_qubits(), full * rho.matrix() * full.adjoint());
}

inline DensityMatrix apply_unitary(const DensityMatrix& rho, const Matrix& u,
                                   std::initializer_list<int> targets) {
  return apply_unitary(rho, u, std::span<const int>(targets.begin(), targets.size()));
}

/// Reduced state on `keep`; the result's qubit i is keep[i].
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  const int n = rho.n_qubits();
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  detail::check_distinct_targets(n, keep, "partial_trace");

  std::vector<int> traced;
  for (int q = 0; q < n; ++q) {
    if (std::find(keep.begin(), keep.end(), q) == keep.end()) traced.push_back(q);
  }
  const auto k = static_cast<int>(keep.size());
  const std::size_t dk = std::size_t{1} << k;
  const std::size_t dt = std::size_t{1} << traced.size();

  // Scatter a (kept-bits, traced-bits) pair back into a full index.
  auto full_index = [&](std::size_t kept_bits, std::size_t traced_bits) {
    std::size_t idx = 0;
    for (int i = 0; i < k; ++i) {
      if (kept_bits & (std::size_t{1} << (k - 1 - i))) idx |= detail::qubit_mask(n, keep[i]);
    }
    const auto nt = static_cast<int>(traced.size());
    for (int i = 0; i < nt; ++i) {
      if (traced_bits & (std::size_t{1} << (nt - 1 - i))) idx |= detail::qubit_mask(n, traced[i]);
    }
    return static_cast<Eigen::Index>(idx);
  };

  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  for (std::size_t a = 0; a < dk; ++a) {
    for (std::size_t b = 0; b < dk; ++b) {
      cplx acc{0.0, 0.0};
      for (std::size_t t = 0; t < dt; ++t) acc += rho(full_index(a, t), full_index(b, t));
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = acc;
    }
  }
  return DensityMatrix(k, std::move(out));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<int> keep) {
  return partial_trace(rho, std::span<const int>(keep.begin(), keep.size()));
}

namespace detail {

/// Tr[P rho] for one Pauli word, without forming P.
inline cplx pauli_trace(const DensityMatrix& rho, const PauliAction& act) {
  cplx acc{0.0, 0.0};
  const auto dim = static_cast<std::size_t>(rho.dim());
  for (std::size_t k = 0; k < dim; ++k) {
    // Tr[P rho] = sum_k <k|rho P|k> = sum_k phase(k) rho(k, k ^ flip)
    acc += act.phase(k) * rho(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k ^ act.flip));
  }
  return acc;
}

}  // namespace detail

/// Tr[O rho]. Throws if the imaginary residue exceeds 1e-8.
inline double expectation(const DensityMatrix& rho, const PauliSum& op) {
  if (op.n_qubits() != rho.n_qubits()) {
    throw std::invalid_argument("expectation: observable acts on " +
                                std::to_string(op.n_qubits()) + " qubits, state has " +
                                std::to_string(rho.n_qubits()));
  }
  cplx acc{0.0, 0.0};
  for (const auto& t : op.terms()) {
    acc += t.coeff * detail::pauli_trace(rho, detail::PauliAction(t.word));
  }
  if (std::abs(acc.imag()) > 1e-8) {
    throw std::runtime_error("expectation: imaginary residue " + std::to_string(acc.imag()));
  }
  return acc.real();
}

/// Eigenvalues of a Hermitian matrix, sorted descending.
inline std::vector<double> eigen_desc(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigen_desc: matrix must be square");
  if (m.size() > 0 && (m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("eigen_desc: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

/// Single-qubit gates used by the circuit IR.
inline Eigen::Matrix2cd ry_matrix(double theta) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  Eigen::Matrix2cd u;
  u << c, -s, s, c;
  return u;
}

inline Matrix cx_matrix() {
  Matrix u = Matrix::Zero(4, 4);
  u(0, 0) = u(1, 1) = u(2, 3) = u(3, 2) = 1.0;
  return u;
}

}  // namespace nvqa
