// SPDX-License-Identifier: Apache-2.0
//
// Single-qubit Kraus noise channels, product channels over all qubits, and
// Pauli transfer matrices.
#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nvqa/qstate.hpp"

namespace nvqa {

enum class NoiseKind { phase, amplitude, depolarising };

inline constexpr std::array<NoiseKind, 3> kAllNoiseKinds = {
    NoiseKind::phase, NoiseKind::amplitude, NoiseKind::depolarising};

inline std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::phase: return "phase";
    case NoiseKind::amplitude: return "amplitude";
    case NoiseKind::depolarising: return "depolarising";
  }
  return "unknown";
}

inline NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "phase") return NoiseKind::phase;
  if (name == "amplitude") return NoiseKind::amplitude;
  if (name == "depolarising" || name == "depolarizing") return NoiseKind::depolarising;
  throw std::invalid_argument("unknown noise kind '" + std::string(name) + "'");
}

/// A single-qubit channel rho -> sum_k E_k rho E_k^dagger with strength gamma.
class KrausChannel {
 public:
  KrausChannel(NoiseKind kind, double gamma, std::vector<Eigen::Matrix2cd> kraus)
      : kind_(kind), gamma_(gamma), kraus_(std::move(kraus)),
        superop_(detail::superop_from_kraus(kraus_)) {}

  NoiseKind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  const std::vector<Eigen::Matrix2cd>& kraus() const { return kraus_; }
  const detail::Superop1q& superop() const { return superop_; }

  /// max |sum_k E_k^dagger E_k - 1|
  double completeness_error() const {
    Eigen::Matrix2cd acc = Eigen::Matrix2cd::Zero();
    for (const auto& e : kraus_) acc += e.adjoint() * e;
    return (acc - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
  }

 private:
  NoiseKind kind_;
  double gamma_;
  std::vector<Eigen::Matrix2cd> kraus_;
  detail::Superop1q superop_;
};

inline KrausChannel make_channel(NoiseKind kind, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("make_channel: gamma must lie in [0, 1], got " +
                                std::to_string(gamma));
  }
  const double keep = std::sqrt(1.0 - gamma);
  const double g = std::sqrt(gamma);
  std::vector<Eigen::Matrix2cd> ks;
  switch (kind) {
    case NoiseKind::phase: {
      Eigen::Matrix2cd e1, e2;
      e1 << 1, 0, 0, keep;
      e2 << 0, 0, 0, g;
      ks = {e1, e2};
      break;
    }
    case NoiseKind::amplitude: {
      Eigen::Matrix2cd e1, e2;
      e1 << 1, 0, 0, keep;
      e2 << 0, g, 0, 0;
      ks = {e1, e2};
      break;
    }
    case NoiseKind::depolarising: {
      const double a = std::sqrt(1.0 - 3.0 * gamma / 4.0);
      const double b = std::sqrt(gamma / 4.0);
      const cplx i{0.0, 1.0};
      Eigen::Matrix2cd e1, ex, ey, ez;
      e1 << a, 0, 0, a;
      ex << 0, b, b, 0;
      ey << 0, -i * b, i * b, 0;
      ez << b, 0, 0, -b;
      ks = {e1, ex, ey, ez};
      break;
    }
    default:
      throw std::invalid_argument("make_channel: unknown noise kind");
  }
  return KrausChannel(kind, gamma, std::move(ks));
}

/// A product channel: the same kind on every qubit, with gamma scaled per
/// qubit (all ones for the uniform model).
class NoiseSpec {
 public:
  NoiseSpec(KrausChannel channel, std::vector<double> per_qubit_scale)
      : channel_(std::move(channel)), scale_(std::move(per_qubit_scale)) {
    if (scale_.empty() || static_cast<int>(scale_.size()) > kMaxQubits) {
      throw std::invalid_argument("NoiseSpec: per_qubit_scale must have 1..10 entries");
    }
    for (double s : scale_) {
      if (!(s >= 0.0 && s <= 1.0)) {
        throw std::invalid_argument("NoiseSpec: per-qubit scale must lie in [0, 1]");
      }
      const double g = channel_.gamma() * s;
      identity_ = identity_ && g == 0.0;
      qubit_channels_.push_back(make_channel(channel_.kind(), g));
    }
  }

  static NoiseSpec uniform(NoiseKind kind, double gamma, int n_qubits) {
    return NoiseSpec(make_channel(kind, gamma), std::vector<double>(static_cast<std::size_t>(n_qubits), 1.0));
  }

  /// gamma = 0 on every qubit.
  static NoiseSpec none(int n_qubits) { return uniform(NoiseKind::depolarising, 0.0, n_qubits); }

  const KrausChannel& channel() const { return channel_; }
  NoiseKind kind() const { return channel_.kind(); }
  double gamma() const { return channel_.gamma(); }
  const std::vector<double>& per_qubit_scale() const { return scale_; }
  int n_qubits() const { return static_cast<int>(scale_.size()); }
  bool is_identity() const { return identity_; }

  /// The channel applied to qubit q (gamma * scale[q]).
  const KrausChannel& qubit_channel(int q) const { return qubit_channels_.at(static_cast<std::size_t>(q)); }

  NoiseSpec with_gamma(double gamma) const {
    return NoiseSpec(make_channel(channel_.kind(), gamma), scale_);
  }

 private:
  KrausChannel channel_;
  std::vector<double> scale_;
  std::vector<KrausChannel> qubit_channels_;
  bool identity_ = true;
};

namespace detail {

inline void apply_product_channel_inplace(Matrix& m, int n_qubits, const NoiseSpec& spec) {
  if (spec.is_identity()) return;
  for (int q = 0; q < n_qubits; ++q) {
    const auto& ch = spec.qubit_channel(q);
    if (ch.gamma() == 0.0) continue;
    apply_superop_1q(m, n_qubits, ch.superop(), q);
  }
}

}  // namespace detail

inline DensityMatrix apply_channel_one_qubit(const DensityMatrix& rho, const KrausChannel& ch, int qubit) {
  detail::check_qubit(rho.n_qubits(), qubit, "apply_channel_one_qubit");
  Matrix m = rho.matrix();
  detail::apply_superop_1q(m, rho.n_qubits(), ch.superop(), qubit);
  return DensityMatrix(rho.n_qubits(), std::move(m));
}

/// Applies the per-qubit channels one qubit at a time. Single-qubit channels
/// on distinct qubits commute, so this equals the full tensor-product Kraus
/// set without forming its 4^N terms.
inline DensityMatrix apply_product_channel(const DensityMatrix& rho, const NoiseSpec& spec) {
  if (spec.n_qubits() != rho.n_qubits()) {
    throw std::invalid_argument("apply_product_channel: noise spec covers " +
                                std::to_string(spec.n_qubits()) + " qubits, state has " +
                                std::to_string(rho.n_qubits()));
  }
  Matrix m = rho.matrix();
  detail::apply_product_channel_inplace(m, rho.n_qubits(), spec);
  return DensityMatrix(rho.n_qubits(), std::move(m));
}

// ---------------------------------------------------------------------------
// Pauli transfer matrices
// ---------------------------------------------------------------------------

/// {1, X, Y, Z}
inline const std::array<Eigen::Matrix2cd, 4>& pauli_basis() {
  static const std::array<Eigen::Matrix2cd, 4> basis = [] {
    std::array<Eigen::Matrix2cd, 4> b;
    const cplx i{0.0, 1.0};
    b[0] << 1, 0, 0, 1;
    b[1] << 0, 1, 1, 0;
    b[2] << 0, -i, i, 0;
    b[3] << 1, 0, 0, -1;
    return b;
  }();
  return basis;
}

/// R_ij = Tr[P_i Lambda(P_j)] / 2 over {1, X, Y, Z}.
inline Eigen::Matrix4d ptm_from_channel(const KrausChannel& ch) {
  const auto& p = pauli_basis();
  Eigen::Matrix4d r;
  for (int j = 0; j < 4; ++j) {
    Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
    for (const auto& e : ch.kraus()) out += e * p[static_cast<std::size_t>(j)] * e.adjoint();
    for (int i = 0; i < 4; ++i) {
      r(i, j) = 0.5 * (p[static_cast<std::size_t>(i)] * out).trace().real();
    }
  }
  return r;
}

/// Pauli coordinates (Tr[rho], Tr[X rho], Tr[Y rho], Tr[Z rho]) of a one-qubit state.
inline Eigen::Vector4d pauli_vector(const DensityMatrix& rho) {
  if (rho.n_qubits() != 1) throw std::invalid_argument("pauli_vector: expects a single qubit");
  Eigen::Vector4d v;
  for (int i = 0; i < 4; ++i) {
    v[i] = (pauli_basis()[static_cast<std::size_t>(i)] * rho.matrix()).trace().real();
  }
  return v;
}

inline DensityMatrix from_pauli_vector(const Eigen::Vector4d& v) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  for (int i = 0; i < 4; ++i) m += 0.5 * v[i] * pauli_basis()[static_cast<std::size_t>(i)];
  return DensityMatrix(1, m);
}

/// Single-qubit channel application through the PTM.
inline DensityMatrix apply_ptm(const Eigen::Matrix4d& ptm, const DensityMatrix& rho) {
  return from_pauli_vector(ptm * pauli_vector(rho));
}

}  // namespace nvqa
