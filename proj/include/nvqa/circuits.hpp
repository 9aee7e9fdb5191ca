// SPDX-License-Identifier: Apache-2.0
//
// Circuit IR (Ry, CX, noise insertion points), the ansatz builders, and the
// noisy evaluator: every noise mark applies the product channel to all qubits.
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "nvqa/channels.hpp"
#include "nvqa/qstate.hpp"

namespace nvqa {

struct RyOp {
  int param = 0;
  int qubit = 0;
  bool operator==(const RyOp&) const = default;
};

struct CxOp {
  int control = 0;
  int target = 0;
  bool operator==(const CxOp&) const = default;
};

struct NoiseMark {
  bool operator==(const NoiseMark&) const = default;
};

using CircuitOp = std::variant<RyOp, CxOp, NoiseMark>;

class Circuit {
 public:
  Circuit(int n_qubits, std::vector<CircuitOp> ops, int n_params)
      : n_qubits_(n_qubits), ops_(std::move(ops)), n_params_(n_params) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
      throw std::invalid_argument("Circuit: n_qubits must be in [1, 10]");
    }
    if (n_params < 0) throw std::invalid_argument("Circuit: negative parameter count");
    std::vector<int> seen(static_cast<std::size_t>(n_params), 0);
    for (const auto& op : ops_) {
      if (const auto* ry = std::get_if<RyOp>(&op)) {
        detail::check_qubit(n_qubits, ry->qubit, "Circuit");
        if (ry->param < 0 || ry->param >= n_params) {
          throw std::invalid_argument("Circuit: parameter index " + std::to_string(ry->param) +
                                      " out of range");
        }
        ++seen[static_cast<std::size_t>(ry->param)];
      } else if (const auto* cx = std::get_if<CxOp>(&op)) {
        detail::check_qubit(n_qubits, cx->control, "Circuit");
        detail::check_qubit(n_qubits, cx->target, "Circuit");
        if (cx->control == cx->target) {
          throw std::invalid_argument("Circuit: CX control equals target");
        }
      }
    }
    for (int p = 0; p < n_params; ++p) {
      if (seen[static_cast<std::size_t>(p)] != 1) {
        throw std::invalid_argument("Circuit: parameter " + std::to_string(p) +
                                    " must appear exactly once");
      }
    }
  }

  int n_qubits() const { return n_qubits_; }
  int n_params() const { return n_params_; }
  const std::vector<CircuitOp>& ops() const { return ops_; }

  /// Number of noise insertion points (d in the linear noise model).
  int noise_count() const {
    int d = 0;
    for (const auto& op : ops_) d += std::holds_alternative<NoiseMark>(op) ? 1 : 0;
    return d;
  }

  /// True when every noise mark directly follows a CX (noise only after
  /// two-qubit gates). The single-qubit valley demo is the one builder that
  /// does not follow it.
  bool noise_after_two_qubit_gates_only() const {
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      if (!std::holds_alternative<NoiseMark>(ops_[i])) continue;
      if (i == 0 || !std::holds_alternative<CxOp>(ops_[i - 1])) return false;
    }
    return true;
  }

  bool operator==(const Circuit&) const = default;

 private:
  int n_qubits_;
  std::vector<CircuitOp> ops_;
  int n_params_;
};

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

enum class TwoQubitVariant { a, b, c };

inline TwoQubitVariant parse_two_qubit_variant(std::string_view name) {
  if (name == "a") return TwoQubitVariant::a;
  if (name == "b") return TwoQubitVariant::b;
  if (name == "c") return TwoQubitVariant::c;
  throw std::invalid_argument("unknown two-qubit circuit variant '" + std::string(name) + "'");
}

inline std::string_view to_string(TwoQubitVariant v) {
  switch (v) {
    case TwoQubitVariant::a: return "a";
    case TwoQubitVariant::b: return "b";
    case TwoQubitVariant::c: return "c";
  }
  return "?";
}

/// Ry(t0) q0, Ry(t1) q1, CX(0->1), noise, then the final rotation(s):
/// (a) Ry(t2) on q1, (b) Ry(t2) on q0, (c) Ry(t2) on q0 and Ry(t3) on q1.
inline Circuit build_2q_circuit(TwoQubitVariant variant) {
  std::vector<CircuitOp> ops = {RyOp{0, 0}, RyOp{1, 1}, CxOp{0, 1}, NoiseMark{}};
  switch (variant) {
    case TwoQubitVariant::a:
      ops.push_back(RyOp{2, 1});
      return Circuit(2, std::move(ops), 3);
    case TwoQubitVariant::b:
      ops.push_back(RyOp{2, 0});
      return Circuit(2, std::move(ops), 3);
    case TwoQubitVariant::c:
      ops.push_back(RyOp{2, 0});
      ops.push_back(RyOp{3, 1});
      return Circuit(2, std::move(ops), 4);
  }
  throw std::invalid_argument("build_2q_circuit: unknown variant");
}

/// Layered hardware-efficient ansatz on 4 qubits. Each layer: Ry on every
/// qubit, the parallel pair CX(0->1) CX(2->3), noise, CX(1->2), noise.
inline Circuit build_hea(int layers, int n_qubits = 4) {
  if (n_qubits != 4) throw std::invalid_argument("build_hea: only the 4-qubit layout is defined");
  if (layers < 1) throw std::invalid_argument("build_hea: layers must be >= 1");
  std::vector<CircuitOp> ops;
  int p = 0;
  for (int l = 0; l < layers; ++l) {
    for (int q = 0; q < 4; ++q) ops.push_back(RyOp{p++, q});
    ops.push_back(CxOp{0, 1});
    ops.push_back(CxOp{2, 3});
    ops.push_back(NoiseMark{});
    ops.push_back(CxOp{1, 2});
    ops.push_back(NoiseMark{});
  }
  return Circuit(4, std::move(ops), p);
}

/// 4-qubit VQE circuit: Ry layer, CX(0->2), CX(0->1), CX(2->3) with noise after
/// each CX, then a second Ry layer. Reaches the exact ground-state energy of
/// the 4-qubit impurity Hamiltonian without noise.
inline Circuit build_4q_vqe() {
  std::vector<CircuitOp> ops;
  int p = 0;
  for (int q = 0; q < 4; ++q) ops.push_back(RyOp{p++, q});
  for (const auto& [c, t] : {std::pair{0, 2}, std::pair{0, 1}, std::pair{2, 3}}) {
    ops.push_back(CxOp{c, t});
    ops.push_back(NoiseMark{});
  }
  for (int q = 0; q < 4; ++q) ops.push_back(RyOp{p++, q});
  return Circuit(4, std::move(ops), p);
}

/// One qubit: Ry(t0), noise, Ry(t1). Without noise only t0 + t1 matters.
inline Circuit build_valley_demo() {
  return Circuit(1, {RyOp{0, 0}, NoiseMark{}, RyOp{1, 0}}, 2);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// rho(theta) starting from |0...0><0...0|, with the product channel applied at
/// every noise mark.
inline DensityMatrix evaluate(const Circuit& circuit, const Eigen::VectorXd& params,
                              const NoiseSpec& noise) {
  if (params.size() != circuit.n_params()) {
    throw std::invalid_argument("evaluate: expected " + std::to_string(circuit.n_params()) +
                                " parameters, got " + std::to_string(params.size()));
  }
  if (noise.n_qubits() != circuit.n_qubits()) {
    throw std::invalid_argument("evaluate: noise spec qubit count does not match circuit");
  }
  const int n = circuit.n_qubits();
  Matrix m = zero_state(n).matrix();
  for (const auto& op : circuit.ops()) {
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, RyOp>) {
            detail::apply_real_1q(m, n, ry_matrix(params[o.param]).real(), o.qubit);
          } else if constexpr (std::is_same_v<T, CxOp>) {
            detail::apply_cx(m, n, o.control, o.target);
          } else {
            detail::apply_product_channel_inplace(m, n, noise);
          }
        },
        op);
  }
  // Long channel sequences accumulate Hermiticity drift at the 1e-16 level.
  return DensityMatrix(n, (m + m.adjoint()) * 0.5);
}

inline DensityMatrix evaluate(const Circuit& circuit, const Eigen::VectorXd& params) {
  return evaluate(circuit, params, NoiseSpec::none(circuit.n_qubits()));
}

/// Wraps every angle into [0, 2*pi).
inline Eigen::VectorXd canonical_angles(const Eigen::VectorXd& params) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Eigen::VectorXd out(params.size());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    double a = std::fmod(params[i], two_pi);
    if (a < 0.0) a += two_pi;
    if (a >= two_pi) a -= two_pi;
    out[i] = a;
  }
  return out;
}

}  // namespace nvqa
