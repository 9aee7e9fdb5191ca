// SPDX-License-Identifier: Apache-2.0
//
// Discrete parameter degeneracies of Ry/CX circuits: maps t_i -> s_i t_i + k_i pi
// that leave the noiseless output state unchanged.
//
// Construction. Shifting t_i by pi multiplies gate i by Ry(pi) = -iY. That Y is
// pushed back towards the input through the earlier gates:
//   * through Ry(t) on the same qubit: Y commutes; X or Z flip the angle,
//     X Ry(t) = Ry(-t) X and Z Ry(t) = Ry(-t) Z;
//   * through CX (conjugation): X on the control spreads to the target,
//     Z on the target spreads to the control.
// What reaches |0...0> must contain no X or Y component; Z and I only add a
// global phase. Every shift set is tracked as a GF(2) vector, so the valid
// shift sets are the kernel of the map "shift set -> X part of the residual".
// Shifts by pi and sign flips commute modulo 2*pi, which makes the group
// abelian with composition = XOR of (shift, flip) bits.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nvqa/circuits.hpp"
#include "nvqa/measures.hpp"
#include "nvqa/optimize.hpp"
#include "nvqa/parallel.hpp"
#include "nvqa/randstates.hpp"

namespace nvqa {

/// theta_i -> signs[i] * theta_i + shifts[i] * pi. Bits are stored as masks
/// (parameter i = bit i), so circuits are limited to 64 parameters.
struct DegeneracyMap {
  std::uint64_t shift_mask = 0;
  std::uint64_t flip_mask = 0;

  bool is_identity() const { return shift_mask == 0 && flip_mask == 0; }

  std::vector<int> shifts(int n_params) const {
    std::vector<int> v(static_cast<std::size_t>(n_params));
    for (int i = 0; i < n_params; ++i) v[static_cast<std::size_t>(i)] = (shift_mask >> i) & 1U;
    return v;
  }

  std::vector<int> signs(int n_params) const {
    std::vector<int> v(static_cast<std::size_t>(n_params));
    for (int i = 0; i < n_params; ++i) v[static_cast<std::size_t>(i)] = ((flip_mask >> i) & 1U) ? -1 : 1;
    return v;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& theta) const {
    Eigen::VectorXd out = theta;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      if ((flip_mask >> i) & 1U) out[i] = -out[i];
      if ((shift_mask >> i) & 1U) out[i] += std::numbers::pi;
    }
    return canonical_angles(out);
  }

  DegeneracyMap compose(const DegeneracyMap& other) const {
    return {shift_mask ^ other.shift_mask, flip_mask ^ other.flip_mask};
  }

  bool operator==(const DegeneracyMap&) const = default;
};

struct DegeneracyGroup {
  std::vector<DegeneracyMap> maps;  // identity first
  int rank = 0;                     // log2 of the full group size
  bool truncated = false;           // full group exceeded the cap
};

namespace detail {

/// Residual of pushing a Y inserted just before op `start` back to the input.
struct PushResult {
  std::uint64_t residual_x = 0;  // qubits left with an X or Y component
  std::uint64_t flips = 0;       // Ry parameters whose sign is inverted
};

inline PushResult push_y_to_input(const Circuit& circuit, std::size_t start, int qubit) {
  std::uint64_t x = std::uint64_t{1} << qubit;
  std::uint64_t z = std::uint64_t{1} << qubit;
  std::uint64_t flips = 0;
  for (std::size_t k = start; k-- > 0;) {
    const auto& op = circuit.ops()[k];
    if (const auto* ry = std::get_if<RyOp>(&op)) {
      const bool xq = (x >> ry->qubit) & 1U;
      const bool zq = (z >> ry->qubit) & 1U;
      if (xq != zq) flips ^= std::uint64_t{1} << ry->param;  // X or Z anticommutes with Y
    } else if (const auto* cx = std::get_if<CxOp>(&op)) {
      // CX P CX: X_c -> X_c X_t, Z_t -> Z_c Z_t.
      if ((x >> cx->control) & 1U) x ^= std::uint64_t{1} << cx->target;
      if ((z >> cx->target) & 1U) z ^= std::uint64_t{1} << cx->control;
    }
  }
  return {x, flips};
}

}  // namespace detail

/// Largest difference between evaluate(theta) and evaluate(map(theta)) at
/// gamma = 0 over `samples` random theta.
inline double degeneracy_error(const Circuit& circuit, const DegeneracyMap& map, int samples,
                               std::uint64_t seed) {
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd theta = random_angles(circuit.n_params(), seed, static_cast<std::uint64_t>(s));
    const Matrix a = evaluate(circuit, theta).matrix();
    const Matrix b = evaluate(circuit, map.apply(theta)).matrix();
    worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// All verified degeneracy maps of a circuit (identity included), up to `cap`
/// elements. Throws if any emitted map fails numerical verification.
inline DegeneracyGroup generate_degeneracy_maps(const Circuit& circuit, std::size_t cap = std::size_t{1} << 16,
                                                int verify_samples = 3, std::uint64_t verify_seed = 0x5eed) {
  const int n_params = circuit.n_params();
  if (n_params > 64) throw std::invalid_argument("generate_degeneracy_maps: at most 64 parameters");

  // One generator candidate per parameter: (X residual, flips), indexed by param.
  std::vector<detail::PushResult> push(static_cast<std::size_t>(n_params));
  for (std::size_t k = 0; k < circuit.ops().size(); ++k) {
    if (const auto* ry = std::get_if<RyOp>(&circuit.ops()[k])) {
      push[static_cast<std::size_t>(ry->param)] = detail::push_y_to_input(circuit, k, ry->qubit);
    }
  }

  // Gaussian elimination over GF(2): reduce the residual vectors, tracking
  // which shift combination produced each row. Rows that reduce to zero give
  // kernel (valid) shift sets.
  struct Row {
    std::uint64_t residual;
    std::uint64_t shifts;
    std::uint64_t flips;
  };
  std::vector<Row> pivots;  // residual has a distinct leading bit
  std::vector<DegeneracyMap> generators;
  for (int p = 0; p < n_params; ++p) {
    Row row{push[static_cast<std::size_t>(p)].residual_x, std::uint64_t{1} << p,
            push[static_cast<std::size_t>(p)].flips};
    for (const auto& pv : pivots) {
      const int lead = 63 - std::countl_zero(pv.residual);
      if ((row.residual >> lead) & 1U) {
        row.residual ^= pv.residual;
        row.shifts ^= pv.shifts;
        row.flips ^= pv.flips;
      }
    }
    if (row.residual == 0) {
      generators.push_back({row.shifts, row.flips});
    } else {
      pivots.push_back(row);
      std::sort(pivots.begin(), pivots.end(),
                [](const Row& a, const Row& b) { return a.residual > b.residual; });
    }
  }

  DegeneracyGroup group;
  group.rank = static_cast<int>(generators.size());
  const std::size_t full = generators.size() >= 63 ? std::numeric_limits<std::size_t>::max()
                                                   : std::size_t{1} << generators.size();
  const std::size_t count = std::min(full, cap);
  group.truncated = full > cap;
  group.maps.reserve(count);
  for (std::size_t code = 0; code < count; ++code) {
    DegeneracyMap m;
    for (std::size_t g = 0; g < generators.size(); ++g) {
      if ((code >> g) & 1U) m = m.compose(generators[g]);
    }
    group.maps.push_back(m);
  }

  std::vector<double> errors(group.maps.size());
  parallel_for(group.maps.size(), [&](std::size_t i) {
    errors[i] = degeneracy_error(circuit, group.maps[i], verify_samples, verify_seed);
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i] > 1e-10) {
      throw std::logic_error("generate_degeneracy_maps: map " + std::to_string(i) +
                             " failed verification (error " + std::to_string(errors[i]) + ")");
    }
  }
  return group;
}

/// Fidelity to `target` at every degenerate image of theta_star under `noise`.
inline std::vector<double> degeneracy_split(const Circuit& circuit, const Eigen::VectorXd& theta_star,
                                            const std::vector<DegeneracyMap>& maps,
                                            const NoiseSpec& noise, const DensityMatrix& target) {
  std::vector<double> out(maps.size());
  parallel_for(maps.size(), [&](std::size_t i) {
    out[i] = fidelity(target, evaluate(circuit, maps[i].apply(theta_star), noise));
  });
  return out;
}

/// Histogram of values with bins of `width` starting at `origin`; returns
/// (bin lower edge, count) for non-empty bins in ascending order.
inline std::vector<std::pair<double, int>> histogram(const std::vector<double>& values, double width,
                                                     double origin = 0.0) {
  std::vector<std::pair<long long, int>> bins;
  for (double v : values) {
    const auto b = static_cast<long long>(std::floor((v - origin) / width));
    auto it = std::find_if(bins.begin(), bins.end(), [&](const auto& e) { return e.first == b; });
    if (it == bins.end()) bins.emplace_back(b, 1);
    else ++it->second;
  }
  std::sort(bins.begin(), bins.end());
  std::vector<std::pair<double, int>> out;
  for (const auto& [b, c] : bins) out.emplace_back(origin + static_cast<double>(b) * width, c);
  return out;
}

}  // namespace nvqa
