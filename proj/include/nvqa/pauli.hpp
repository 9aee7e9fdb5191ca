// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nvqa {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// One weighted Pauli word, e.g. {0.5, "XXII"}. Character i acts on qubit i.
struct PauliTerm {
  double coeff = 0.0;
  std::string word;
};

/// Hermitian observable written as a real-weighted sum of Pauli words.
class PauliSum {
 public:
  explicit PauliSum(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 10) {
      throw std::invalid_argument("PauliSum: n_qubits must be in [1, 10]");
    }
  }

  PauliSum(int n_qubits, std::vector<PauliTerm> terms) : PauliSum(n_qubits) {
    for (auto& t : terms) add(t.coeff, std::move(t.word));
  }

  PauliSum& add(double coeff, std::string word) {
    if (static_cast<int>(word.size()) != n_qubits_) {
      throw std::invalid_argument("PauliSum: word '" + word + "' has wrong length");
    }
    for (char c : word) {
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
        throw std::invalid_argument("PauliSum: invalid Pauli letter in '" + word + "'");
      }
    }
    terms_.push_back({coeff, std::move(word)});
    return *this;
  }

  int n_qubits() const { return n_qubits_; }
  const std::vector<PauliTerm>& terms() const { return terms_; }

  /// Dense 2^n x 2^n matrix. Qubit 0 is the most significant index bit.
  Matrix matrix() const;

 private:
  int n_qubits_;
  std::vector<PauliTerm> terms_;
};

namespace detail {

/// Bit mask of qubit q in a computational-basis index (qubit 0 = MSB).
inline std::size_t qubit_mask(int n_qubits, int q) {
  return std::size_t{1} << (n_qubits - 1 - q);
}

/// Decomposes a Pauli word so that P|k> = phase(k) |k ^ flip>.
struct PauliAction {
  std::size_t flip = 0;   // X or Y positions
  std::size_t zmask = 0;  // Y or Z positions: (-1)^popcount(k & zmask)
  int y_count = 0;        // global factor i^y_count

  explicit PauliAction(std::string_view word) {
    const int n = static_cast<int>(word.size());
    for (int q = 0; q < n; ++q) {
      const std::size_t m = qubit_mask(n, q);
      switch (word[q]) {
        case 'X': flip |= m; break;
        case 'Y': flip |= m; zmask |= m; ++y_count; break;
        case 'Z': zmask |= m; break;
        default: break;
      }
    }
  }

  cplx phase(std::size_t k) const {
    // Y|0> = i|1>, Y|1> = -i|0>: each Y contributes i * (-1)^bit.
    static constexpr cplx kPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const int sign = (std::popcount(k & zmask) & 1) ? -1 : 1;
    return kPow[y_count & 3] * static_cast<double>(sign);
  }
};

}  // namespace detail

inline Matrix PauliSum::matrix() const {
  const std::size_t dim = std::size_t{1} << n_qubits_;
  Matrix m = Matrix::Zero(dim, dim);
  for (const auto& t : terms_) {
    const detail::PauliAction act(t.word);
    for (std::size_t k = 0; k < dim; ++k) {
      m(k ^ act.flip, k) += t.coeff * act.phase(k);
    }
  }
  return m;
}

}  // namespace nvqa
