// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nvqa/measures.hpp"
#include "nvqa/qstate.hpp"
#include "support.hpp"

namespace nvqa {
namespace {

TEST(ZeroState, OneQubitIsProjectorOnZero) {
  const auto rho = zero_state(1);
  EXPECT_EQ(rho.dim(), 2);
  EXPECT_EQ(rho(0, 0), cplx(1.0));
  EXPECT_EQ(rho(0, 1), cplx(0.0));
  EXPECT_EQ(rho(1, 0), cplx(0.0));
  EXPECT_EQ(rho(1, 1), cplx(0.0));
}

TEST(ZeroState, TwoQubitsOnlyCornerIsSet) {
  const auto rho = zero_state(2);
  ASSERT_EQ(rho.dim(), 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(rho(i, j), cplx(i == 0 && j == 0 ? 1.0 : 0.0));
}

TEST(ZeroState, FourQubitsPureUnitTrace) {
  const auto rho = zero_state(4);
  EXPECT_DOUBLE_EQ(rho.trace(), 1.0);
  EXPECT_DOUBLE_EQ(rho.purity(), 1.0);
  EXPECT_TRUE(rho.check().valid());
}

TEST(ZeroState, RejectsOutOfRange) {
  EXPECT_THROW(zero_state(0), std::invalid_argument);
  EXPECT_THROW(zero_state(11), std::invalid_argument);
}

TEST(ApplyUnitary, IdentityLeavesStateUnchanged) {
  std::mt19937_64 gen(1);
  const auto rho = test::random_mixed(3, gen);
  const auto out = apply_unitary(rho, Matrix::Identity(2, 2), {1});
  EXPECT_LT(test::max_abs_diff(out.matrix(), rho.matrix()), 1e-15);
  const auto out2 = apply_unitary(rho, Matrix::Identity(4, 4), {2, 0});
  EXPECT_LT(test::max_abs_diff(out2.matrix(), rho.matrix()), 1e-15);
}

TEST(ApplyUnitary, RyPiFlipsZeroToOne) {
  const auto out = apply_unitary(zero_state(1), Matrix(ry_matrix(std::numbers::pi)), {0});
  EXPECT_NEAR(out(0, 0).real(), 0.0, 1e-12);
  EXPECT_NEAR(out(1, 1).real(), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(out(0, 1)), 0.0, 1e-12);
}

TEST(ApplyUnitary, CxTruthTable) {
  // |10><10| with control = qubit 0 -> |11><11|.
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
  psi[0b10] = 1.0;
  const auto out = apply_unitary(DensityMatrix::from_pure(psi), cx_matrix(), {0, 1});
  EXPECT_NEAR(out(0b11, 0b11).real(), 1.0, 1e-15);
  EXPECT_NEAR(out(0b10, 0b10).real(), 0.0, 1e-15);
}

TEST(ApplyUnitary, MatchesKroneckerEmbedding) {
  std::mt19937_64 gen(7);
  const auto rho = test::random_mixed(3, gen);
  const Eigen::Matrix2cd u = test::random_unitary_1q(gen);
  for (int q = 0; q < 3; ++q) {
    const Matrix full = test::embed_by_kron(u, 3, q);
    const auto out = apply_unitary(rho, Matrix(u), {q});
    EXPECT_LT(test::max_abs_diff(out.matrix(), full * rho.matrix() * full.adjoint()), 1e-14);
  }
}

TEST(ApplyUnitary, PreservesSpectrumAndPurity) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto rho = test::random_mixed(3, gen);
    Matrix u = test::kron(test::random_unitary_1q(gen), test::random_unitary_1q(gen));
    u = cx_matrix() * u;
    const auto out = apply_unitary(rho, u, {2, 0});
    EXPECT_NEAR(out.trace(), 1.0, 1e-12);
    EXPECT_NEAR(out.purity(), rho.purity(), 1e-10);
    const auto a = eigen_desc(rho.matrix());
    const auto b = eigen_desc(out.matrix());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(ApplyUnitary, RejectsBadInput) {
  const auto rho = zero_state(2);
  Matrix not_unitary = Matrix::Identity(2, 2) * 1.1;
  EXPECT_THROW(apply_unitary(rho, not_unitary, {0}), std::invalid_argument);
  EXPECT_THROW(apply_unitary(rho, cx_matrix(), {0, 0}), std::invalid_argument);
  EXPECT_THROW(apply_unitary(rho, Matrix::Identity(2, 2), {2}), std::invalid_argument);
}

TEST(PartialTrace, ProductStateMarginal) {
  const auto red = partial_trace(zero_state(2), {0});
  EXPECT_NEAR(red(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(red(1, 1).real(), 0.0, 1e-15);
}

TEST(PartialTrace, BellMarginalIsMaximallyMixed) {
  Eigen::VectorXcd bell = Eigen::VectorXcd::Zero(4);
  bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
  const auto red = partial_trace(DensityMatrix::from_pure(bell), {1});
  EXPECT_NEAR(red(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(red(1, 1).real(), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(red(0, 1)), 0.0, 1e-15);
}

TEST(PartialTrace, KeepingEverythingIsIdentity) {
  std::mt19937_64 gen(3);
  const auto rho = test::random_mixed(2, gen);
  EXPECT_LT(test::max_abs_diff(partial_trace(rho, {0, 1}).matrix(), rho.matrix()), 1e-15);
}

TEST(PartialTrace, CommutesWithRelabeling) {
  // Swapping qubits 0 and 2 before tracing equals listing them swapped in keep.
  std::mt19937_64 gen(5);
  const Matrix swap02 = [] {
    Matrix s = Matrix::Zero(8, 8);
    for (int i = 0; i < 8; ++i) {
      const int b0 = (i >> 2) & 1, b1 = (i >> 1) & 1, b2 = i & 1;
      s((b2 << 2) | (b1 << 1) | b0, i) = 1.0;
    }
    return s;
  }();
  for (int trial = 0; trial < 10; ++trial) {
    const auto rho = test::random_mixed(3, gen);
    const DensityMatrix permuted(3, swap02 * rho.matrix() * swap02.adjoint());
    const auto a = partial_trace(permuted, {0, 1});
    const auto b = partial_trace(rho, {2, 1});
    EXPECT_LT(test::max_abs_diff(a.matrix(), b.matrix()), 1e-14);
    const auto c = partial_trace(rho, {0});
    EXPECT_NEAR(c.trace(), 1.0, 1e-12);
    EXPECT_LT((c.matrix() - c.matrix().adjoint()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(PartialTrace, RejectsBadKeepSets) {
  const auto rho = zero_state(2);
  EXPECT_THROW(partial_trace(rho, std::span<const int>{}), std::invalid_argument);
  EXPECT_THROW(partial_trace(rho, {0, 0}), std::invalid_argument);
  EXPECT_THROW(partial_trace(rho, {3}), std::invalid_argument);
}

TEST(Expectation, IdentityIsTrace) {
  std::mt19937_64 gen(9);
  EXPECT_NEAR(expectation(test::random_mixed(3, gen), PauliSum(3, {{1.0, "III"}})), 1.0, 1e-12);
}

TEST(Expectation, ZOnZero) {
  EXPECT_DOUBLE_EQ(expectation(zero_state(1), PauliSum(1, {{1.0, "Z"}})), 1.0);
}

TEST(Expectation, IsingGroundStateEnergy) {
  const auto h = transverse_ising_2q();
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
  const auto gs = DensityMatrix::from_pure(es.eigenvectors().col(0));
  EXPECT_NEAR(expectation(gs, h), -std::sqrt(5.0), 1e-12);
}

TEST(Expectation, MatchesDenseTrace) {
  std::mt19937_64 gen(13);
  const PauliSum op(3, {{0.3, "XYZ"}, {-1.2, "YYI"}, {0.7, "ZIX"}, {2.0, "IYI"}});
  const auto rho = test::random_mixed(3, gen);
  EXPECT_NEAR(expectation(rho, op), (op.matrix() * rho.matrix()).trace().real(), 1e-13);
}

TEST(Expectation, IsLinear) {
  std::mt19937_64 gen(17);
  const auto rho = test::random_mixed(2, gen);
  const PauliSum o1(2, {{1.0, "XY"}, {0.5, "ZZ"}});
  const PauliSum o2(2, {{-0.25, "YI"}, {2.0, "IX"}});
  PauliSum combo(2);
  const double a = 1.7, b = -0.4;
  for (const auto& t : o1.terms()) combo.add(a * t.coeff, t.word);
  for (const auto& t : o2.terms()) combo.add(b * t.coeff, t.word);
  EXPECT_NEAR(expectation(rho, combo), a * expectation(rho, o1) + b * expectation(rho, o2), 1e-10);
}

TEST(Expectation, RejectsWidthMismatch) {
  EXPECT_THROW(expectation(zero_state(2), PauliSum(1, {{1.0, "Z"}})), std::invalid_argument);
}

TEST(EigenDesc, Examples) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  EXPECT_EQ(eigen_desc(d), (std::vector<double>{1.0, 0.0}));

  const auto mm = eigen_desc(DensityMatrix::maximally_mixed(2).matrix());
  for (double v : mm) EXPECT_NEAR(v, 0.25, 1e-15);

  const auto ev = eigen_desc(transverse_ising_2q().matrix());
  EXPECT_NEAR(ev.back(), -std::sqrt(5.0), 1e-12);
  EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end(), std::greater<>()));
}

TEST(EigenDesc, RejectsNonHermitian) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(eigen_desc(m), std::invalid_argument);
}

TEST(DensityMatrix, SymmetrizeRemovesDrift) {
  Matrix m = zero_state(1).matrix();
  m(0, 1) = cplx(1e-9, 0.0);
  const DensityMatrix rho(1, m);
  EXPECT_GT(rho.check().hermiticity_error, 1e-12);
  EXPECT_LE(rho.symmetrized().check().hermiticity_error, 1e-15);
}

}  // namespace
}  // namespace nvqa
