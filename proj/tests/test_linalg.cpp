#include <gtest/gtest.h>

#include <random>

#include "compart_h2/errors.hpp"
#include "compart_h2/linalg.hpp"
#include "support/fixtures.hpp"

namespace compart_h2 {
namespace {

using testing::max_abs;
using testing::rows;

TEST(Kron, IdentityFactorGivesBlockDiagonal) {
  const Matrix m = rows({{1, 2}, {3, 4}});
  const Matrix k = kron(Matrix::Identity(2, 2), m);
  Matrix expected = Matrix::Zero(4, 4);
  expected.topLeftCorner(2, 2) = m;
  expected.bottomRightCorner(2, 2) = m;
  EXPECT_EQ(k, expected);
}

TEST(Kron, ScalarAndSelector) {
  const Matrix m = rows({{1, -2}, {0.5, 4}});
  EXPECT_EQ(kron(rows({{2}}), m), 2.0 * m);
  EXPECT_EQ(kron(rows({{1, 0}, {0, 0}}), rows({{1}})), rows({{1, 0}, {0, 0}}));
}

TEST(Vec, ColumnMajorStacking) {
  const Vector v = vec(rows({{1, 3}, {2, 4}}));
  ASSERT_EQ(v.size(), 4);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(v(i), i + 1);
  const Matrix col = rows({{5}, {6}});
  EXPECT_EQ(Matrix(vec(col)), col);
}

TEST(Vec, MatIsInverseForAllShapes) {
  std::mt19937_64 rng(11);
  for (Index r = 1; r <= 4; ++r) {
    for (Index c = 1; c <= 4; ++c) {
      const Matrix m = testing::random_matrix(rng, r, c);
      EXPECT_EQ(mat(vec(m), r, c), m);
      const Vector v = vec(m);
      EXPECT_EQ(vec(mat(v, r, c)), v);
    }
  }
  EXPECT_THROW(mat(Vector::Zero(5), 2, 3), Error);
}

TEST(Vec, KroneckerIdentity) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 25; ++trial) {
    std::uniform_int_distribution<int> dim(1, 5);
    const Index p = dim(rng), q = dim(rng), r = dim(rng), s = dim(rng);
    const Matrix a = testing::random_matrix(rng, p, q);
    const Matrix x = testing::random_matrix(rng, q, r);
    const Matrix b = testing::random_matrix(rng, r, s);
    const Vector lhs = vec(a * x * b);
    const Vector rhs = kron(b.transpose(), a) * vec(x);
    EXPECT_LE((lhs - rhs).norm(), 1e-12 * std::max(1.0, lhs.norm()));
  }
}

TEST(SpectralRadius, KnownValues) {
  EXPECT_EQ(spectral_radius(rows({{0, 1}, {0, 0}})), 0.0);
  EXPECT_NEAR(spectral_radius(rows({{0.5, 0}, {0, -0.9}})), 0.9, 1e-15);
  const Matrix rotation = rows({{0, -0.7}, {0.7, 0}});
  EXPECT_NEAR(spectral_radius(rotation), 0.7, 1e-14);
  EXPECT_LT(spectral_radius(testing::fourroom_closed_loop_star()), 1.0);
}

TEST(SymEig, SmallCases) {
  const SymmetricEigen d = sym_eig(rows({{3, 0}, {0, 1}}));
  EXPECT_NEAR(d.eigenvalues(0), 1.0, 1e-15);
  EXPECT_NEAR(d.eigenvalues(1), 3.0, 1e-15);
  EXPECT_NEAR(std::abs(d.eigenvectors(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(d.eigenvectors(0, 1)), 1.0, 1e-15);

  const SymmetricEigen id = sym_eig(Matrix::Identity(4, 4));
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(id.eigenvalues(i), 1.0, 1e-15);
}

TEST(SymEig, ReconstructionAndOrthogonalityUpTo60) {
  std::mt19937_64 rng(13);
  for (Index n : {1, 2, 5, 13, 30, 60}) {
    const Matrix m = testing::random_symmetric(rng, n);
    const SymmetricEigen d = sym_eig(m);
    const Matrix& q = d.eigenvectors;
    const Matrix back = q * d.eigenvalues.asDiagonal() * q.transpose();
    EXPECT_LE(max_abs(back - m), 1e-10 * std::max(1.0, max_abs(m))) << "n=" << n;
    EXPECT_LE(max_abs(q.transpose() * q - Matrix::Identity(n, n)), 1e-10) << "n=" << n;
    for (Index i = 1; i < n; ++i) EXPECT_LE(d.eigenvalues(i - 1), d.eigenvalues(i));
  }
}

TEST(SymEig, RejectsAsymmetricInput) {
  try {
    sym_eig(rows({{1, 2}, {0, 1}}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(Lyapunov, ClosedForms) {
  const Matrix f = 0.5 * Matrix::Identity(2, 2);
  const Matrix q = Matrix::Identity(2, 2);
  EXPECT_LE(max_abs(solve_dlyap_T(f, q) - (4.0 / 3.0) * q), 1e-14);
  EXPECT_LE(max_abs(solve_dlyap(f, q) - (4.0 / 3.0) * q), 1e-14);

  const Matrix q0 = rows({{2, 1}, {1, 3}});
  EXPECT_LE(max_abs(solve_dlyap_T(Matrix::Zero(2, 2), q0) - q0), 1e-15);
  EXPECT_LE(max_abs(solve_dlyap(Matrix::Zero(2, 2), q0) - q0), 1e-15);
}

TEST(Lyapunov, MatchesTruncatedSeries) {
  std::mt19937_64 rng(14);
  for (Index n : {2, 3, 5}) {
    const Matrix f = testing::random_schur(rng, n, 0.8);
    const Matrix r = testing::random_matrix(rng, n, n);
    const Matrix q = r * r.transpose();
    Matrix sum = Matrix::Zero(n, n);
    Matrix power = Matrix::Identity(n, n);
    for (int k = 0; k < 400; ++k) {
      sum += power.transpose() * q * power;
      power = power * f;
    }
    const Matrix p = solve_dlyap_T(f, q);
    EXPECT_LE(max_abs(p - sum), 1e-8 * std::max(1.0, max_abs(sum))) << "n=" << n;
  }
}

TEST(Lyapunov, ResidualSymmetryAndSign) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 1 + trial % 6;
    const Matrix f = testing::random_schur(rng, n, 0.3 + 0.02 * trial);
    const Matrix r = testing::random_matrix(rng, n, n);
    const Matrix q = r * r.transpose();
    const Matrix p = solve_dlyap_T(f, q);
    EXPECT_LE(dlyap_T_residual(f, p, q), 1e-10 * std::max(1.0, q.norm()));
    EXPECT_LE((p - p.transpose()).norm(), 1e-10 * p.norm());
    EXPECT_GE(sym_eig(0.5 * (p + p.transpose())).eigenvalues.minCoeff(), -1e-10);

    const Matrix nonsym = testing::random_matrix(rng, n, n);
    EXPECT_LE(dlyap_T_residual(f, solve_dlyap_T(f, nonsym), nonsym),
              1e-10 * std::max(1.0, nonsym.norm()));
    EXPECT_LE(dlyap_residual(f, solve_dlyap(f, nonsym), nonsym),
              1e-10 * std::max(1.0, nonsym.norm()));
  }
}

TEST(Lyapunov, TransposeSymmetry) {
  std::mt19937_64 rng(16);
  for (Index n : {2, 4}) {
    const Matrix f = testing::random_schur(rng, n, 0.7);
    const Matrix q = testing::random_matrix(rng, n, n);
    EXPECT_LE(max_abs(solve_dlyap(f, q) - solve_dlyap_T(f.transpose(), q)), 1e-12);
  }
}

TEST(Lyapunov, RejectsNonSchurAndBadShapes) {
  try {
    LyapunovSolver solver(rows({{1.0, 0}, {0, 0.2}}));
    FAIL() << "expected NotSchur";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSchur);
  }
  EXPECT_THROW(LyapunovSolver(Matrix::Zero(2, 3)), Error);
  const LyapunovSolver ok(0.5 * Matrix::Identity(2, 2));
  try {
    ok.solve_transposed(Matrix::Identity(3, 3));
    FAIL() << "expected DimensionMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  Matrix bad = 0.5 * Matrix::Identity(2, 2);
  bad(0, 1) = std::nan("");
  EXPECT_THROW(LyapunovSolver{bad}, Error);
}

TEST(Replication, BlockDiagAndConcat) {
  const Matrix m = rows({{1, 2}});
  const Matrix b = block_diag(m, 3);
  EXPECT_EQ(b.rows(), 3);
  EXPECT_EQ(b.cols(), 6);
  EXPECT_EQ(b.block(2, 4, 1, 2), m);
  EXPECT_EQ(b.block(0, 2, 1, 2), Matrix::Zero(1, 2));
  const Matrix h = hconcat(m, 2);
  EXPECT_EQ(h, rows({{1, 2, 1, 2}}));
}

}  // namespace
}  // namespace compart_h2
