#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sdx/errors.hpp"
#include "sdx/symla.hpp"
#include "test_util.hpp"

using namespace sdx;

namespace {

// Cofactor expansion along the first row.
double cofactor_det(const Matrix& m) {
  const Eigen::Index n = m.rows();
  if (n == 1) return m(0, 0);
  double det = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    Matrix minor(n - 1, n - 1);
    for (Eigen::Index r = 1; r < n; ++r)
      for (Eigen::Index c = 0, cc = 0; c < n; ++c)
        if (c != j) minor(r - 1, cc++) = m(r, c);
    det += ((j % 2 == 0) ? 1.0 : -1.0) * m(0, j) * cofactor_det(minor);
  }
  return det;
}

SymMatrix sym2(double a, double b, double c) { return SymMatrix::from_upper(2, {a, b, c}); }

}  // namespace

TEST(SymMatrix, PackedStorageIsSymmetric) {
  SymMatrix s(3);
  s.set(2, 0, 4.0);
  EXPECT_EQ(s(0, 2), 4.0);
  EXPECT_EQ(s.upper().size(), 6u);
  s.add(0, 2, 1.0);
  EXPECT_EQ(s(2, 0), 5.0);
  const Matrix d = s.dense();
  EXPECT_EQ(d, d.transpose());
}

TEST(SymMatrix, FromUpperRejectsWrongCount) {
  EXPECT_THROW(SymMatrix::from_upper(3, {1, 2, 3}), InvalidInput);
}

TEST(SymMatrix, ArithmeticAndNorms) {
  const SymMatrix a = sym2(1, 2, 3);
  const SymMatrix b = SymMatrix::identity(2);
  EXPECT_EQ((a + b)(1, 1), 4.0);
  EXPECT_EQ((a - b)(0, 0), 0.0);
  EXPECT_EQ((2.0 * a)(0, 1), 4.0);
  EXPECT_DOUBLE_EQ(a.trace(), 4.0);
  EXPECT_DOUBLE_EQ(a.frobenius_norm(), std::sqrt(1 + 8 + 9));
  EXPECT_DOUBLE_EQ(inner(a, b), 4.0);
  EXPECT_DOUBLE_EQ(inner(a, a), 18.0);
  const Vector y = a * Vector::Ones(2);
  EXPECT_DOUBLE_EQ(y(0), 3.0);
  EXPECT_DOUBLE_EQ(y(1), 5.0);
  SymMatrix m = a;
  EXPECT_THROW(m += SymMatrix(3), InvalidInput);
}

TEST(PositiveDefinite, Examples) {
  EXPECT_TRUE(is_positive_definite(SymMatrix::identity(2), 1e-12).verdict);
  const auto indefinite = is_positive_definite(sym2(1, 2, 1), 1e-12);
  EXPECT_FALSE(indefinite.verdict);
  EXPECT_NEAR(indefinite.min_pivot_or_eig, -1.0, 1e-12);
  // Leading minors 8 and 23.
  const auto h = is_positive_definite(sym2(8, 3, 4), 1e-12);
  EXPECT_TRUE(h.verdict);
  EXPECT_NEAR(h.min_pivot_or_eig, 23.0 / 8.0, 1e-12);
}

TEST(PositiveDefinite, RejectsBadInput) {
  EXPECT_THROW(is_positive_definite(SymMatrix::identity(2), -1.0), InvalidInput);
  EXPECT_THROW(is_positive_definite(sym2(NAN, 0, 1), 1e-9), InvalidInput);
}

TEST(PositiveDefinite, SemidefiniteIsNotStrict) {
  EXPECT_FALSE(is_positive_definite(sym2(1, 1, 1)).verdict);
  EXPECT_FALSE(is_positive_definite(SymMatrix(3)).verdict);
}

TEST(SymEig, Examples) {
  auto e = sym_eig(SymMatrix::diagonal(Vector::Map(std::vector<double>{3, 1}.data(), 2)));
  EXPECT_DOUBLE_EQ(e.values(0), 3.0);
  EXPECT_DOUBLE_EQ(e.values(1), 1.0);
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), 1.0, 1e-15);

  e = sym_eig(sym2(0, 1, 0));
  EXPECT_NEAR(e.values(0), 1.0, 1e-14);
  EXPECT_NEAR(e.values(1), -1.0, 1e-14);

  Vector v(3);
  v << 1, 2, 2;
  e = sym_eig(SymMatrix::from_dense(v * v.transpose()));
  EXPECT_NEAR(e.values(0), 9.0, 1e-12);
  EXPECT_NEAR(e.values(1), 0.0, 1e-12);
  EXPECT_NEAR(e.values(2), 0.0, 1e-12);
}

TEST(SymEig, PropertiesOnRandomMatrices) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 20;
    const SymMatrix s = testutil::random_sym(n, rng);
    const auto e = sym_eig(s);
    for (Eigen::Index k = 1; k < e.values.size(); ++k) EXPECT_GE(e.values(k - 1), e.values(k));

    const Matrix recon = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    EXPECT_LE((s.dense() - recon).norm(), 1e-10 * std::max(1.0, s.frobenius_norm()));
    const Matrix gram = e.vectors.transpose() * e.vectors;
    EXPECT_LE((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(e.values.sum(), s.trace(), 1e-9 * std::max(1.0, std::abs(s.trace())));

    if (n <= 6) {
      const double det = cofactor_det(s.dense());
      EXPECT_NEAR(e.values.prod(), det, 1e-6 * std::max(1e-6, std::abs(det)));
    }

    // The PD verdict agrees with the spectrum.
    const SymMatrix shifted = s + SymMatrix::identity(n);
    const double tol = default_pd_tol(shifted);
    const bool spectral = sym_eig(shifted).values.minCoeff() > tol;
    EXPECT_EQ(is_positive_definite(shifted, tol).verdict, spectral);
  }
}

TEST(SymEig, RejectsNonFinite) {
  EXPECT_THROW(sym_eig(sym2(INFINITY, 0, 1)), InvalidInput);
}

TEST(SolveLinear, Examples) {
  Vector b(2);
  b << 1, 2;
  auto r = solve_linear(Matrix::Identity(2, 2), b);
  ASSERT_TRUE(std::holds_alternative<LinearSolution>(r));
  EXPECT_NEAR((std::get<LinearSolution>(r).solution - b).norm(), 0.0, 1e-14);
  EXPECT_EQ(std::get<LinearSolution>(r).nullspace.cols(), 0);

  Matrix row(1, 2);
  row << 1, 1;
  r = solve_linear(row, Vector::Constant(1, 2.0));
  ASSERT_TRUE(std::holds_alternative<LinearSolution>(r));
  const auto& sol = std::get<LinearSolution>(r);
  EXPECT_NEAR(sol.solution(0), 1.0, 1e-14);
  EXPECT_NEAR(sol.solution(1), 1.0, 1e-14);
  ASSERT_EQ(sol.nullspace.cols(), 1);
  EXPECT_NEAR(std::abs(sol.nullspace(0, 0)), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(sol.nullspace(0, 0), -sol.nullspace(1, 0), 1e-14);

  Matrix col(2, 1);
  col << 1, 1;
  Vector b2(2);
  b2 << 0, 1;
  EXPECT_TRUE(std::holds_alternative<Inconsistent>(solve_linear(col, b2)));
}

TEST(SolveLinear, SolutionSetProperty) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(1, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index rows = dim(rng);
    const Eigen::Index cols = dim(rng);
    const Eigen::Index rank = std::min<Eigen::Index>(std::min(rows, cols), dim(rng));
    Matrix u = Matrix::Random(rows, rank);
    Matrix v = Matrix::Random(rank, cols);
    const Matrix m = u * v;
    const Vector b = m * Vector::Random(cols);
    const auto r = solve_linear(m, b);
    ASSERT_TRUE(std::holds_alternative<LinearSolution>(r));
    const auto& sol = std::get<LinearSolution>(r);
    EXPECT_EQ(static_cast<std::size_t>(sol.nullspace.cols()), cols - numerical_rank(m));
    const Vector x = sol.solution + sol.nullspace * Vector::Random(sol.nullspace.cols());
    EXPECT_LE((m * x - b).norm(), 1e-10 * std::max(1.0, b.norm()) * 10);
  }
}

TEST(SolveLinear, DimensionMismatchThrows) {
  EXPECT_THROW(solve_linear(Matrix::Identity(2, 2), Vector::Zero(3)), InvalidInput);
}
