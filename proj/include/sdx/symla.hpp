#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace sdx {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Real symmetric matrix stored as its packed upper triangle (row-major,
/// diagonal included). Symmetry holds by construction: (i, j) and (j, i)
/// address the same slot.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n);

  static SymMatrix identity(std::size_t n);
  static SymMatrix diagonal(const Vector& d);
  /// Reads the upper triangle of `m`; the lower triangle is ignored.
  static SymMatrix from_dense(const Matrix& m);
  /// Row-major upper triangle including the diagonal, n(n+1)/2 values.
  static SymMatrix from_upper(std::size_t n, const std::vector<double>& upper);

  std::size_t size() const noexcept { return n_; }
  const std::vector<double>& upper() const noexcept { return data_; }

  double operator()(std::size_t i, std::size_t j) const {
    return data_[index(i, j)];
  }
  void set(std::size_t i, std::size_t j, double v) { data_[index(i, j)] = v; }
  void add(std::size_t i, std::size_t j, double v) { data_[index(i, j)] += v; }

  Matrix dense() const;
  Vector diagonal_entries() const;
  Vector operator*(const Vector& x) const;

  double frobenius_norm() const;
  double max_abs() const;
  double max_abs_diagonal() const;
  double trace() const;
  bool all_finite() const;

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator-=(const SymMatrix& o);
  SymMatrix& operator*=(double s);
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * n_ - i * (i + 1) / 2 + j;
  }

  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Trace inner product <A, B>.
double inner(const SymMatrix& a, const SymMatrix& b);

struct PdVerdict {
  bool verdict = false;
  /// Smallest Cholesky pivot on success, smallest eigenvalue on failure.
  double min_pivot_or_eig = 0.0;
};

/// Relative strictness used for "≻ 0" throughout the library.
inline constexpr double kPdRelativeTol = 1e-9;

/// kPdRelativeTol scaled by the largest diagonal magnitude (at least 1).
double default_pd_tol(const SymMatrix& s);

/// Cholesky-first strict positive-definiteness test. Throws InvalidInput on
/// non-finite entries or negative tol.
PdVerdict is_positive_definite(const SymMatrix& s, double tol);
PdVerdict is_positive_definite(const SymMatrix& s);

struct EigenDecomposition {
  Vector values;   // nonincreasing
  Matrix vectors;  // column k pairs with values(k)
};

/// Cyclic Jacobi eigensolver. Throws NumericalFailure if the sweep budget is
/// exhausted, InvalidInput on non-finite entries.
EigenDecomposition sym_eig(const SymMatrix& s);

double min_eigenvalue(const SymMatrix& s);

struct LinearSolution {
  Vector solution;  // minimum-norm particular solution
  Matrix nullspace;  // orthonormal columns, possibly zero columns
};

struct Inconsistent {
  double residual = 0.0;
};

struct LinearSolveTolerances {
  double rank = 1e-10;      // relative to the largest singular value
  double residual = 1e-10;  // relative to max(1, |b|)
};

std::variant<LinearSolution, Inconsistent> solve_linear(
    const Matrix& m, const Vector& b, const LinearSolveTolerances& tol);
std::variant<LinearSolution, Inconsistent> solve_linear(const Matrix& m,
                                                        const Vector& b,
                                                        double tol = 1e-10);

/// Numerical rank with the same convention as solve_linear.
std::size_t numerical_rank(const Matrix& m, double tol = 1e-10);

}  // namespace sdx
