#include "sdx/symla.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sdx/errors.hpp"

namespace sdx {

SymMatrix::SymMatrix(std::size_t n) : n_(n), data_(n * (n + 1) / 2, 0.0) {}

SymMatrix SymMatrix::identity(std::size_t n) {
  SymMatrix s(n);
  for (std::size_t i = 0; i < n; ++i) s.set(i, i, 1.0);
  return s;
}

SymMatrix SymMatrix::diagonal(const Vector& d) {
  SymMatrix s(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) s.set(i, i, d(i));
  return s;
}

SymMatrix SymMatrix::from_dense(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidInput("from_dense: matrix is not square");
  const auto n = static_cast<std::size_t>(m.rows());
  SymMatrix s(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) s.set(i, j, m(i, j));
  return s;
}

SymMatrix SymMatrix::from_upper(std::size_t n, const std::vector<double>& upper) {
  if (upper.size() != n * (n + 1) / 2)
    throw InvalidInput("from_upper: expected " + std::to_string(n * (n + 1) / 2) +
                       " entries, got " + std::to_string(upper.size()));
  SymMatrix s(n);
  s.data_ = upper;
  return s;
}

Matrix SymMatrix::dense() const {
  Matrix m(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i; j < n_; ++j) m(i, j) = m(j, i) = (*this)(i, j);
  return m;
}

Vector SymMatrix::diagonal_entries() const {
  Vector d(n_);
  for (std::size_t i = 0; i < n_; ++i) d(i) = (*this)(i, i);
  return d;
}

Vector SymMatrix::operator*(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != n_)
    throw InvalidInput("SymMatrix * Vector: dimension mismatch");
  Vector y = Vector::Zero(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    y(i) += (*this)(i, i) * x(i);
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double v = (*this)(i, j);
      y(i) += v * x(j);
      y(j) += v * x(i);
    }
  }
  return y;
}

double SymMatrix::frobenius_norm() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i; j < n_; ++j) {
      const double v = (*this)(i, j);
      acc += (i == j ? 1.0 : 2.0) * v * v;
    }
  return std::sqrt(acc);
}

double SymMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double SymMatrix::max_abs_diagonal() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_; ++i) m = std::max(m, std::abs((*this)(i, i)));
  return m;
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

bool SymMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  if (o.n_ != n_) throw InvalidInput("SymMatrix +=: dimension mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
  if (o.n_ != n_) throw InvalidInput("SymMatrix -=: dimension mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

double inner(const SymMatrix& a, const SymMatrix& b) {
  if (a.size() != b.size()) throw InvalidInput("inner: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i; j < a.size(); ++j)
      acc += (i == j ? 1.0 : 2.0) * a(i, j) * b(i, j);
  return acc;
}

double default_pd_tol(const SymMatrix& s) {
  return kPdRelativeTol * std::max(1.0, s.max_abs_diagonal());
}

PdVerdict is_positive_definite(const SymMatrix& s, double tol) {
  if (!(tol >= 0.0)) throw InvalidInput("is_positive_definite: tol must be >= 0");
  if (!s.all_finite()) throw InvalidInput("is_positive_definite: non-finite entry");
  const std::size_t n = s.size();
  Matrix l = Matrix::Zero(n, n);
  double min_pivot = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = s(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > tol)) return {false, min_eigenvalue(s)};
    min_pivot = std::min(min_pivot, pivot);
    const double d = std::sqrt(pivot);
    l(j, j) = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / d;
    }
  }
  return {true, min_pivot};
}

PdVerdict is_positive_definite(const SymMatrix& s) {
  return is_positive_definite(s, default_pd_tol(s));
}

EigenDecomposition sym_eig(const SymMatrix& s) {
  if (!s.all_finite()) throw InvalidInput("sym_eig: non-finite entry");
  const auto n = static_cast<Eigen::Index>(s.size());
  Matrix a = s.dense();
  Matrix v = Matrix::Identity(n, n);
  const double scale = std::max(a.norm(), std::numeric_limits<double>::min());
  constexpr int kMaxSweeps = 100;

  auto off_norm = [&] {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) acc += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(acc);
  };

  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (off_norm() <= 1e-14 * scale) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == kMaxSweeps && off_norm() > 1e-14 * scale)
    throw NumericalFailure("sym_eig: Jacobi sweeps did not converge");

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

double min_eigenvalue(const SymMatrix& s) {
  if (s.size() == 0) return std::numeric_limits<double>::infinity();
  const auto e = sym_eig(s);
  return e.values(e.values.size() - 1);
}

std::variant<LinearSolution, Inconsistent> solve_linear(
    const Matrix& m, const Vector& b, const LinearSolveTolerances& tol) {
  if (m.rows() != b.size())
    throw InvalidInput("solve_linear: rows of M do not match length of b");
  const Eigen::Index cols = m.cols();
  if (m.rows() == 0 || cols == 0) {
    LinearSolution sol{Vector::Zero(cols), Matrix::Identity(cols, cols)};
    const double res = b.norm();
    if (res > tol.residual * std::max(1.0, b.norm())) return Inconsistent{res};
    return sol;
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sigma = svd.singularValues();
  const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
  Eigen::Index rank = 0;
  while (rank < sigma.size() && smax > 0.0 && sigma(rank) > tol.rank * smax) ++rank;

  Vector x = Vector::Zero(cols);
  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();
  for (Eigen::Index k = 0; k < rank; ++k)
    x += v.col(k) * (u.col(k).dot(b) / sigma(k));

  const double res = (m * x - b).norm();
  if (res > tol.residual * std::max(1.0, b.norm())) return Inconsistent{res};
  return LinearSolution{std::move(x), v.rightCols(cols - rank)};
}

std::variant<LinearSolution, Inconsistent> solve_linear(const Matrix& m,
                                                        const Vector& b,
                                                        double tol) {
  return solve_linear(m, b, LinearSolveTolerances{tol, tol});
}

std::size_t numerical_rank(const Matrix& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sigma = svd.singularValues();
  std::size_t rank = 0;
  for (Eigen::Index k = 0; k < sigma.size(); ++k)
    if (sigma(0) > 0.0 && sigma(k) > tol * sigma(0)) ++rank;
  return rank;
}

}  // namespace sdx
