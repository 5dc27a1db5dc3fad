#include "sdx/sdpcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdx/errors.hpp"

namespace sdx::sdp {
namespace {

constexpr double kFractionToBoundary = 0.98;

// Constraint matrix kept both as a triplet list (upper triangle) and, when
// dense enough, as a full matrix. The Schur complement uses whichever form is
// cheaper.
struct Operator {
  struct Entry {
    Eigen::Index i, j;
    double v;
  };
  std::vector<Entry> entries;
  Matrix dense;
  bool is_dense = false;

  static Operator from(const SymMatrix& a, Eigen::Index n) {
    Operator op;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j)
        if (a(i, j) != 0.0) op.entries.push_back({i, j, a(i, j)});
    if (static_cast<Eigen::Index>(op.entries.size()) > 2 * n) {
      op.is_dense = true;
      op.dense = a.dense();
    }
    return op;
  }

  double dot(const Matrix& x) const {
    double acc = 0.0;
    for (const auto& e : entries)
      acc += e.i == e.j ? e.v * x(e.i, e.i) : e.v * (x(e.i, e.j) + x(e.j, e.i));
    return acc;
  }

  void add_scaled_to(Matrix& m, double s) const {
    if (s == 0.0) return;
    for (const auto& e : entries) {
      m(e.i, e.j) += s * e.v;
      if (e.i != e.j) m(e.j, e.i) += s * e.v;
    }
  }

  // Returns X * A * W.
  Matrix sandwich(const Matrix& x, const Matrix& w) const {
    if (is_dense) return x * dense * w;
    Matrix g = Matrix::Zero(x.rows(), w.cols());
    for (const auto& e : entries) {
      g.noalias() += e.v * x.col(e.i) * w.row(e.j);
      if (e.i != e.j) g.noalias() += e.v * x.col(e.j) * w.row(e.i);
    }
    return g;
  }
};

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Largest alpha in (0, inf] with X + alpha dX ⪰ 0, given the Cholesky factor
// of X.
double max_step(const Eigen::LLT<Matrix>& chol, const Matrix& dx) {
  const Matrix& l = chol.matrixL();
  Matrix t = l.triangularView<Eigen::Lower>().solve(dx);
  t = l.triangularView<Eigen::Lower>().solve(t.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(t), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

// Greedy in-order selection of linearly independent constraints through an
// incremental Cholesky factorization of their Gram matrix.
std::vector<std::size_t> independent_rows(const std::vector<Operator>& ops,
                                          Eigen::Index n) {
  const std::size_t m = ops.size();
  std::vector<std::size_t> kept;
  Matrix l;  // lower factor over the kept rows
  Matrix scratch = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < m; ++i) {
    ops[i].add_scaled_to(scratch, 1.0);
    const double gii = ops[i].dot(scratch);
    Vector g(kept.size());
    for (std::size_t k = 0; k < kept.size(); ++k) g(k) = ops[kept[k]].dot(scratch);
    ops[i].add_scaled_to(scratch, -1.0);
    if (gii <= 0.0) continue;
    Vector z = kept.empty() ? Vector() : Vector(l.triangularView<Eigen::Lower>().solve(g));
    const double d = gii - (kept.empty() ? 0.0 : z.squaredNorm());
    if (d <= 1e-12 * gii) continue;
    const auto r = static_cast<Eigen::Index>(kept.size());
    Matrix nl = Matrix::Zero(r + 1, r + 1);
    if (r > 0) {
      nl.topLeftCorner(r, r) = l;
      nl.block(r, 0, 1, r) = z.transpose();
    }
    nl(r, r) = std::sqrt(d);
    l = std::move(nl);
    kept.push_back(i);
  }
  return kept;
}

}  // namespace

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::MaxIterations: return "MaxIterations";
    case Status::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

SdpSolution solve(const SdpProblem& p, const SolveOptions& opts) {
  const auto n = static_cast<Eigen::Index>(p.dim);
  if (n == 0 || p.C.size() != p.dim) throw InvalidInput("solve: C does not match dim");
  if (p.constraints.empty()) throw InvalidInput("solve: constraint list is empty");
  for (const auto& c : p.constraints)
    if (c.A.size() != p.dim) throw InvalidInput("solve: constraint dimension mismatch");

  std::vector<Operator> all_ops;
  all_ops.reserve(p.constraints.size());
  for (const auto& c : p.constraints) all_ops.push_back(Operator::from(c.A, n));

  SdpSolution out;
  const std::vector<std::size_t> kept = independent_rows(all_ops, n);
  for (std::size_t i = 0, k = 0; i < p.constraints.size(); ++i) {
    if (k < kept.size() && kept[k] == i) ++k;
    else out.dropped_constraints.push_back(i);
  }
  if (!out.dropped_constraints.empty())
    out.message = "dropped " + std::to_string(out.dropped_constraints.size()) +
                  " linearly dependent constraint(s)";

  const auto m = static_cast<Eigen::Index>(kept.size());
  std::vector<const Operator*> ops;
  Vector b(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    ops.push_back(&all_ops[kept[k]]);
    b(k) = p.constraints[kept[k]].b;
  }

  const Matrix c = p.C.dense();
  const double b_norm = b.norm();
  const double c_norm = c.norm();

  auto apply_a = [&](const Matrix& x) {
    Vector r(m);
    for (Eigen::Index k = 0; k < m; ++k) r(k) = ops[k]->dot(x);
    return r;
  };
  auto apply_at = [&](const Vector& y) {
    Matrix r = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < m; ++k) ops[k]->add_scaled_to(r, y(k));
    return r;
  };

  const double tau = 1.0 + p.C.max_abs();
  Matrix x = tau * Matrix::Identity(n, n);
  Matrix s = tau * Matrix::Identity(n, n);
  Vector y = Vector::Zero(m);

  auto finish = [&](Status status, int iters) {
    out.status = status;
    out.iterations = iters;
    out.X = SymMatrix::from_dense(sym(x));
    Vector y_full = Vector::Zero(static_cast<Eigen::Index>(p.constraints.size()));
    for (Eigen::Index k = 0; k < m; ++k) y_full(kept[k]) = y(k);
    out.y = y_full;
    SymMatrix slack = p.C;
    for (std::size_t i = 0; i < p.constraints.size(); ++i)
      if (y_full(i) != 0.0) slack -= y_full(i) * p.constraints[i].A;
    out.S = std::move(slack);
    out.primal_value = inner(p.C, out.X);
    double dual = 0.0;
    for (std::size_t i = 0; i < p.constraints.size(); ++i) dual += p.constraints[i].b * y_full(i);
    out.dual_value = dual;
    out.gap = std::abs(out.primal_value - out.dual_value);
    out.primal_infeasibility = (apply_a(x) - b).norm() / (1.0 + b_norm);
    return out;
  };

  for (int iter = 0;; ++iter) {
    const Vector rp = b - apply_a(x);
    const Matrix rd = c - apply_at(y) - s;
    const double pobj = (c.array() * x.array()).sum();
    const double dobj = b.dot(y);
    const double xs = (x.array() * s.array()).sum();
    const double mu = xs / static_cast<double>(n);
    const double rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    const double pinf = rp.norm() / (1.0 + b_norm);
    const double dinf = rd.norm() / (1.0 + c_norm);
    out.dual_infeasibility = dinf;

    IterationRecord rec;
    rec.iter = iter;
    rec.primal = pobj;
    rec.dual = dobj;
    rec.gap = rel_gap;
    rec.primal_infeasibility = pinf;
    rec.dual_infeasibility = dinf;
    rec.complementarity = xs;
    rec.residual_pairing = (x.array() * rd.array()).sum() - y.dot(rp);

    if (rel_gap <= opts.tol_gap && pinf <= opts.tol_feas && dinf <= opts.tol_feas) {
      if (opts.diagnostics) opts.diagnostics(rec);
      return finish(Status::Optimal, iter);
    }
    if (iter >= opts.max_iters) {
      if (opts.diagnostics) opts.diagnostics(rec);
      out.message = "iteration budget exhausted";
      return finish(Status::MaxIterations, iter);
    }

    Eigen::LLT<Matrix> chol_s(s);
    Eigen::LLT<Matrix> chol_x(x);
    if (chol_s.info() != Eigen::Success || chol_x.info() != Eigen::Success) {
      out.message = "iterate left the PSD cone";
      return finish(Status::NumericalFailure, iter);
    }
    const Matrix w = chol_s.solve(Matrix::Identity(n, n));

    // Schur complement M_ij = <A_i, X A_j W>.
    Matrix schur(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const Matrix g = ops[j]->sandwich(x, w);
      for (Eigen::Index i = 0; i < m; ++i) schur(i, j) = ops[i]->dot(g);
    }
    schur = sym(schur);
    Eigen::LLT<Matrix> chol_m(schur);
    if (chol_m.info() != Eigen::Success) {
      out.message = "Schur complement is not positive definite";
      return finish(Status::NumericalFailure, iter);
    }

    const Matrix x_rd_w = x * rd * w;
    struct Direction {
      Matrix dx, ds;
      Vector dy;
    };
    auto direction = [&](double sigma_mu, const Matrix* corr) {
      Matrix r = sigma_mu * w - x - x_rd_w;
      if (corr) r -= *corr;
      r = sym(r);
      Direction d;
      d.dy = chol_m.solve(rp - apply_a(r));
      const Matrix aty = apply_at(d.dy);
      d.ds = rd - aty;
      d.dx = sym(r + x * aty * w);
      return d;
    };
    auto steps = [&](const Direction& d) {
      return std::pair{std::min(1.0, kFractionToBoundary * max_step(chol_x, d.dx)),
                       std::min(1.0, kFractionToBoundary * max_step(chol_s, d.ds))};
    };

    const Direction pred = direction(0.0, nullptr);
    const auto [ap_aff, ad_aff] = steps(pred);
    const double mu_aff =
        ((x + ap_aff * pred.dx).array() * (s + ad_aff * pred.ds).array()).sum() /
        static_cast<double>(n);
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);
    const Matrix corr = pred.dx * pred.ds * w;
    const Direction d = direction(sigma * mu, &corr);
    const auto [ap, ad] = steps(d);

    rec.step_primal = ap;
    rec.step_dual = ad;
    if (opts.diagnostics) opts.diagnostics(rec);

    if (std::max(ap, ad) < 1e-12) {
      out.message = "step length underflow";
      return finish(Status::NumericalFailure, iter);
    }
    x = sym(x + ap * d.dx);
    y += ad * d.dy;
    s = sym(s + ad * d.ds);
  }
}

LmiResult lmi_feasibility(const SymMatrix& f0, const std::vector<SymMatrix>& fs,
                          const SolveOptions& opts) {
  const std::size_t n = f0.size();
  for (const auto& f : fs)
    if (f.size() != n) throw InvalidInput("lmi_feasibility: dimension mismatch");

  LmiResult res;
  res.mu = Vector::Zero(static_cast<Eigen::Index>(fs.size()));
  if (fs.empty()) {
    res.t_star = min_eigenvalue(f0);
    return res;
  }

  const std::size_t k = fs.size();
  double scale = std::max(1.0, f0.max_abs());
  for (const auto& f : fs) scale = std::max(scale, f.max_abs());

  // Recession check: maximize s s.t. sum mu_k F_k ⪰ s I with |mu_k| <= 1,
  // posed as one block-diagonal LMI of size n + 2k.
  {
    const std::size_t dim = n + 2 * k;
    SdpProblem rec;
    rec.dim = dim;
    rec.C = SymMatrix(dim);
    for (std::size_t q = 0; q < 2 * k; ++q) rec.C.set(n + q, n + q, 1.0);
    Constraint ts{SymMatrix(dim), 1.0};
    for (std::size_t i = 0; i < n; ++i) ts.A.set(i, i, 1.0);
    rec.constraints.push_back(std::move(ts));
    for (std::size_t q = 0; q < k; ++q) {
      Constraint cq{SymMatrix(dim), 0.0};
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) cq.A.set(i, j, -fs[q](i, j));
      cq.A.set(n + q, n + q, 1.0);
      cq.A.set(n + k + q, n + k + q, -1.0);
      rec.constraints.push_back(std::move(cq));
    }
    const SdpSolution sol = solve(rec, opts);
    if (sol.status == Status::Optimal && sol.y(0) > 1e-7 * scale) {
      SymMatrix pencil(n);
      for (std::size_t q = 0; q < k; ++q) pencil += sol.y(q + 1) * fs[q];
      if (is_positive_definite(pencil, 0.0).verdict) {
        res.unbounded = true;
        res.t_star = std::numeric_limits<double>::infinity();
        res.mu = sol.y.tail(static_cast<Eigen::Index>(k));
        res.diagnostic = "pencil contains a positive definite direction";
        return res;
      }
    }
  }

  // Dual form with y = (t, mu): F0 - t I + sum mu_k F_k ⪰ 0.
  SdpProblem p;
  p.dim = n;
  p.C = f0;
  p.constraints.push_back({SymMatrix::identity(n), 1.0});
  for (const auto& f : fs) p.constraints.push_back({-1.0 * f, 0.0});
  const SdpSolution sol = solve(p, opts);
  res.status = sol.status;
  res.diagnostic = sol.message;
  res.mu = sol.y.tail(static_cast<Eigen::Index>(k));
  SymMatrix pencil = f0;
  for (std::size_t q = 0; q < k; ++q) pencil += res.mu(q) * fs[q];
  res.t_star = min_eigenvalue(pencil);
  return res;
}

}  // namespace sdx::sdp
