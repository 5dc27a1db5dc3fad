#include "sdx/quadmodel.hpp"

#include <cmath>
#include <limits>

#include "sdx/errors.hpp"
#include "sdx/sdpcore.hpp"

namespace sdx {
namespace {

void require_dim(const Vector& v, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(v.size()) != n)
    throw InvalidInput(std::string(what) + ": expected length " + std::to_string(n) +
                       ", got " + std::to_string(v.size()));
}

Matrix checked_inverse(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw SingularTransform(std::string(what) + ": matrix is not square");
  if (numerical_rank(m) < static_cast<std::size_t>(m.rows()))
    throw SingularTransform(std::string(what) + ": matrix is singular");
  return m.fullPivLu().inverse();
}

SymMatrix congruence(const SymMatrix& a, const Matrix& t) {
  return SymMatrix::from_dense(t.transpose() * a.dense() * t);
}

}  // namespace

void QcqpInstance::validate() const {
  const std::size_t n = objective.dim();
  if (n == 0) throw InvalidInput("instance: dimension must be >= 1");
  require_dim(objective.c, n, "objective c");
  if (constraints.empty()) throw InvalidInput("instance: at least one constraint required");
  for (const auto& f : constraints) {
    if (f.dim() != n) throw InvalidInput("instance: constraint A has wrong dimension");
    require_dim(f.a, n, "constraint a");
  }
}

double evaluate(const QuadraticPolynomial& f, const Vector& x) {
  require_dim(x, f.dim(), "evaluate");
  require_dim(f.a, f.dim(), "evaluate: linear part");
  return x.dot(f.A * x) + 2.0 * f.a.dot(x) + f.alpha;
}

double evaluate(const Objective& f, const Vector& x) {
  require_dim(x, f.dim(), "evaluate");
  require_dim(f.c, f.dim(), "evaluate: linear part");
  return x.dot(f.C * x) + 2.0 * f.c.dot(x);
}

SymMatrix hessian(const QcqpInstance& inst, const Vector& lambda) {
  require_dim(lambda, inst.m(), "hessian: lambda");
  SymMatrix h = inst.objective.C;
  for (std::size_t i = 0; i < inst.m(); ++i)
    if (lambda(i) != 0.0) h -= lambda(i) * inst.constraints[i].A;
  return h;
}

Vector stationarity_residual(const QcqpInstance& inst, const Vector& x,
                             const Vector& lambda) {
  require_dim(x, inst.n(), "stationarity_residual: x");
  Vector r = inst.objective.c + hessian(inst, lambda) * x;
  for (std::size_t i = 0; i < inst.m(); ++i) r -= lambda(i) * inst.constraints[i].a;
  return r;
}

const char* to_string(NotCertifiedReason r) {
  switch (r) {
    case NotCertifiedReason::NoMultiplier: return "NoMultiplier";
    case NotCertifiedReason::HessianNotPD: return "HessianNotPD";
  }
  return "Unknown";
}

bool verify_certificate(const QcqpInstance& inst, const ExactnessCertificate& cert,
                        const CertifyOptions& opts) {
  if (static_cast<std::size_t>(cert.x.size()) != inst.n() ||
      static_cast<std::size_t>(cert.lambda.size()) != inst.m())
    return false;
  for (const auto& f : inst.constraints)
    if (!(std::abs(evaluate(f, cert.x)) <= opts.feas_tol)) return false;
  const Vector rhs = inst.objective.c + inst.objective.C * cert.x;
  const double res = stationarity_residual(inst, cert.x, cert.lambda).norm();
  if (!(res <= opts.stationarity_tol * std::max(1.0, rhs.norm()))) return false;
  const SymMatrix h = hessian(inst, cert.lambda);
  const double thr = opts.margin_tol * std::max(1.0, h.max_abs());
  return min_eigenvalue(h) > thr;
}

CertifyResult certify_membership(const QcqpInstance& inst, const Vector& x,
                                 const CertifyOptions& opts) {
  inst.validate();
  require_dim(x, inst.n(), "certify_membership: x");
  for (std::size_t i = 0; i < inst.m(); ++i) {
    const double v = evaluate(inst.constraints[i], x);
    if (!(std::abs(v) <= opts.feas_tol)) throw InfeasiblePoint(i, v);
  }

  // Stationarity is linear in lambda: sum lambda_i (a_i + A_i x) = c + C x.
  const auto n = static_cast<Eigen::Index>(inst.n());
  const auto m = static_cast<Eigen::Index>(inst.m());
  Matrix jac(n, m);
  for (Eigen::Index i = 0; i < m; ++i)
    jac.col(i) = inst.constraints[i].a + inst.constraints[i].A * x;
  const Vector rhs = inst.objective.c + inst.objective.C * x;

  const auto solved = solve_linear(jac, rhs, LinearSolveTolerances{opts.rank_tol,
                                                                    opts.stationarity_tol});
  if (const auto* bad = std::get_if<Inconsistent>(&solved)) {
    return NotCertified{NotCertifiedReason::NoMultiplier,
                        std::numeric_limits<double>::quiet_NaN(),
                        "stationarity system is inconsistent (residual " +
                            std::to_string(bad->residual) + ")"};
  }
  const auto& lin = std::get<LinearSolution>(solved);

  Vector lambda = lin.solution;
  if (lin.nullspace.cols() > 0) {
    const SymMatrix f0 = hessian(inst, lambda);
    std::vector<SymMatrix> fs;
    for (Eigen::Index k = 0; k < lin.nullspace.cols(); ++k) {
      SymMatrix fk(inst.n());
      for (Eigen::Index i = 0; i < m; ++i)
        if (lin.nullspace(i, k) != 0.0) fk -= lin.nullspace(i, k) * inst.constraints[i].A;
      fs.push_back(std::move(fk));
    }
    const sdp::LmiResult lmi = sdp::lmi_feasibility(f0, fs);
    if (lmi.unbounded) {
      // Walk out along the PD recession direction until H is safely PD.
      double scale = 1.0;
      for (int k = 0; k < 200; ++k, scale *= 2.0) {
        const Vector cand = lin.solution + lin.nullspace * (scale * lmi.mu);
        const SymMatrix h = hessian(inst, cand);
        lambda = cand;
        if (min_eigenvalue(h) > opts.margin_tol * std::max(1.0, h.max_abs())) break;
      }
    } else {
      lambda = lin.solution + lin.nullspace * lmi.mu;
    }
  }

  const SymMatrix h = hessian(inst, lambda);
  const double margin = min_eigenvalue(h);
  if (!(margin > opts.margin_tol * std::max(1.0, h.max_abs()))) {
    return NotCertified{NotCertifiedReason::HessianNotPD, margin,
                        lin.nullspace.cols() > 0
                            ? "no multiplier on the affine solution set makes H positive definite"
                            : "unique multiplier gives an H that is not positive definite"};
  }
  ExactnessCertificate cert{x, lambda, margin};
  if (!verify_certificate(inst, cert, opts))
    throw NumericalFailure("certify_membership: certificate failed re-verification");
  return cert;
}

Vector coefficient_vector(const QuadraticPolynomial& f) {
  const std::size_t n = f.dim();
  Vector v(static_cast<Eigen::Index>(1 + n + n * (n + 1) / 2));
  Eigen::Index k = 0;
  v(k++) = f.alpha;
  for (std::size_t i = 0; i < n; ++i) v(k++) = 2.0 * f.a(i);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) v(k++) = (i == j ? 1.0 : 2.0) * f.A(i, j);
  return v;
}

QuadraticPolynomial from_coefficients(std::size_t n, const Vector& coeffs) {
  if (static_cast<std::size_t>(coeffs.size()) != 1 + n + n * (n + 1) / 2)
    throw InvalidInput("from_coefficients: wrong coefficient count");
  QuadraticPolynomial f{SymMatrix(n), Vector(n), 0.0};
  Eigen::Index k = 0;
  f.alpha = coeffs(k++);
  for (std::size_t i = 0; i < n; ++i) f.a(i) = 0.5 * coeffs(k++);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) f.A.set(i, j, (i == j ? 1.0 : 0.5) * coeffs(k++));
  return f;
}

std::vector<QuadraticPolynomial> transform_generators(
    const std::vector<QuadraticPolynomial>& constraints, const Matrix& l) {
  const auto m = static_cast<Eigen::Index>(constraints.size());
  if (l.rows() != m || l.cols() != m)
    throw SingularTransform("transform_generators: L must be m x m");
  if (numerical_rank(l) < static_cast<std::size_t>(m))
    throw SingularTransform("transform_generators: L is singular");
  const std::size_t n = constraints.empty() ? 0 : constraints.front().dim();
  std::vector<QuadraticPolynomial> g;
  for (Eigen::Index t = 0; t < m; ++t) {
    QuadraticPolynomial gt{SymMatrix(n), Vector::Zero(n), 0.0};
    for (Eigen::Index i = 0; i < m; ++i) {
      const double w = l(t, i);
      if (w == 0.0) continue;
      gt.A += w * constraints[i].A;
      gt.a += w * constraints[i].a;
      gt.alpha += w * constraints[i].alpha;
    }
    g.push_back(std::move(gt));
  }
  return g;
}

std::optional<Matrix> find_linear_relation(const std::vector<QuadraticPolynomial>& f,
                                           const std::vector<QuadraticPolynomial>& g,
                                           double tol) {
  if (f.empty() || g.empty()) return std::nullopt;
  const std::size_t n = f.front().dim();
  for (const auto& p : f)
    if (p.dim() != n) throw InvalidInput("find_linear_relation: mixed dimensions in F");
  for (const auto& p : g)
    if (p.dim() != n) throw InvalidInput("find_linear_relation: G and F differ in dimension");

  const auto m = static_cast<Eigen::Index>(f.size());
  const auto rows = static_cast<Eigen::Index>(g.size());
  Matrix basis(static_cast<Eigen::Index>(1 + n + n * (n + 1) / 2), m);
  for (Eigen::Index i = 0; i < m; ++i) basis.col(i) = coefficient_vector(f[i]);

  Matrix l(rows, m);
  for (Eigen::Index t = 0; t < rows; ++t) {
    const auto solved = solve_linear(basis, coefficient_vector(g[t]),
                                     LinearSolveTolerances{1e-10, tol});
    if (std::holds_alternative<Inconsistent>(solved)) return std::nullopt;
    l.row(t) = std::get<LinearSolution>(solved).solution.transpose();
  }
  return l;
}

ExactnessCertificate map_certificate_linear(const QcqpInstance& target,
                                            const ExactnessCertificate& cert,
                                            const Matrix& l) {
  const Matrix inv = checked_inverse(l, "map_certificate_linear");
  require_dim(cert.lambda, static_cast<std::size_t>(l.rows()), "map_certificate_linear: lambda");
  ExactnessCertificate out;
  out.x = cert.x;
  out.lambda = inv.transpose() * cert.lambda;
  out.min_eig_H = min_eigenvalue(hessian(target, out.lambda));
  return out;
}

Objective transform_objective_group(const Objective& obj, const Matrix& m) {
  const Matrix inv = checked_inverse(m, "transform_objective_group");
  require_dim(obj.c, static_cast<std::size_t>(m.rows()), "transform_objective_group: c");
  return Objective{congruence(obj.C, inv), inv.transpose() * obj.c};
}

QuadraticPolynomial substitute_linear(const QuadraticPolynomial& f, const Matrix& m) {
  const Matrix inv = checked_inverse(m, "substitute_linear");
  return QuadraticPolynomial{congruence(f.A, inv), inv.transpose() * f.a, f.alpha};
}

QcqpInstance substitute_linear(const QcqpInstance& inst, const Matrix& m) {
  QcqpInstance out;
  out.objective = transform_objective_group(inst.objective, m);
  for (const auto& f : inst.constraints) out.constraints.push_back(substitute_linear(f, m));
  return out;
}

}  // namespace sdx
