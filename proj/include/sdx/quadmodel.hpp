#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sdx/symla.hpp"

namespace sdx {

/// f(x) = x^T A x + 2 a^T x + alpha.
struct QuadraticPolynomial {
  SymMatrix A;
  Vector a;
  double alpha = 0.0;

  std::size_t dim() const noexcept { return A.size(); }
};

/// f0(x) = x^T C x + 2 c^T x.
struct Objective {
  SymMatrix C;
  Vector c;

  std::size_t dim() const noexcept { return C.size(); }
};

struct QcqpInstance {
  Objective objective;
  std::vector<QuadraticPolynomial> constraints;

  std::size_t n() const noexcept { return objective.dim(); }
  std::size_t m() const noexcept { return constraints.size(); }
  /// Throws InvalidInput when dimensions disagree or m == 0.
  void validate() const;
};

double evaluate(const QuadraticPolynomial& f, const Vector& x);
double evaluate(const Objective& f, const Vector& x);

/// Lagrangian Hessian H(lambda) = C - sum lambda_i A_i.
SymMatrix hessian(const QcqpInstance& inst, const Vector& lambda);

/// c - sum lambda_i a_i + H(lambda) x.
Vector stationarity_residual(const QcqpInstance& inst, const Vector& x,
                             const Vector& lambda);

/// A feasible point x with multipliers lambda such that the stationarity
/// residual vanishes and H(lambda) is positive definite.
struct ExactnessCertificate {
  Vector x;
  Vector lambda;
  double min_eig_H = 0.0;
};

enum class NotCertifiedReason { NoMultiplier, HessianNotPD };

const char* to_string(NotCertifiedReason r);

struct NotCertified {
  NotCertifiedReason reason;
  double margin = 0.0;  // best smallest eigenvalue of H found (NaN for NoMultiplier)
  std::string detail;
};

struct CertifyOptions {
  double feas_tol = 1e-8;         // absolute, on |f_i(x)|
  double stationarity_tol = 1e-9;  // relative to max(1, |c + Cx|)
  double rank_tol = 1e-10;
  double margin_tol = 1e-9;  // scaled by max(1, max|H_ij|)
};

using CertifyResult = std::variant<ExactnessCertificate, NotCertified>;

/// Decides whether the objective lies in the exact-region shadow attached to
/// x. Throws InfeasiblePoint if x violates a constraint beyond feas_tol.
CertifyResult certify_membership(const QcqpInstance& inst, const Vector& x,
                                 const CertifyOptions& opts = {});

/// Re-checks a certificate from scratch against `inst`.
bool verify_certificate(const QcqpInstance& inst, const ExactnessCertificate& cert,
                        const CertifyOptions& opts = {});

/// Coefficients in the monomial order 1, x_1..x_n, x_1^2, x_1x_2, ..., x_n^2.
Vector coefficient_vector(const QuadraticPolynomial& f);
QuadraticPolynomial from_coefficients(std::size_t n, const Vector& coeffs);

/// G = L F at the (A, a, alpha) level. L must be square and invertible.
std::vector<QuadraticPolynomial> transform_generators(
    const std::vector<QuadraticPolynomial>& constraints, const Matrix& l);

/// L with G = L F up to `tol` in coefficient space, or nullopt.
std::optional<Matrix> find_linear_relation(const std::vector<QuadraticPolynomial>& f,
                                           const std::vector<QuadraticPolynomial>& g,
                                           double tol = 1e-9);

/// lambda_hat = L^{-T} lambda; the margin is recomputed against `target`,
/// which is expected to carry the transformed generators.
ExactnessCertificate map_certificate_linear(const QcqpInstance& target,
                                            const ExactnessCertificate& cert,
                                            const Matrix& l);

/// (M^{-T} C M^{-1}, M^{-T} c).
Objective transform_objective_group(const Objective& obj, const Matrix& m);
/// f(x) -> f(M^{-1} x).
QuadraticPolynomial substitute_linear(const QuadraticPolynomial& f, const Matrix& m);
/// Both of the above applied to a whole instance.
QcqpInstance substitute_linear(const QcqpInstance& inst, const Matrix& m);

}  // namespace sdx
