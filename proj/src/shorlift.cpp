#include "sdx/shorlift.hpp"

#include <cmath>

#include "sdx/errors.hpp"

namespace sdx::shor {
namespace {

SymMatrix bordered(double corner, const Vector& border, const SymMatrix& block) {
  const std::size_t n = block.size();
  if (static_cast<std::size_t>(border.size()) != n)
    throw InvalidInput("lift: linear part does not match the quadratic part");
  SymMatrix out(n + 1);
  out.set(0, 0, corner);
  for (std::size_t i = 0; i < n; ++i) {
    out.set(0, i + 1, border(i));
    for (std::size_t j = i; j < n; ++j) out.set(i + 1, j + 1, block(i, j));
  }
  return out;
}

}  // namespace

SymMatrix lift_objective(const Objective& obj) { return bordered(0.0, obj.c, obj.C); }

SymMatrix lift_constraint(const QuadraticPolynomial& f) {
  return bordered(f.alpha, f.a, f.A);
}

SymMatrix homogenizer(std::size_t n) {
  SymMatrix a0(n + 1);
  a0.set(0, 0, 1.0);
  return a0;
}

LiftedProblem lift(const QcqpInstance& inst) {
  inst.validate();
  LiftedProblem out{lift_objective(inst.objective), {}, {}};
  for (const auto& f : inst.constraints) {
    out.A_lift.push_back(lift_constraint(f));
    out.b.push_back(0.0);
  }
  out.A_lift.push_back(homogenizer(inst.n()));
  out.b.push_back(1.0);
  return out;
}

sdp::SdpProblem build_shor_sdp(const QcqpInstance& inst) {
  LiftedProblem l = lift(inst);
  sdp::SdpProblem p;
  p.dim = inst.n() + 1;
  p.C = std::move(l.C_lift);
  for (std::size_t i = 0; i < l.A_lift.size(); ++i)
    p.constraints.push_back({std::move(l.A_lift[i]), l.b[i]});
  return p;
}

std::variant<Vector, NotRankOne> extract_rank1(const SymMatrix& x, double ratio_tol) {
  if (x.size() < 2) throw InvalidInput("extract_rank1: need a lifted matrix of size >= 2");
  const EigenDecomposition e = sym_eig(x);
  const double l1 = e.values(0);
  if (!(l1 > 1e-12 * std::max(1.0, x.max_abs())) || !(l1 > 0.0))
    throw InvalidInput("extract_rank1: matrix is numerically zero");
  const double l2 = std::max(0.0, e.values(1));
  const double ratio = l2 / l1;
  if (ratio > ratio_tol) return NotRankOne{ratio};

  const Vector v = e.vectors.col(0) * std::sqrt(l1);
  if (std::abs(v(0)) <= 1e-6)
    throw InvalidInput("extract_rank1: homogenizing coordinate vanishes");
  const Vector scaled = v / v(0);
  return Vector(scaled.tail(scaled.size() - 1));
}

}  // namespace sdx::shor
