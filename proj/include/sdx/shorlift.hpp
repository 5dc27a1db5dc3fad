#pragma once

#include <variant>
#include <vector>

#include "sdx/quadmodel.hpp"
#include "sdx/sdpcore.hpp"

namespace sdx::shor {

/// [[0, c^T], [c, C]].
SymMatrix lift_objective(const Objective& obj);
/// [[alpha, a^T], [a, A]].
SymMatrix lift_constraint(const QuadraticPolynomial& f);
/// The homogenizing constraint: a single 1 in the (0, 0) slot.
SymMatrix homogenizer(std::size_t n);

struct LiftedProblem {
  SymMatrix C_lift;
  std::vector<SymMatrix> A_lift;  // m lifted constraints, then the homogenizer
  std::vector<double> b;          // zeros, then 1
};

LiftedProblem lift(const QcqpInstance& inst);

/// The Shor relaxation: min <C_lift, X> over X ⪰ 0 of size n + 1 subject to
/// <A_i, X> = 0 and X_00 = 1.
sdp::SdpProblem build_shor_sdp(const QcqpInstance& inst);

struct NotRankOne {
  double ratio = 0.0;  // second over first eigenvalue
};

inline constexpr double kRankOneRatioTol = 1e-6;

/// Recovers x from X ≈ (1, x)(1, x)^T. Throws InvalidInput when X is
/// numerically zero or its leading factor has a vanishing 0th coordinate.
std::variant<Vector, NotRankOne> extract_rank1(const SymMatrix& x,
                                               double ratio_tol = kRankOneRatioTol);

}  // namespace sdx::shor
