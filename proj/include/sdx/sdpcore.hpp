#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "sdx/symla.hpp"

namespace sdx::sdp {

struct Constraint {
  SymMatrix A;
  double b = 0.0;
};

/// min <C, X>  s.t.  <A_i, X> = b_i,  X ⪰ 0.
struct SdpProblem {
  std::size_t dim = 0;
  SymMatrix C;
  std::vector<Constraint> constraints;
};

enum class Status { Optimal, MaxIterations, NumericalFailure };

const char* to_string(Status s);

struct SdpSolution {
  SymMatrix X;
  Vector y;
  SymMatrix S;  // exactly C - sum y_i A_i
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;  // |primal - dual|
  Status status = Status::NumericalFailure;
  int iterations = 0;
  double primal_infeasibility = 0.0;  // |A(X) - b| / (1 + |b|)
  double dual_infeasibility = 0.0;    // last iterate, before S was recomputed
  std::vector<std::size_t> dropped_constraints;
  std::string message;
};

/// One record per interior-point iteration.
struct IterationRecord {
  int iter = 0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;  // relative: |primal - dual| / (1 + |primal|)
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double complementarity = 0.0;  // <X, S>
  double residual_pairing = 0.0;  // <X, Rd> - y . rp
  double step_primal = 0.0;
  double step_dual = 0.0;
};

struct SolveOptions {
  double tol_gap = 1e-8;
  double tol_feas = 1e-8;
  int max_iters = 200;
  std::function<void(const IterationRecord&)> diagnostics;
};

/// Infeasible-start primal-dual path following (HKM direction, Mehrotra
/// predictor-corrector). Linearly dependent constraints are dropped before
/// the first iteration and listed in SdpSolution::dropped_constraints.
SdpSolution solve(const SdpProblem& p, const SolveOptions& opts = {});

struct LmiResult {
  double t_star = 0.0;  // +inf when the pencil contains a PD direction
  Vector mu;            // maximizer, or the PD direction when unbounded
  bool unbounded = false;
  Status status = Status::Optimal;
  std::string diagnostic;
};

/// maximize t  s.t.  F0 + sum_k mu_k F_k ⪰ t I. The returned t_star is the
/// smallest eigenvalue of the pencil at the returned mu.
LmiResult lmi_feasibility(const SymMatrix& f0, const std::vector<SymMatrix>& fs,
                          const SolveOptions& opts = {});

}  // namespace sdx::sdp
