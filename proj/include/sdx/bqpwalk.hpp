#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sdx/quadmodel.hpp"
#include "sdx/symla.hpp"

namespace sdx::bqp {

/// Index of the pair (i, j), i < j (0-based), in the ordering
/// (1,2), (1,3), ..., (1,n), (2,3), ..., (n-1,n).
std::size_t pair_index(std::size_t n, std::size_t i, std::size_t j);

/// min x^T C x + 2 c^T x over x in {±1}^n. C is assembled from the strict
/// upper coefficients c_ij (C_ij = C_ji = c_ij) and an optional diagonal,
/// which on the hypercube only shifts the objective by its trace.
class BqpInstance {
 public:
  BqpInstance() = default;
  BqpInstance(std::vector<double> c, std::vector<double> coff,
              std::vector<double> cdiag = {});

  std::size_t n() const noexcept { return c_.size(); }
  const std::vector<double>& c() const noexcept { return c_; }
  const std::vector<double>& coff() const noexcept { return coff_; }
  const std::vector<double>& cdiag() const noexcept { return cdiag_; }

  /// c_ij for i != j (0-based), 0 on the diagonal.
  double coupling(std::size_t i, std::size_t j) const { return dense_[i * n() + j]; }
  double objective_constant() const noexcept { return constant_; }
  /// 1e-12 * (1 + |c|_inf + |coff|_inf): cone values at or below this are ties.
  double degeneracy_tol() const noexcept { return degeneracy_tol_; }

  QcqpInstance to_qcqp() const;

  friend bool operator==(const BqpInstance& a, const BqpInstance& b) {
    return a.c_ == b.c_ && a.coff_ == b.coff_ && a.cdiag_ == b.cdiag_;
  }

 private:
  std::vector<double> c_;
  std::vector<double> coff_;
  std::vector<double> cdiag_;
  std::vector<double> dense_;
  double constant_ = 0.0;
  double degeneracy_tol_ = 1e-12;
};

/// Point of {±1}^n.
class SignVector {
 public:
  SignVector() = default;
  explicit SignVector(std::size_t n) : bits_(n, 1) {}
  explicit SignVector(std::vector<int> bits);

  /// Parses "+-+" (or "1,-1,1").
  static SignVector parse(std::string_view s);
  /// Bit k of `mask` set means coordinate k+1 is -1.
  static SignVector from_mask(std::size_t n, std::uint64_t mask);

  std::size_t size() const noexcept { return bits_.size(); }
  int operator[](std::size_t i) const { return bits_[i]; }
  void flip(std::size_t i) { bits_[i] = -bits_[i]; }
  std::uint64_t mask() const;
  Vector to_vector() const;
  std::string to_string() const;
  const std::vector<int>& bits() const noexcept { return bits_; }

  friend bool operator==(const SignVector&, const SignVector&) = default;
  friend auto operator<=>(const SignVector&, const SignVector&) = default;

 private:
  std::vector<int> bits_;
};

SignVector random_sign_vector(std::size_t n, std::mt19937_64& rng);
std::size_t hamming_distance(const SignVector& a, const SignVector& b);

/// x^T C x + 2 c^T x, diagonal constant included.
double bqp_value(const BqpInstance& inst, const SignVector& x);

/// l_j(x) = -(1/x_j)(c_j + sum_{i != j} c_ij x_i), j = 1..n.
Vector cone_values(const BqpInstance& inst, const SignVector& x);

struct ConeMembership {
  bool member = false;
  bool degenerate = false;
  Vector values;
};

ConeMembership in_Px(const BqpInstance& inst, const SignVector& x, double tol);
ConeMembership in_Px(const BqpInstance& inst, const SignVector& x);

struct WalkTrace {
  SignVector start;
  std::vector<std::size_t> flips;  // 1-based coordinates
  std::vector<SignVector> visited;  // start, then one vertex per flip
  SignVector final_vertex;

  std::size_t iterations() const noexcept { return flips.size(); }
};

/// A cone value hit the tie tolerance; the sign needed to move is undefined.
struct Degenerate {
  SignVector at;
  std::size_t coordinate = 0;  // 1-based
  double value = 0.0;
};

struct IterationBudgetExceeded {
  WalkTrace partial;
};

using WalkResult = std::variant<WalkTrace, Degenerate, IterationBudgetExceeded>;

/// Sink-finding walk: while some cone value is negative, flip the first such
/// coordinate. Cone values are maintained incrementally, O(n) per flip.
WalkResult walk(const BqpInstance& inst, const SignVector& x0, std::size_t max_iters);
/// Budget of 2^n + 1 flips capped at 1e7.
WalkResult walk(const BqpInstance& inst, const SignVector& x0);

struct MultistartResult {
  SignVector best;
  double p_best = 0.0;
  std::vector<SignVector> members;  // distinct endpoints, discovery order
  std::vector<WalkTrace> traces;    // one per start
};

/// Start k draws from stream derive_seed(seed, k).
std::variant<MultistartResult, Degenerate> multistart(const BqpInstance& inst,
                                                      std::size_t starts,
                                                      std::uint64_t seed);

struct BruteForceResult {
  SignVector argmin;
  double value = 0.0;
  bool unique = true;
};

inline constexpr std::size_t kBruteForceMaxN = 24;

/// Exhaustive Gray-code scan. Throws TooLarge above kBruteForceMaxN.
BruteForceResult brute_force_min(const BqpInstance& inst);

/// H(x): diagonal cone_values(x), off-diagonal c_ij.
SymMatrix exactness_matrix(const BqpInstance& inst, const SignVector& x);

bool is_sdp_exact_at(const BqpInstance& inst, const SignVector& x, double tol);
bool is_sdp_exact_at(const BqpInstance& inst, const SignVector& x);

/// Diagonal action on coefficients in the ordering
/// (c_12, ..., c_{n-1,n}, c_1, ..., c_n): c_ij -> x_i x_j c_ij, c_k -> x_k c_k.
class GroupElement {
 public:
  explicit GroupElement(const SignVector& x);

  std::size_t n() const noexcept { return n_; }
  const std::vector<int>& diagonal() const noexcept { return diag_; }
  BqpInstance apply(const BqpInstance& inst) const;
  GroupElement compose(const GroupElement& other) const;
  bool is_identity() const;

  friend bool operator==(const GroupElement&, const GroupElement&) = default;

 private:
  GroupElement() = default;
  std::size_t n_ = 0;
  std::vector<int> diag_;
};

GroupElement group_element(const SignVector& x);

struct Disjoint {};

/// An objective lying in both open cones P_x and P_x2 when the vertices
/// differ in at least two coordinates (or coincide); Disjoint at distance 1.
std::variant<BqpInstance, Disjoint> intersection_witness(const SignVector& x,
                                                         const SignVector& x2);

enum class EdgeDirection { TowardFlip, TowardStay };

inline constexpr std::size_t kOrientMaxN = 16;
inline constexpr std::size_t kEnumerateMaxN = 20;

/// The hypercube {±1}^n with every edge directed away from the endpoint whose
/// cone value along that coordinate is negative. Vertices are addressed by
/// SignVector::mask().
class HypercubeOrientation {
 public:
  std::size_t n() const noexcept { return n_; }
  std::size_t vertex_count() const noexcept { return std::size_t{1} << n_; }
  std::size_t edge_count() const noexcept { return n_ * (vertex_count() / 2); }

  /// Direction of the edge along 1-based `coordinate` seen from `vertex`.
  EdgeDirection direction(std::uint64_t vertex, std::size_t coordinate) const;
  /// Cone value of `coordinate` at the even endpoint of the edge.
  double label(std::uint64_t vertex, std::size_t coordinate) const;
  /// Cone value of `coordinate` at `vertex` itself.
  double cone_value(std::uint64_t vertex, std::size_t coordinate) const;
  std::uint64_t out_mask(std::uint64_t vertex) const { return out_[vertex]; }

  std::vector<std::uint64_t> sinks() const;
  bool is_acyclic() const;
  std::string to_dot() const;

 private:
  friend std::variant<HypercubeOrientation, Degenerate> orient_hypercube(
      const BqpInstance& inst);
  std::size_t n_ = 0;
  std::vector<double> values_;  // vertex-major, n per vertex
  std::vector<std::uint64_t> out_;
};

/// Throws TooLarge above kOrientMaxN.
std::variant<HypercubeOrientation, Degenerate> orient_hypercube(const BqpInstance& inst);

/// Left side of the inequality induced when coordinate j is flipped after
/// `flip_history` (1-based indices) from the all-ones start. Equals
/// -cone_values(x)_j at x_i = (-1)^{s_i}, s_i the count of i in the history.
double induced_inequality(const std::vector<std::size_t>& flip_history, std::size_t j,
                          const BqpInstance& inst);

/// Every x with in_Px true (tie tolerance of the instance). Throws TooLarge
/// above kEnumerateMaxN.
std::vector<SignVector> enumerate_Px_members(const BqpInstance& inst);

}  // namespace sdx::bqp
