#include "sdx/bqpwalk.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "sdx/errors.hpp"
#include "sdx/rng.hpp"

namespace sdx::bqp {
namespace {

void require_same_n(const BqpInstance& inst, const SignVector& x, const char* what) {
  if (x.size() != inst.n())
    throw InvalidInput(std::string(what) + ": sign vector has length " +
                       std::to_string(x.size()) + ", instance has n = " +
                       std::to_string(inst.n()));
}

// g_j = c_j + sum_{i != j} c_ij x_i; the cone value is l_j = -x_j g_j.
std::vector<double> local_fields(const BqpInstance& inst, const SignVector& x) {
  const std::size_t n = inst.n();
  std::vector<double> g(inst.c());
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) g[j] += inst.coupling(i, j) * x[i];
  return g;
}

// Flips coordinate i of x and updates the local fields in O(n).
void flip_update(const BqpInstance& inst, SignVector& x, std::vector<double>& g,
                 std::size_t i) {
  const double delta = -2.0 * x[i];
  for (std::size_t j = 0; j < inst.n(); ++j)
    if (j != i) g[j] += inst.coupling(i, j) * delta;
  x.flip(i);
}

}  // namespace

std::size_t pair_index(std::size_t n, std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  if (i == j || j >= n) throw InvalidInput("pair_index: need i != j < n");
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

BqpInstance::BqpInstance(std::vector<double> c, std::vector<double> coff,
                         std::vector<double> cdiag)
    : c_(std::move(c)), coff_(std::move(coff)), cdiag_(std::move(cdiag)) {
  const std::size_t n = c_.size();
  if (n == 0) throw InvalidInput("BqpInstance: n must be >= 1");
  if (coff_.size() != n * (n - 1) / 2)
    throw InvalidInput("BqpInstance: coff must have n(n-1)/2 = " +
                       std::to_string(n * (n - 1) / 2) + " entries, got " +
                       std::to_string(coff_.size()));
  if (!cdiag_.empty() && cdiag_.size() != n)
    throw InvalidInput("BqpInstance: cdiag must be empty or have n entries");
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
  };
  if (!finite(c_) || !finite(coff_) || !finite(cdiag_))
    throw InvalidInput("BqpInstance: non-finite coefficient");

  dense_.assign(n * n, 0.0);
  double inf_c = 0.0;
  double inf_off = 0.0;
  for (double v : c_) inf_c = std::max(inf_c, std::abs(v));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = coff_[pair_index(n, i, j)];
      dense_[i * n + j] = dense_[j * n + i] = v;
      inf_off = std::max(inf_off, std::abs(v));
    }
  for (double d : cdiag_) constant_ += d;
  degeneracy_tol_ = 1e-12 * (1.0 + inf_c + inf_off);
}

QcqpInstance BqpInstance::to_qcqp() const {
  const std::size_t n = this->n();
  QcqpInstance q;
  q.objective.C = SymMatrix(n);
  q.objective.c = Vector(n);
  for (std::size_t i = 0; i < n; ++i) {
    q.objective.c(i) = c_[i];
    if (!cdiag_.empty()) q.objective.C.set(i, i, cdiag_[i]);
    for (std::size_t j = i + 1; j < n; ++j) q.objective.C.set(i, j, coupling(i, j));
  }
  for (std::size_t i = 0; i < n; ++i) {
    QuadraticPolynomial f{SymMatrix(n), Vector::Zero(n), -1.0};
    f.A.set(i, i, 1.0);
    q.constraints.push_back(std::move(f));
  }
  return q;
}

SignVector::SignVector(std::vector<int> bits) : bits_(std::move(bits)) {
  for (int b : bits_)
    if (b != 1 && b != -1) throw InvalidInput("SignVector: entries must be +1 or -1");
}

SignVector SignVector::parse(std::string_view s) {
  std::vector<int> bits;
  if (s.find(',') != std::string_view::npos) {
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const std::size_t end = std::min(s.find(',', pos), s.size());
      const std::string tok(s.substr(pos, end - pos));
      if (tok == "1" || tok == "+1") bits.push_back(1);
      else if (tok == "-1") bits.push_back(-1);
      else throw InvalidInput("SignVector: bad entry '" + tok + "'");
      pos = end + 1;
    }
  } else {
    for (char ch : s) {
      if (ch == '+') bits.push_back(1);
      else if (ch == '-') bits.push_back(-1);
      else throw InvalidInput(std::string("SignVector: bad character '") + ch + "'");
    }
  }
  if (bits.empty()) throw InvalidInput("SignVector: empty");
  return SignVector(std::move(bits));
}

SignVector SignVector::from_mask(std::size_t n, std::uint64_t mask) {
  SignVector x(n);
  for (std::size_t i = 0; i < n; ++i)
    if ((mask >> i) & 1U) x.bits_[i] = -1;
  return x;
}

std::uint64_t SignVector::mask() const {
  if (bits_.size() > 64) throw TooLarge("SignVector::mask: n > 64");
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i] < 0) m |= std::uint64_t{1} << i;
  return m;
}

Vector SignVector::to_vector() const {
  Vector v(static_cast<Eigen::Index>(bits_.size()));
  for (std::size_t i = 0; i < bits_.size(); ++i) v(i) = bits_[i];
  return v;
}

std::string SignVector::to_string() const {
  std::string s;
  for (int b : bits_) s.push_back(b > 0 ? '+' : '-');
  return s;
}

SignVector random_sign_vector(std::size_t n, std::mt19937_64& rng) {
  std::vector<int> bits(n);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 64 == 0) word = rng();
    bits[i] = ((word >> (i % 64)) & 1U) ? -1 : 1;
  }
  return SignVector(std::move(bits));
}

std::size_t hamming_distance(const SignVector& a, const SignVector& b) {
  if (a.size() != b.size()) throw InvalidInput("hamming_distance: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

double bqp_value(const BqpInstance& inst, const SignVector& x) {
  require_same_n(inst, x, "bqp_value");
  const std::size_t n = inst.n();
  double v = inst.objective_constant();
  for (std::size_t i = 0; i < n; ++i) {
    v += 2.0 * inst.c()[i] * x[i];
    for (std::size_t j = i + 1; j < n; ++j) v += 2.0 * inst.coupling(i, j) * x[i] * x[j];
  }
  return v;
}

Vector cone_values(const BqpInstance& inst, const SignVector& x) {
  require_same_n(inst, x, "cone_values");
  const std::vector<double> g = local_fields(inst, x);
  Vector l(static_cast<Eigen::Index>(inst.n()));
  for (std::size_t j = 0; j < inst.n(); ++j) l(j) = -x[j] * g[j];
  return l;
}

ConeMembership in_Px(const BqpInstance& inst, const SignVector& x, double tol) {
  if (!(tol >= 0.0)) throw InvalidInput("in_Px: tol must be >= 0");
  ConeMembership out;
  out.values = cone_values(inst, x);
  out.member = true;
  for (Eigen::Index j = 0; j < out.values.size(); ++j) {
    if (!(out.values(j) > tol)) out.member = false;
    if (std::abs(out.values(j)) <= tol) out.degenerate = true;
  }
  return out;
}

ConeMembership in_Px(const BqpInstance& inst, const SignVector& x) {
  return in_Px(inst, x, inst.degeneracy_tol());
}

WalkResult walk(const BqpInstance& inst, const SignVector& x0, std::size_t max_iters) {
  require_same_n(inst, x0, "walk");
  if (max_iters < 1) throw InvalidInput("walk: max_iters must be >= 1");
  const std::size_t n = inst.n();
  const double tol = inst.degeneracy_tol();

  WalkTrace trace;
  trace.start = x0;
  trace.visited.push_back(x0);
  SignVector x = x0;
  std::vector<double> g = local_fields(inst, x);

  for (;;) {
    std::size_t first_negative = n;
    for (std::size_t j = 0; j < n; ++j) {
      const double l = -x[j] * g[j];
      if (std::abs(l) <= tol) return Degenerate{x, j + 1, l};
      if (l < 0.0 && first_negative == n) first_negative = j;
    }
    if (first_negative == n) break;
    if (trace.flips.size() >= max_iters) {
      trace.final_vertex = x;
      return IterationBudgetExceeded{std::move(trace)};
    }
    flip_update(inst, x, g, first_negative);
    trace.flips.push_back(first_negative + 1);
    trace.visited.push_back(x);
  }
  trace.final_vertex = x;
  return trace;
}

WalkResult walk(const BqpInstance& inst, const SignVector& x0) {
  const std::size_t budget =
      inst.n() >= 23 ? std::size_t{10'000'000} : (std::size_t{1} << inst.n()) + 1;
  return walk(inst, x0, budget);
}

std::variant<MultistartResult, Degenerate> multistart(const BqpInstance& inst,
                                                      std::size_t starts,
                                                      std::uint64_t seed) {
  if (starts < 1) throw InvalidInput("multistart: need at least one start");
  MultistartResult out;
  std::set<SignVector> seen;
  for (std::size_t k = 0; k < starts; ++k) {
    std::mt19937_64 rng(derive_seed(seed, k));
    const SignVector x0 = random_sign_vector(inst.n(), rng);
    WalkResult r = walk(inst, x0);
    if (auto* d = std::get_if<Degenerate>(&r)) return *d;
    if (std::holds_alternative<IterationBudgetExceeded>(r))
      throw NumericalFailure("multistart: walk exceeded its iteration budget");
    WalkTrace& t = std::get<WalkTrace>(r);
    const double v = bqp_value(inst, t.final_vertex);
    if (seen.insert(t.final_vertex).second) out.members.push_back(t.final_vertex);
    if (k == 0 || v < out.p_best) {
      out.p_best = v;
      out.best = t.final_vertex;
    }
    out.traces.push_back(std::move(t));
  }
  return out;
}

BruteForceResult brute_force_min(const BqpInstance& inst) {
  const std::size_t n = inst.n();
  if (n > kBruteForceMaxN)
    throw TooLarge("brute_force_min: n = " + std::to_string(n) + " exceeds " +
                   std::to_string(kBruteForceMaxN));
  SignVector x(n);
  std::vector<double> g = local_fields(inst, x);
  double value = bqp_value(inst, x);
  std::uint64_t best_mask = 0;
  double best = value;
  std::uint64_t runner_mask = 0;
  double runner = std::numeric_limits<double>::infinity();

  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const auto i = static_cast<std::size_t>(std::countr_zero(k));
    value += -4.0 * x[i] * g[i];
    flip_update(inst, x, g, i);
    if ((k & 4095U) == 0) {
      g = local_fields(inst, x);
      value = bqp_value(inst, x);
    }
    const std::uint64_t mask = x.mask();
    if (value < best) {
      runner = best;
      runner_mask = best_mask;
      best = value;
      best_mask = mask;
    } else if (value < runner) {
      runner = value;
      runner_mask = mask;
    }
  }

  BruteForceResult out;
  out.argmin = SignVector::from_mask(n, best_mask);
  out.value = bqp_value(inst, out.argmin);
  if (total > 1) {
    const double second = bqp_value(inst, SignVector::from_mask(n, runner_mask));
    out.unique = second - out.value > 1e-12 * std::max(1.0, std::abs(out.value));
  }
  return out;
}

SymMatrix exactness_matrix(const BqpInstance& inst, const SignVector& x) {
  const Vector l = cone_values(inst, x);
  SymMatrix h(inst.n());
  for (std::size_t i = 0; i < inst.n(); ++i) {
    h.set(i, i, l(i));
    for (std::size_t j = i + 1; j < inst.n(); ++j) h.set(i, j, inst.coupling(i, j));
  }
  return h;
}

bool is_sdp_exact_at(const BqpInstance& inst, const SignVector& x, double tol) {
  return is_positive_definite(exactness_matrix(inst, x), tol).verdict;
}

bool is_sdp_exact_at(const BqpInstance& inst, const SignVector& x) {
  return is_positive_definite(exactness_matrix(inst, x)).verdict;
}

GroupElement::GroupElement(const SignVector& x) : n_(x.size()) {
  diag_.reserve(n_ * (n_ + 1) / 2);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) diag_.push_back(x[i] * x[j]);
  for (std::size_t k = 0; k < n_; ++k) diag_.push_back(x[k]);
}

BqpInstance GroupElement::apply(const BqpInstance& inst) const {
  if (inst.n() != n_) throw InvalidInput("GroupElement::apply: dimension mismatch");
  const std::size_t pairs = n_ * (n_ - 1) / 2;
  std::vector<double> coff(inst.coff());
  std::vector<double> c(inst.c());
  for (std::size_t p = 0; p < pairs; ++p) coff[p] *= diag_[p];
  for (std::size_t k = 0; k < n_; ++k) c[k] *= diag_[pairs + k];
  return BqpInstance(std::move(c), std::move(coff), inst.cdiag());
}

GroupElement GroupElement::compose(const GroupElement& other) const {
  if (other.n_ != n_) throw InvalidInput("GroupElement::compose: dimension mismatch");
  GroupElement g;
  g.n_ = n_;
  g.diag_.resize(diag_.size());
  for (std::size_t k = 0; k < diag_.size(); ++k) g.diag_[k] = diag_[k] * other.diag_[k];
  return g;
}

bool GroupElement::is_identity() const {
  return std::all_of(diag_.begin(), diag_.end(), [](int d) { return d == 1; });
}

GroupElement group_element(const SignVector& x) { return GroupElement(x); }

std::variant<BqpInstance, Disjoint> intersection_witness(const SignVector& x,
                                                         const SignVector& x2) {
  if (hamming_distance(x, x2) == 1) return Disjoint{};
  const std::size_t n = x.size();
  // In l_i(x) the coefficient of c_i is -x_i and that of c_ij is -x_i x_j.
  // Keep a coefficient (with that sign) only where both vertices agree.
  std::vector<double> c(n, 0.0);
  std::vector<double> coff(n * (n - 1) / 2, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] == x2[i]) c[i] = -x[i];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (x[i] * x[j] == x2[i] * x2[j]) coff[pair_index(n, i, j)] = -x[i] * x[j];
  return BqpInstance(std::move(c), std::move(coff));
}

EdgeDirection HypercubeOrientation::direction(std::uint64_t vertex,
                                              std::size_t coordinate) const {
  if (coordinate < 1 || coordinate > n_) throw InvalidInput("direction: bad coordinate");
  return ((out_[vertex] >> (coordinate - 1)) & 1U) ? EdgeDirection::TowardFlip
                                                   : EdgeDirection::TowardStay;
}

double HypercubeOrientation::cone_value(std::uint64_t vertex, std::size_t coordinate) const {
  if (coordinate < 1 || coordinate > n_) throw InvalidInput("cone_value: bad coordinate");
  return values_[vertex * n_ + coordinate - 1];
}

double HypercubeOrientation::label(std::uint64_t vertex, std::size_t coordinate) const {
  if (coordinate < 1 || coordinate > n_) throw InvalidInput("label: bad coordinate");
  const std::uint64_t even =
      std::popcount(vertex) % 2 == 0 ? vertex : vertex ^ (std::uint64_t{1} << (coordinate - 1));
  return cone_value(even, coordinate);
}

std::vector<std::uint64_t> HypercubeOrientation::sinks() const {
  std::vector<std::uint64_t> s;
  for (std::uint64_t v = 0; v < out_.size(); ++v)
    if (out_[v] == 0) s.push_back(v);
  return s;
}

bool HypercubeOrientation::is_acyclic() const {
  const std::size_t count = vertex_count();
  std::vector<int> indegree(count);
  std::vector<std::uint64_t> queue;
  for (std::uint64_t v = 0; v < count; ++v) {
    indegree[v] = static_cast<int>(n_) - std::popcount(out_[v]);
    if (indegree[v] == 0) queue.push_back(v);
  }
  std::size_t processed = 0;
  while (!queue.empty()) {
    const std::uint64_t u = queue.back();
    queue.pop_back();
    ++processed;
    for (std::uint64_t bits = out_[u]; bits != 0; bits &= bits - 1) {
      const std::uint64_t w = u ^ (bits & (~bits + 1));
      if (--indegree[w] == 0) queue.push_back(w);
    }
  }
  return processed == count;
}

std::string HypercubeOrientation::to_dot() const {
  std::string out = "digraph hypercube {\n";
  char buf[64];
  for (std::uint64_t v = 0; v < vertex_count(); ++v)
    out += "  \"" + SignVector::from_mask(n_, v).to_string() + "\";\n";
  for (std::uint64_t v = 0; v < vertex_count(); ++v) {
    for (std::size_t j = 1; j <= n_; ++j) {
      if (direction(v, j) != EdgeDirection::TowardFlip) continue;
      const std::uint64_t w = v ^ (std::uint64_t{1} << (j - 1));
      std::snprintf(buf, sizeof buf, "%.6g", label(v, j));
      out += "  \"" + SignVector::from_mask(n_, v).to_string() + "\" -> \"" +
             SignVector::from_mask(n_, w).to_string() + "\" [label=\"" + buf + "\"];\n";
    }
  }
  out += "}\n";
  return out;
}

std::variant<HypercubeOrientation, Degenerate> orient_hypercube(const BqpInstance& inst) {
  const std::size_t n = inst.n();
  if (n > kOrientMaxN)
    throw TooLarge("orient_hypercube: n = " + std::to_string(n) + " exceeds " +
                   std::to_string(kOrientMaxN));
  const double tol = inst.degeneracy_tol();
  HypercubeOrientation o;
  o.n_ = n;
  o.values_.assign((std::size_t{1} << n) * n, 0.0);
  o.out_.assign(std::size_t{1} << n, 0);

  SignVector x(n);
  std::vector<double> g = local_fields(inst, x);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 0; k < total; ++k) {
    if (k > 0) flip_update(inst, x, g, static_cast<std::size_t>(std::countr_zero(k)));
    const std::uint64_t v = x.mask();
    for (std::size_t j = 0; j < n; ++j) {
      const double l = -x[j] * g[j];
      if (std::abs(l) <= tol) return Degenerate{x, j + 1, l};
      o.values_[v * n + j] = l;
      if (l < 0.0) o.out_[v] |= std::uint64_t{1} << j;
    }
  }
  return o;
}

double induced_inequality(const std::vector<std::size_t>& flip_history, std::size_t j,
                          const BqpInstance& inst) {
  const std::size_t n = inst.n();
  if (j < 1 || j > n) throw InvalidInput("induced_inequality: j out of range");
  std::vector<int> parity(n, 0);
  for (std::size_t i : flip_history) {
    if (i < 1 || i > n) throw InvalidInput("induced_inequality: history index out of range");
    parity[i - 1] ^= 1;
  }
  auto sign = [](int s) { return s ? -1.0 : 1.0; };
  const std::size_t jj = j - 1;
  double v = sign(parity[jj]) * inst.c()[jj];
  for (std::size_t i = 0; i < n; ++i)
    if (i != jj) v += sign(parity[i] ^ parity[jj]) * inst.coupling(i, jj);
  return v;
}

std::vector<SignVector> enumerate_Px_members(const BqpInstance& inst) {
  const std::size_t n = inst.n();
  if (n > kEnumerateMaxN)
    throw TooLarge("enumerate_Px_members: n = " + std::to_string(n) + " exceeds " +
                   std::to_string(kEnumerateMaxN));
  const double tol = inst.degeneracy_tol();
  std::vector<std::uint64_t> masks;
  SignVector x(n);
  std::vector<double> g = local_fields(inst, x);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 0; k < total; ++k) {
    if (k > 0) flip_update(inst, x, g, static_cast<std::size_t>(std::countr_zero(k)));
    bool member = true;
    for (std::size_t j = 0; j < n && member; ++j) member = -x[j] * g[j] > tol;
    if (member) masks.push_back(x.mask());
  }
  std::sort(masks.begin(), masks.end());
  std::vector<SignVector> out;
  for (std::uint64_t m : masks) out.push_back(SignVector::from_mask(n, m));
  return out;
}

}  // namespace sdx::bqp
