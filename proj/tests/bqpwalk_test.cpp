#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <random>
#include <set>

#include "sdx/bqpwalk.hpp"
#include "sdx/errors.hpp"
#include "test_util.hpp"

using namespace sdx;
using namespace sdx::bqp;

namespace {

SignVector sv(const char* s) { return SignVector::parse(s); }

BqpInstance zero_instance(std::size_t n) {
  return BqpInstance(std::vector<double>(n, 0.0), std::vector<double>(n * (n - 1) / 2, 0.0));
}

// Cone values by the definition, from scratch.
std::vector<double> naive_cone(const BqpInstance& inst, const SignVector& x) {
  const auto cm = testutil::dense_coupling(inst);
  std::vector<double> l(inst.n());
  for (std::size_t j = 0; j < inst.n(); ++j) {
    double g = inst.c()[j];
    for (std::size_t i = 0; i < inst.n(); ++i)
      if (i != j) g += cm[i][j] * x[i];
    l[j] = -g / x[j];
  }
  return l;
}

}  // namespace

TEST(Instance, Construction) {
  EXPECT_THROW(BqpInstance({1, 2}, {}), InvalidInput);
  EXPECT_THROW(BqpInstance({}, {}), InvalidInput);
  EXPECT_THROW(BqpInstance({1, 2}, {1}, {1}), InvalidInput);
  EXPECT_THROW(BqpInstance({NAN}, {}), InvalidInput);
  const BqpInstance a({1, 2, 3}, {4, 5, 6}, {1, 1, 1});
  EXPECT_EQ(a.coupling(0, 2), 5.0);
  EXPECT_EQ(a.coupling(2, 1), 6.0);
  EXPECT_EQ(a.coupling(1, 1), 0.0);
  EXPECT_EQ(a.objective_constant(), 3.0);
  EXPECT_EQ(pair_index(3, 1, 2), 2u);
  EXPECT_EQ(pair_index(4, 2, 0), 1u);
}

TEST(SignVectors, ParseAndMask) {
  EXPECT_EQ(sv("+-+").bits(), (std::vector<int>{1, -1, 1}));
  EXPECT_EQ(sv("1,-1").bits(), (std::vector<int>{1, -1}));
  EXPECT_THROW(sv("+0"), InvalidInput);
  EXPECT_THROW(sv(""), InvalidInput);
  EXPECT_THROW(SignVector(std::vector<int>{1, 2}), InvalidInput);
  EXPECT_EQ(sv("-+-").mask(), 0b101u);
  EXPECT_EQ(SignVector::from_mask(3, 0b101), sv("-+-"));
  EXPECT_EQ(sv("-+-").to_string(), "-+-");
  EXPECT_EQ(hamming_distance(sv("++-"), sv("-+-")), 1u);
}

TEST(Value, Examples) {
  const auto inst = testutil::example42();
  EXPECT_DOUBLE_EQ(bqp_value(inst, sv("++")), 14.0);
  EXPECT_DOUBLE_EQ(bqp_value(inst, sv("-+")), -18.0);
  EXPECT_DOUBLE_EQ(bqp_value(zero_instance(3), sv("+-+")), 0.0);
  const BqpInstance with_diag({5, -1}, {3}, {2, 0.5});
  EXPECT_DOUBLE_EQ(bqp_value(with_diag, sv("-+")), -18.0 + 2.5);
}

TEST(Cone, Examples) {
  const auto inst = testutil::example42();
  EXPECT_EQ(cone_values(inst, sv("++")), (Vector(2) << -8, -2).finished());
  EXPECT_EQ(cone_values(inst, sv("-+")), (Vector(2) << 8, 4).finished());
  EXPECT_EQ(cone_values(zero_instance(3), sv("+-+")), Vector::Zero(3));

  EXPECT_TRUE(in_Px(inst, sv("-+")).member);
  EXPECT_FALSE(in_Px(inst, sv("++")).member);
  const auto z = in_Px(zero_instance(2), sv("++"));
  EXPECT_FALSE(z.member);
  EXPECT_TRUE(z.degenerate);
}

TEST(Cone, MatchesDefinition) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 12;
    const auto inst = testutil::random_bqp(n, rng);
    const auto x = testutil::random_signs(n, rng);
    const Vector l = cone_values(inst, x);
    const auto ref = naive_cone(inst, x);
    for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(l(j), ref[j], 1e-12);
  }
}

TEST(Walk, Examples) {
  const auto inst = testutil::example42();
  auto r = walk(inst, sv("++"));
  ASSERT_TRUE(std::holds_alternative<WalkTrace>(r));
  const auto& t = std::get<WalkTrace>(r);
  EXPECT_EQ(t.flips, std::vector<std::size_t>{1});
  EXPECT_EQ(t.final_vertex, sv("-+"));
  EXPECT_EQ(t.iterations(), 1u);
  ASSERT_EQ(t.visited.size(), 2u);

  r = walk(inst, sv("-+"));
  EXPECT_EQ(std::get<WalkTrace>(r).iterations(), 0u);

  r = walk(BqpInstance({1.0}, {}), sv("+"));
  EXPECT_EQ(std::get<WalkTrace>(r).final_vertex, sv("-"));
  EXPECT_EQ(std::get<WalkTrace>(r).iterations(), 1u);

  EXPECT_TRUE(std::holds_alternative<Degenerate>(walk(zero_instance(3), sv("+++"))));
  EXPECT_THROW(walk(inst, sv("+++")), InvalidInput);
}

TEST(Walk, BudgetExceeded) {
  const auto inst = testutil::example42();
  const auto r = walk(inst, sv("++"), 1);
  EXPECT_TRUE(std::holds_alternative<WalkTrace>(r));
  std::mt19937_64 rng(4);
  const auto big = testutil::random_bqp(30, rng);
  const auto cut = walk(big, SignVector(30), 2);
  if (const auto* b = std::get_if<IterationBudgetExceeded>(&cut)) {
    EXPECT_EQ(b->partial.flips.size(), 2u);
  } else {
    EXPECT_LE(std::get<WalkTrace>(cut).iterations(), 2u);
  }
}

TEST(Walk, TraceProperties) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 14;
    const auto inst = testutil::random_bqp(n, rng);
    const auto x0 = testutil::random_signs(n, rng);
    const auto r = walk(inst, x0);
    ASSERT_TRUE(std::holds_alternative<WalkTrace>(r));
    const auto& t = std::get<WalkTrace>(r);
    ASSERT_EQ(t.visited.size(), t.flips.size() + 1);
    EXPECT_EQ(t.visited.front(), x0);
    EXPECT_EQ(t.visited.back(), t.final_vertex);
    std::set<SignVector> seen(t.visited.begin(), t.visited.end());
    EXPECT_EQ(seen.size(), t.visited.size());
    for (std::size_t k = 0; k < t.flips.size(); ++k) {
      const auto& a = t.visited[k];
      const auto& b = t.visited[k + 1];
      EXPECT_EQ(hamming_distance(a, b), 1u);
      EXPECT_NE(a[t.flips[k] - 1], b[t.flips[k] - 1]);
      EXPECT_FALSE(in_Px(inst, a).member);
      // First negative cone value, computed from scratch.
      const auto l = naive_cone(inst, a);
      const auto first = std::find_if(l.begin(), l.end(), [](double v) { return v < 0; });
      EXPECT_EQ(static_cast<std::size_t>(first - l.begin()) + 1, t.flips[k]);
    }
    EXPECT_TRUE(in_Px(inst, t.final_vertex).member);
  }
}

TEST(Multistart, Examples) {
  const auto inst = testutil::example42();
  for (std::size_t M : {1, 3, 8}) {
    const auto r = multistart(inst, M, 42);
    ASSERT_TRUE(std::holds_alternative<MultistartResult>(r));
    const auto& m = std::get<MultistartResult>(r);
    EXPECT_EQ(m.best, sv("-+"));
    EXPECT_DOUBLE_EQ(m.p_best, -18.0);
    EXPECT_EQ(m.members.size(), 1u);
    EXPECT_EQ(m.traces.size(), M);
  }
  EXPECT_THROW(multistart(inst, 0, 1), InvalidInput);
}

TEST(Multistart, BestBeatsEveryRun) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = testutil::random_bqp(10, rng);
    const auto r = multistart(inst, 4, static_cast<std::uint64_t>(trial));
    const auto& m = std::get<MultistartResult>(r);
    for (const auto& t : m.traces) EXPECT_LE(m.p_best, bqp_value(inst, t.final_vertex));
    // M = 1 reproduces the first start alone.
    const auto one = std::get<MultistartResult>(multistart(inst, 1, static_cast<std::uint64_t>(trial)));
    EXPECT_EQ(one.best, m.traces.front().final_vertex);
  }
}

TEST(BruteForce, Examples) {
  const auto e = brute_force_min(testutil::example42());
  EXPECT_EQ(e.argmin, sv("-+"));
  EXPECT_DOUBLE_EQ(e.value, -18.0);
  EXPECT_TRUE(e.unique);

  const auto z = brute_force_min(zero_instance(3));
  EXPECT_DOUBLE_EQ(z.value, 0.0);
  EXPECT_FALSE(z.unique);

  const auto one = brute_force_min(BqpInstance({1.0}, {}));
  EXPECT_EQ(one.argmin, sv("-"));
  EXPECT_DOUBLE_EQ(one.value, -2.0);
  EXPECT_TRUE(one.unique);

  std::mt19937_64 rng(1);
  EXPECT_THROW(brute_force_min(testutil::random_bqp(kBruteForceMaxN + 1, rng)), TooLarge);
}

TEST(BruteForce, MatchesNaiveEnumeration) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 14;
    const auto inst = testutil::random_bqp(n, rng);
    const auto bf = brute_force_min(inst);
    const auto ref = testutil::naive_min(inst);
    EXPECT_NEAR(bf.value, ref.value, 1e-9 * (1.0 + std::abs(ref.value)));
    EXPECT_EQ(bf.argmin.bits(), ref.argmin);
  }
}

TEST(Exactness, Examples) {
  const auto inst = testutil::example42();
  const SymMatrix h = exactness_matrix(inst, sv("-+"));
  EXPECT_EQ(h.dense(), (Matrix(2, 2) << 8, 3, 3, 4).finished());
  // H(1,1) = [[-c12 - c1, c12], [c12, -c12 - c2]].
  EXPECT_EQ(exactness_matrix(inst, sv("++")).dense(), (Matrix(2, 2) << -8, 3, 3, -2).finished());
  EXPECT_EQ(exactness_matrix(zero_instance(2), sv("++")), SymMatrix(2));
  EXPECT_TRUE(is_sdp_exact_at(inst, sv("-+")));
  EXPECT_FALSE(is_sdp_exact_at(inst, sv("++")));
  EXPECT_FALSE(is_sdp_exact_at(zero_instance(3), sv("-++")));
}

TEST(Group, Examples) {
  EXPECT_TRUE(group_element(SignVector(4)).is_identity());
  const auto g = group_element(sv("-+"));
  EXPECT_EQ(g.diagonal(), (std::vector<int>{-1, -1, 1}));
  const auto moved = g.apply(testutil::example42());
  EXPECT_EQ(moved.coff(), std::vector<double>{-3});
  EXPECT_EQ(moved.c(), (std::vector<double>{-5, -1}));

  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 7;
    const auto x = testutil::random_signs(n, rng);
    const auto y = testutil::random_signs(n, rng);
    EXPECT_TRUE(group_element(x).compose(group_element(x)).is_identity());
    // g(x) g(y) = g(xy): the map x -> g(x) is a homomorphism.
    std::vector<int> xy(n);
    for (std::size_t i = 0; i < n; ++i) xy[i] = x[i] * y[i];
    EXPECT_EQ(group_element(x).compose(group_element(y)), group_element(SignVector(xy)));
  }
}

TEST(Group, ExactnessIsEquivariant) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const auto inst = testutil::random_bqp(n, rng);
    for (std::uint64_t mask = 0; mask < (1U << n); ++mask) {
      const auto x = SignVector::from_mask(n, mask);
      const auto moved = group_element(x).apply(inst);
      EXPECT_EQ(is_sdp_exact_at(inst, x), is_sdp_exact_at(moved, SignVector(n)));
      const Vector a = cone_values(inst, x);
      const Vector b = cone_values(moved, SignVector(n));
      EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Witness, Examples) {
  const auto w = intersection_witness(sv("++"), sv("--"));
  ASSERT_TRUE(std::holds_alternative<BqpInstance>(w));
  const auto& inst = std::get<BqpInstance>(w);
  EXPECT_EQ(inst.c(), (std::vector<double>{0, 0}));
  EXPECT_EQ(inst.coff(), std::vector<double>{-1});
  EXPECT_EQ(cone_values(inst, sv("++")), Vector::Ones(2));
  EXPECT_EQ(cone_values(inst, sv("--")), Vector::Ones(2));

  const auto self = intersection_witness(sv("+-+"), sv("+-+"));
  ASSERT_TRUE(std::holds_alternative<BqpInstance>(self));
  EXPECT_TRUE(in_Px(std::get<BqpInstance>(self), sv("+-+")).member);

  EXPECT_TRUE(std::holds_alternative<Disjoint>(intersection_witness(sv("++-"), sv("+--"))));
}

TEST(Witness, MembersIncludeBothEnds) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 6;
    const auto x = testutil::random_signs(n, rng);
    auto y = x;
    y.flip(0);
    y.flip(1);
    const auto w = intersection_witness(x, y);
    ASSERT_TRUE(std::holds_alternative<BqpInstance>(w));
    const auto members = enumerate_Px_members(std::get<BqpInstance>(w));
    EXPECT_NE(std::find(members.begin(), members.end(), x), members.end());
    EXPECT_NE(std::find(members.begin(), members.end(), y), members.end());
  }
}

TEST(Orientation, Example42) {
  const auto r = orient_hypercube(testutil::example42());
  ASSERT_TRUE(std::holds_alternative<HypercubeOrientation>(r));
  const auto& g = std::get<HypercubeOrientation>(r);
  EXPECT_EQ(g.vertex_count(), 4u);
  EXPECT_EQ(g.edge_count(), 4u);
  EXPECT_EQ(g.sinks(), std::vector<std::uint64_t>{sv("-+").mask()});
  EXPECT_TRUE(g.is_acyclic());
  std::multiset<double> labels;
  for (std::uint64_t v = 0; v < 4; ++v)
    for (std::size_t j = 1; j <= 2; ++j)
      if (std::popcount(v) % 2 == 0) labels.insert(g.label(v, j));
  EXPECT_EQ(labels, (std::multiset<double>{-8, -4, -2, 2}));
  const std::string dot = g.to_dot();
  EXPECT_NE(dot.find("\"++\" -> \"-+\""), std::string::npos);
  EXPECT_NE(dot.find("\"--\" -> \"-+\""), std::string::npos);
}

TEST(Orientation, SmallCases) {
  const auto r = orient_hypercube(BqpInstance({1.0}, {}));
  const auto& g = std::get<HypercubeOrientation>(r);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(g.direction(0, 1), EdgeDirection::TowardFlip);
  EXPECT_EQ(g.direction(1, 1), EdgeDirection::TowardStay);
  EXPECT_EQ(g.sinks(), std::vector<std::uint64_t>{1});

  EXPECT_TRUE(std::holds_alternative<Degenerate>(orient_hypercube(zero_instance(2))));
  std::mt19937_64 rng(2);
  EXPECT_THROW(orient_hypercube(testutil::random_bqp(kOrientMaxN + 1, rng)), TooLarge);
}

TEST(Orientation, RandomInstancesAreConsistent) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + trial % 8;
    const auto inst = testutil::random_bqp(n, rng);
    const auto g = std::get<HypercubeOrientation>(orient_hypercube(inst));
    EXPECT_TRUE(g.is_acyclic());
    const auto sinks = g.sinks();
    EXPECT_GE(sinks.size(), 1u);
    std::size_t directed = 0;
    for (std::uint64_t v = 0; v < g.vertex_count(); ++v) {
      for (std::size_t j = 1; j <= n; ++j) {
        const std::uint64_t w = v ^ (std::uint64_t{1} << (j - 1));
        // Exactly one endpoint owns each edge.
        EXPECT_NE(g.direction(v, j), g.direction(w, j));
        EXPECT_EQ(g.label(v, j), g.label(w, j));
        directed += g.direction(v, j) == EdgeDirection::TowardFlip;
      }
    }
    EXPECT_EQ(directed, g.edge_count());
    // Sinks are exactly the cone members.
    const auto members = enumerate_Px_members(inst);
    std::vector<std::uint64_t> member_masks;
    for (const auto& m : members) member_masks.push_back(m.mask());
    EXPECT_EQ(member_masks, sinks);
    // The walk takes the lowest out-edge and ends at a sink.
    const auto x0 = testutil::random_signs(n, rng);
    const auto t = std::get<WalkTrace>(walk(inst, x0));
    for (std::size_t k = 0; k < t.flips.size(); ++k) {
      const std::uint64_t out = g.out_mask(t.visited[k].mask());
      EXPECT_EQ(static_cast<std::size_t>(std::countr_zero(out)) + 1, t.flips[k]);
    }
    EXPECT_NE(std::find(sinks.begin(), sinks.end(), t.final_vertex.mask()), sinks.end());
  }
}

TEST(Induced, Examples) {
  const auto inst = testutil::example42();
  EXPECT_DOUBLE_EQ(induced_inequality({}, 1, inst), 5.0 + 3.0);
  EXPECT_DOUBLE_EQ(induced_inequality({}, 2, inst), -1.0 + 3.0);
  EXPECT_DOUBLE_EQ(induced_inequality({1}, 1, inst), -8.0);
  EXPECT_DOUBLE_EQ(induced_inequality({1, 1}, 2, inst), induced_inequality({}, 2, inst));
  EXPECT_THROW(induced_inequality({3}, 1, inst), InvalidInput);
  EXPECT_THROW(induced_inequality({}, 0, inst), InvalidInput);
}

TEST(Induced, EqualsNegatedConeValue) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 10;
    const auto inst = testutil::random_bqp(n, rng);
    std::uniform_int_distribution<std::size_t> coord(1, n);
    std::vector<std::size_t> hist(coord(rng) % (3 * n + 1));
    SignVector x(n);
    for (auto& h : hist) {
      h = coord(rng);
      x.flip(h - 1);
    }
    const std::size_t j = coord(rng);
    EXPECT_NEAR(induced_inequality(hist, j, inst), -cone_values(inst, x)(j - 1), 1e-12);
  }
}

TEST(Enumerate, Examples) {
  EXPECT_EQ(enumerate_Px_members(testutil::example42()), std::vector<SignVector>{sv("-+")});
  EXPECT_TRUE(enumerate_Px_members(zero_instance(3)).empty());
  std::mt19937_64 rng(3);
  EXPECT_THROW(enumerate_Px_members(testutil::random_bqp(kEnumerateMaxN + 1, rng)), TooLarge);
}

TEST(Enumerate, UniqueMinimizerIsAMember) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 12;
    const auto inst = testutil::random_bqp(n, rng);
    const auto bf = brute_force_min(inst);
    if (!bf.unique) continue;
    EXPECT_TRUE(in_Px(inst, bf.argmin).member);
  }
}
