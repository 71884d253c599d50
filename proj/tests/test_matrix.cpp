#include <gtest/gtest.h>

#include "fcgrow/matrix.hpp"
#include "fcgrow/parse.hpp"
#include "support/random_deps.hpp"
#include "support/random_lare.hpp"

using namespace fcgrow;
using namespace fcgrow::testing;

namespace {

constexpr D0 O = D0::Zero, I1 = D0::One, P = D0::OnePlus, T2 = D0::Two, T3 = D0::Three;
const D0 kAll[] = {O, I1, P, T2, T3};

DepMatrix random_matrix(Rng& rng, int dim) {
  DepMatrix m(dim);
  for (int i = 1; i <= dim; ++i)
    for (int j = 1; j <= dim; ++j) m.set(i, j, kAll[uniform(rng, 0, 4)]);
  return m;
}

// Every matrix with entries drawn from the unary facts, filtered by the
// admissibility and pairing conditions, then reduced to its maxima.
MatrixSet som_reference(const DepSet& s) {
  const int dim = s.n() + 1;
  std::vector<std::vector<D0>> options(dim * dim);
  for (int i = 1; i <= dim; ++i)
    for (int j = 1; j <= dim; ++j) {
      auto& o = options[(i - 1) * dim + (j - 1)];
      o.push_back(O);
      for (auto t : kTypes)
        if (s.contains_unary(i, t, j)) o.push_back(to_d0(t));
    }
  std::vector<DepMatrix> all;
  DepMatrix a(dim);
  auto m2 = [&](const DepMatrix& m) {
    for (int i = 1; i <= dim; ++i)
      for (int k = 1; k <= dim; ++k)
        for (int j = 1; j <= dim; ++j)
          for (int l = 1; l <= dim; ++l) {
            if (!one_like(m.at(i, k)) || !one_like(m.at(j, l))) continue;
            if (i == j && k == l) continue;
            if (!s.contains_binary(i, j, k, l) && !s.contains_binary(j, i, l, k)) return false;
          }
    return true;
  };
  auto rec = [&](auto& self, int c) -> void {
    if (c == dim * dim) {
      if (a.admissible() && m2(a)) all.push_back(a);
      return;
    }
    for (D0 v : options[c]) {
      a.set(c / dim + 1, c % dim + 1, v);
      self(self, c + 1);
    }
  };
  rec(rec, 0);
  MatrixSet out;
  for (auto& x : all) {
    bool dominated = std::any_of(all.begin(), all.end(),
                                 [&](const DepMatrix& y) { return x != y && x <= y; });
    if (!dominated) out.insert(x);
  }
  return out;
}

}  // namespace

TEST(PlusType, Table) {
  EXPECT_EQ(plus_type(P, P), T2);
  for (D0 d : kAll) {
    EXPECT_EQ(plus_type(O, d), d);
    EXPECT_EQ(plus_type(d, O), d);
  }
  EXPECT_EQ(plus_type(T2, T3), T3);
  EXPECT_EQ(plus_type(I1, I1), I1);
  EXPECT_EQ(plus_type(I1, P), P);
  EXPECT_EQ(plus_type(P, T2), T2);
}

TEST(PlusType, CommutativeAndAssociative) {
  for (D0 a : kAll)
    for (D0 b : kAll) {
      EXPECT_EQ(plus_type(a, b), plus_type(b, a));
      for (D0 c : kAll) EXPECT_EQ(plus_type(plus_type(a, b), c), plus_type(a, plus_type(b, c)));
    }
}

TEST(DepMatrix, Admissibility) {
  EXPECT_TRUE(DepMatrix::identity(4).admissible());
  auto corner_two = DepMatrix::identity(3);
  corner_two.set(3, 3, T2);
  EXPECT_FALSE(corner_two.admissible());
  // a 1 entry must be alone in its column
  auto shared = DepMatrix::from_rows({{I1, O, O}, {P, O, O}, {O, O, I1}});
  EXPECT_FALSE(shared.admissible());
  auto additive = DepMatrix::from_rows({{P, O, O}, {P, O, O}, {O, O, I1}});
  EXPECT_TRUE(additive.admissible());
  EXPECT_TRUE(DepMatrix::from_rows({{T2, O}, {O, I1}}).admissible());
}

TEST(DepMatrix, ShapeErrors) {
  EXPECT_THROW(DepMatrix(0), std::invalid_argument);
  EXPECT_THROW(DepMatrix::from_rows({{I1, O}, {O}}), std::invalid_argument);
  EXPECT_THROW(DepMatrix(2).at(3, 1), std::out_of_range);
  EXPECT_THROW(mat_mul(DepMatrix(2), DepMatrix(3)), std::invalid_argument);
  EXPECT_THROW((void)(DepMatrix(2) <= DepMatrix(3)), std::invalid_argument);
}

TEST(MatMul, IdentityLaws) {
  Rng rng(11);
  for (int k = 0; k < 200; ++k) {
    int dim = uniform(rng, 1, 5);
    auto a = random_matrix(rng, dim);
    EXPECT_EQ(mat_mul(DepMatrix::identity(dim), a), a);
    EXPECT_EQ(mat_mul(a, DepMatrix::identity(dim)), a);
  }
}

TEST(MatMul, ExampleMatricesTimesIdentity) {
  auto first = DepMatrix::from_rows({{I1, O, T2, O}, {O, O, O, O}, {O, I1, O, O}, {O, O, O, I1}});
  auto second = DepMatrix::identity(4);
  EXPECT_EQ(mat_mul(first, second), first);
  EXPECT_EQ(mat_mul(second, first), first);
}

TEST(MatMul, TwoAdditivePathsGiveTwo) {
  // x1 reaches x3 through x2 and through x3 itself, both additively
  auto a = DepMatrix::from_rows({{O, P, P}, {O, O, O}, {O, O, O}});
  auto b = DepMatrix::from_rows({{O, O, O}, {O, O, P}, {O, O, P}});
  EXPECT_EQ(mat_mul(a, b).at(1, 3), T2);
  auto c = DepMatrix::from_rows({{O, P, O}, {O, O, O}, {O, O, O}});
  EXPECT_EQ(mat_mul(c, b).at(1, 3), P);
}

TEST(MatMul, IsNotAssociative) {
  // 1+ . (1 + 1) = 1+ but 1+ . 1 + 1+ . 1 = 2: the product does not distribute.
  auto d = DepMatrix::from_rows({{P, O}, {O, O}});
  auto e = DepMatrix::from_rows({{I1, I1}, {O, O}});
  auto f = DepMatrix::from_rows({{I1, O}, {I1, O}});
  EXPECT_EQ(mat_mul(mat_mul(d, e), f).at(1, 1), T2);
  EXPECT_EQ(mat_mul(d, mat_mul(e, f)).at(1, 1), P);
}

TEST(MatMul, Monotone) {
  Rng rng(12);
  for (int k = 0; k < 500; ++k) {
    int dim = uniform(rng, 1, 4);
    auto a = random_matrix(rng, dim), b = random_matrix(rng, dim);
    auto a2 = a;
    for (int i = 1; i <= dim; ++i)
      for (int j = 1; j <= dim; ++j)
        if (coin(rng, 0.3)) a2.set(i, j, std::max(a.at(i, j), kAll[uniform(rng, 0, 4)]));
    ASSERT_TRUE(a <= a2);
    EXPECT_TRUE(mat_mul(a, b) <= mat_mul(a2, b));
    EXPECT_TRUE(mat_mul(b, a) <= mat_mul(b, a2));
  }
}

TEST(SetLe, Basics) {
  Rng rng(13);
  MatrixSet s{DepMatrix::identity(3), random_matrix(rng, 3)};
  EXPECT_TRUE(set_le(s, s));
  EXPECT_TRUE(set_le({}, s));
  EXPECT_FALSE(set_le(s, {}));
  auto big = DepMatrix(3);
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) big.set(i, j, T3);
  EXPECT_TRUE(set_le(s, {big}));
  EXPECT_FALSE(set_le({big}, s));
}

TEST(Som, ChooseExampleHasThePrintedMatrices) {
  DepSet s = analyze_lare(parse_lare("x2:=x3 x3:=x1+x1 | skip"), 3);
  MatrixSet m = som(s);
  auto first = DepMatrix::from_rows({{I1, O, T2, O}, {O, O, O, O}, {O, I1, O, O}, {O, O, O, I1}});
  EXPECT_TRUE(m.count(first)) << to_string(first);
  EXPECT_TRUE(m.count(DepMatrix::identity(4)));
  for (auto& a : m) EXPECT_FALSE(a.at(3, 2) != O && a.at(3, 3) != O) << to_string(a);
}

TEST(Som, PairingConditionExcludesUnbackedPairs) {
  DepSet s(3, {Dep::unary(3, DepType::One, 2), Dep::unary(3, DepType::One, 3),
               Dep::unary(4, DepType::One, 4)});
  s = DepSet(3, [&] {
    auto v = s.deps();
    v.push_back(Dep::binary(3, 4, 2, 4));
    v.push_back(Dep::binary(4, 3, 4, 2));
    v.push_back(Dep::binary(3, 4, 3, 4));
    v.push_back(Dep::binary(4, 3, 4, 3));
    return v;
  }());
  MatrixSet m = som(s);
  EXPECT_EQ(m.size(), 2u);
  for (auto& a : m) EXPECT_FALSE(a.at(3, 2) != O && a.at(3, 3) != O) << to_string(a);
  auto with_pair = set_union(s, DepSet(3, {Dep::binary(3, 3, 2, 3), Dep::binary(3, 3, 3, 2)}));
  auto both = DepMatrix(4);
  both.set(3, 2, I1);
  both.set(3, 3, I1);
  both.set(4, 4, I1);
  EXPECT_EQ(som(with_pair), MatrixSet{both});
}

TEST(Som, IdentitySetGivesIdentity) {
  for (int n = 1; n <= kMaxSomVars; ++n)
    EXPECT_EQ(som(identity_set(n)), MatrixSet{DepMatrix::identity(n + 1)});
}

TEST(Som, MissingCornerGivesNothing) {
  EXPECT_TRUE(som(DepSet(2, {Dep::unary(1, DepType::One, 1)})).empty());
}

TEST(Som, RejectsLargeUniverses) {
  EXPECT_THROW(som(identity_set(kMaxSomVars + 1)), std::invalid_argument);
}

TEST(Som, MatchesBruteForceAndIsAdmissible) {
  Rng rng(14);
  int nonempty = 0;
  for (int k = 0; k < 300; ++k) {
    int n = k < 200 ? uniform(rng, 1, 2) : 3;
    DepSet s = set_union(random_depset(rng, n, n == 3 ? 0.1 : 0.25, 0.5),
                         coin(rng, 0.7) ? identity_set(n) : DepSet(n));
    MatrixSet got = som(s);
    for (auto& a : got) {
      EXPECT_TRUE(a.admissible());
      for (int i = 1; i <= n + 1; ++i)
        for (int j = 1; j <= n + 1; ++j)
          if (a.at(i, j) != O) {
            EXPECT_TRUE(s.contains_unary(i, to_dep_type(a.at(i, j)), j));
          }
    }
    EXPECT_EQ(got, som_reference(s)) << to_string(s);
    nonempty += !got.empty();
  }
  EXPECT_GT(nonempty, 150);
}

TEST(Som, MonotoneInTheFactSet) {
  Rng rng(15);
  for (int k = 0; k < 300; ++k) {
    int n = uniform(rng, 1, 3);
    DepSet s = set_union(random_depset(rng, n, 0.2, 0.5), identity_set(n));
    DepSet t = set_union(s, random_depset(rng, n, 0.1, 0.5));
    EXPECT_TRUE(set_le(som(s), som(t))) << to_string(s) << "\n" << to_string(t);
  }
}

TEST(Lemma11, SkipPairHolds) {
  auto r = lemma11_check(parse_lare("skip"), parse_lare("skip"), 2);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.checked, 8);
}

TEST(Lemma11, ChooseExampleAgainstSkip) {
  auto r = lemma11_check(parse_lare("x2:=x3 x3:=x1+x1 | skip"), parse_lare("skip"), 3);
  EXPECT_TRUE(r.ok()) << (r.ok() ? "" : r.violations[0].law + "\n" + r.violations[0].detail);
}

TEST(Lemma11, AtomicPairsHold) {
  Rng rng(16);
  for (int k = 0; k < 200; ++k) {
    int n = uniform(rng, 1, 3);
    auto r = lemma11_check(lare::atom(random_core_instr(rng, n)),
                           lare::atom(random_core_instr(rng, n)), n);
    ASSERT_TRUE(r.ok()) << r.violations[0].law << "\n" << r.violations[0].detail;
  }
}

TEST(Lemma11, RandomExpressionPairsHold) {
  Rng rng(17);
  for (int k = 0; k < 100; ++k) {
    int n = uniform(rng, 1, 3);
    Lare a = random_wf_lare(rng, n, 2), b = random_wf_lare(rng, n, 2);
    auto r = lemma11_check(a, b, n);
    ASSERT_TRUE(r.ok()) << print_lare(a) << " / " << print_lare(b) << "\n"
                        << r.violations[0].law << "\n"
                        << r.violations[0].detail;
  }
}

TEST(Lemma11, RejectsLargeN) {
  EXPECT_THROW(lemma11_check(parse_lare("skip"), parse_lare("skip"), 4), std::invalid_argument);
}

TEST(Srg, X5LoopHasExpectedArcs) {
  // The star of the loop body over x1..x4, with x5 the iteration counter.
  detail::LareAnalyzer an{Universe{4, false}, {}};
  Srg g = build_srg(an.run(parse_lare("(x3:=x1 x4:=x2 | x3:=x2 x4:=x1 | x1:=x3+x4)*")));
  const std::map<std::pair<int, int>, D0> expected = {
      {{1, 1}, P}, {{1, 3}, P}, {{1, 4}, P}, {{2, 2}, I1}, {{2, 1}, T2}, {{2, 3}, T2},
      {{2, 4}, T2}, {{3, 3}, P}, {{3, 1}, P}, {{4, 4}, P}, {{4, 1}, P}, {{5, 5}, I1},
  };
  for (auto& [ij, v] : expected) {
    ASSERT_TRUE(g.arcs.count(ij)) << ij.first << "->" << ij.second;
    EXPECT_EQ(g.arcs.at(ij), v) << ij.first << "->" << ij.second;
  }
  // arcs within the cycle {1,3,4} stay additive
  for (int i : {1, 3, 4})
    for (int j : {1, 3, 4})
      if (g.arcs.count({i, j})) {
        EXPECT_LE(g.arcs.at({i, j}), P);
      }
}

TEST(Srg, IdentityAndEmpty) {
  Srg g = build_srg(identity_set(3));
  EXPECT_EQ(g.nodes, 4);
  EXPECT_EQ(g.arcs.size(), 4u);
  for (auto& [ij, v] : g.arcs) {
    EXPECT_EQ(ij.first, ij.second);
    EXPECT_EQ(v, I1);
  }
  EXPECT_TRUE(build_srg(DepSet(3)).arcs.empty());
}

TEST(Srg, KeepsStrongestTypeAndEmitsDot) {
  DepSet s(2, {Dep::unary(1, DepType::OnePlus, 2), Dep::unary(1, DepType::Three, 2),
               Dep::unary(2, DepType::OnePlus, 2)});
  Srg g = build_srg(s);
  EXPECT_EQ(g.arcs.at({1, 2}), T3);
  std::string dot = g.to_dot();
  EXPECT_NE(dot.find("x1 -> x2 [label=\"3\"]"), std::string::npos);
  EXPECT_NE(dot.find("x2 -> x2 [label=\"1+\"]"), std::string::npos);
  EXPECT_EQ(dot.rfind("digraph srg {", 0), 0u);
}
