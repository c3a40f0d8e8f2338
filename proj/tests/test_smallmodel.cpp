#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "testutil.hpp"

#include <auf1/smallmodel.hpp>

#include <set>

using namespace auf1;

static NormalForm single_ex_nf(const std::string& matrix_text) {
  Signature s;
  s.add("R", 2);
  NormalForm nf;
  nf.sig = s;
  nf.existential.push_back(
      {{{Quant::Forall, "x"}, {Quant::Exists, "y"}},
       parse_formula(matrix_text, s)});
  return nf;
}

TEST_CASE("hall_matching") {
  // Perfect matching on a 2x2 crown.
  BipartiteGraph g;
  g.n_left = 2;
  g.n_right = 2;
  g.adj = {{0, 1}, {0, 1}};
  MatchingResult m = hall_matching(g);
  CHECK(m.success);
  CHECK(m.match_left[0] != m.match_left[1]);

  // Hall violator: two lefts sharing a single right.
  BipartiteGraph h;
  h.n_left = 2;
  h.n_right = 2;
  h.adj = {{0}, {0}};
  MatchingResult mh = hall_matching(h);
  CHECK(!mh.success);
  REQUIRE(mh.witness.size() == 2);  // W = {0,1}, N(W) = {0}
  CHECK(mh.witness == std::vector<int>{0, 1});

  // The K=2 containment graph: 4 singletons of [4] into 6 pairs.
  auto lefts = detail::subsets_of_size(4, 1);
  auto rights = detail::subsets_of_size(4, 2);
  BipartiteGraph c;
  c.n_left = (int)lefts.size();
  c.n_right = (int)rights.size();
  c.adj.resize(c.n_left);
  for (int i = 0; i < c.n_left; ++i)
    for (int j = 0; j < c.n_right; ++j)
      if (std::includes(rights[j].begin(), rights[j].end(), lefts[i].begin(),
                        lefts[i].end()))
        c.adj[i].push_back(j);
  MatchingResult mc = hall_matching(c);
  CHECK(mc.success);
}

TEST_CASE("build_ext invariants for K = 1..6") {
  // K = 1: only the empty-set convention.
  ExtensionFunction e1 = build_ext(1);
  CHECK(e1.table.size() == 1);
  CHECK(e1.apply({}) == std::vector<int>{1});
  CHECK_THROWS_AS(build_ext(0), SmallModelError);

  for (int K = 2; K <= 6; ++K) {
    ExtensionFunction ext = build_ext(K);
    CHECK(ext.apply({}) == std::vector<int>{1});
    for (int l = 1; l < K; ++l) {
      std::set<std::vector<int>> images;
      for (const auto& S : detail::subsets_of_size(2 * K, l)) {
        const std::vector<int>& E = ext.apply(S);
        // ext(S) is a strict superset of S with exactly one extra element.
        CHECK(E.size() == S.size() + 1);
        CHECK(std::includes(E.begin(), E.end(), S.begin(), S.end()));
        for (int v : E) {
          CHECK(v >= 1);
          CHECK(v <= 2 * K);
        }
        // Injectivity per level (a matching: no two sets share an image).
        CHECK(images.insert(E).second);
      }
    }
    // Exactly the subsets of sizes 0..K-1 are in the table.
    size_t expect = 1;
    for (int l = 1; l < K; ++l)
      expect += detail::subsets_of_size(2 * K, l).size();
    CHECK(ext.table.size() == expect);
  }
  ExtensionFunction e3 = build_ext(3);
  CHECK_THROWS_AS(e3.apply({1, 2, 3}), SmallModelError);  // size K not mapped
}

TEST_CASE("build_small_domain arithmetic") {
  // forall x exists y R(x,y) over the 3-cycle: K=2, m_ex=1, T=1, L=1.
  NormalForm nf = single_ex_nf("(R x y)");
  Structure cyc(nf.sig, 3);
  cyc.set("R", {0, 1}, true);
  cyc.set("R", {1, 2}, true);
  cyc.set("R", {2, 0}, true);
  SmallDomain d = build_small_domain(cyc, nf);
  CHECK(d.K == 2);
  CHECK(d.m_ex == 1);
  CHECK(d.T == 1);
  CHECK(d.L == 1);  // every cycle element has the same 1-type
  CHECK(d.size() == 4);
  CHECK(d.index(1, 1, 1, 1) == 0);
  CHECK(d.index(2, 1, 1, 1) == 1);
  CHECK(d.layer_of(0) == 1);
  CHECK(d.layer_of(3) == 4);

  // K=3, m_ex=2, L=2 gives |B| = 2*3 * 2 * 2^2 * 2 = 96.
  Signature s3;
  s3.add("P", 1);
  s3.add("R", 3);
  NormalForm nf3;
  nf3.sig = s3;
  nf3.existential.push_back(
      {{{Quant::Forall, "x"}, {Quant::Exists, "y"}, {Quant::Exists, "z"}},
       parse_formula("(R x y z)", s3)});
  nf3.existential.push_back(
      {{{Quant::Exists, "x"}}, parse_formula("(P x)", s3)});
  Structure m3(s3, 2);
  m3.set("P", {0}, true);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) m3.set("R", {a, b, c}, true);
  SmallDomain d3 = build_small_domain(m3, nf3);
  CHECK(d3.K == 3);
  CHECK(d3.m_ex == 2);
  CHECK(d3.T == 4);
  CHECK(d3.L == 2);  // P splits the two elements into distinct 1-types
  CHECK(d3.size() == 96);
  // Flat index round-trips through the coordinate accessors.
  for (int ss = 1; ss <= 2 * d3.K; ++ss)
    for (int i = 1; i <= d3.m_ex; ++i)
      for (int t = 1; t <= d3.T; ++t)
        for (int l = 1; l <= d3.L; ++l) {
          int b = d3.index(ss, i, t, l);
          CHECK(d3.layer_of(b) == ss);
          CHECK(d3.type_index_of(b) == l);
        }

  // K=1 (prefix a single exists): T = 0^0 = 1 by convention.
  NormalForm nf1;
  nf1.sig = nf.sig;
  nf1.existential.push_back(
      {{{Quant::Exists, "y"}}, parse_formula("(R y y)", nf.sig)});
  Structure loop(nf.sig, 1);
  loop.set("R", {0, 0}, true);
  SmallDomain d1 = build_small_domain(loop, nf1);
  CHECK(d1.K == 1);
  CHECK(d1.T == 1);
  CHECK(d1.size() == 2);

  // Purely universal normal forms are rejected with the substructure hint.
  NormalForm univ;
  univ.sig = nf.sig;
  univ.universal.push_back({{"x"}, parse_formula("(not (R x x))", nf.sig)});
  CHECK_THROWS_AS(build_small_domain(loop, univ), SmallModelError);
}

TEST_CASE("shrink: asymmetric cycle") {
  // forall x exists y (R(x,y) and not R(y,x)); the 3-cycle is a model.
  NormalForm nf = single_ex_nf("(and (R x y) (not (R y x)))");
  Structure cyc(nf.sig, 3);
  cyc.set("R", {0, 1}, true);
  cyc.set("R", {1, 2}, true);
  cyc.set("R", {2, 0}, true);
  REQUIRE(evaluate(cyc, as_formula(nf), {}));
  ShrinkResult r = shrink(cyc, nf);
  CHECK(r.domain.size() == 4);
  CHECK(r.model.size == 4);
  CHECK(verify_forest(r.forest, nf).passed());
  CHECK(evaluate(r.model, as_formula(nf), {}));
}

TEST_CASE("shrink: size-1 loop still yields the full product domain") {
  NormalForm nf = single_ex_nf("(R x y)");
  Structure loop(nf.sig, 1);
  loop.set("R", {0, 0}, true);
  ShrinkResult r = shrink(loop, nf);
  CHECK(r.domain.size() == 4);  // 2K * m_ex * T * L = 4*1*1*1
  CHECK(r.model.size == 4);
  CHECK(evaluate(r.model, as_formula(nf), {}));

  // The source must satisfy the normal form.
  Structure empty(nf.sig, 1);
  CHECK_THROWS_AS(shrink(empty, nf), SmallModelError);

  // Equality in a matrix is rejected.
  Signature se;
  se.equality_allowed = true;
  se.add("R", 2);
  NormalForm nfe;
  nfe.sig = se;
  nfe.existential.push_back(
      {{{Quant::Forall, "x"}, {Quant::Exists, "y"}},
       parse_formula("(and (R x y) (not (= x y)))", se)});
  Structure two(se, 2);
  two.set("R", {0, 1}, true);
  two.set("R", {1, 0}, true);
  CHECK_THROWS_AS(shrink(two, nfe), SmallModelError);
}

TEST_CASE("shrink across the corpus") {
  int done = 0;
  for (const auto& item : testutil::corpus(60)) {
    if (done >= 20) break;
    WeakNormalForm w = to_weak_normal_form(item.formula, item.sig);
    std::vector<NormalForm> branches = zero_ary_branches(w);
    int max_n = item.sig.max_arity() >= 3 ? 2 : 3;
    for (const auto& nf : branches) {
      if (nf.existential.empty()) continue;
      // Find a small model of this branch by enumeration.
      std::optional<Structure> model;
      for (int n = 1; n <= max_n && !model; ++n)
        enumerate_structures(nf.sig, n, [&](const Structure& st) {
          if (evaluate(st, as_formula(nf), {})) {
            model = st;
            return false;
          }
          return true;
        });
      if (!model) continue;
      ShrinkResult r = shrink(*model, nf);
      INFO(item.text);
      // Exact size 2K * m_ex * (K-1)^(K-1) * L.
      int K = nf.K();
      int T = 1;
      for (int i = 0; i < K - 1; ++i) T *= K - 1;
      int expect = 2 * K * (int)nf.existential.size() * T * r.domain.L;
      REQUIRE(r.model.size == expect);
      REQUIRE(evaluate(r.model, as_formula(nf), {}));
      // The forest verifies, and distinct branches carry distinct Sets.
      ForestReport rep = verify_forest(r.forest, nf);
      REQUIRE(rep.passed());
      for (const auto& tree : r.forest.trees) {
        std::set<std::vector<int>> sets;
        for (const auto& b : branches_of(tree)) {
          (void)b;
          sets.insert(b.set_sorted);
        }
        // Universal roots are distinct, so at least |B| many branches exist;
        // the Set collapse is allowed, but every branch has a pre.
        for (const auto& b : branches_of(tree)) REQUIRE(b.pre != nullptr);
      }
      // Determinism: shrinking twice gives identical output.
      ShrinkResult r2 = shrink(*model, nf);
      REQUIRE(r2.model.rels == r.model.rels);
      REQUIRE(render_forest(r2.forest) == render_forest(r.forest));
      ++done;
      break;
    }
  }
  CHECK(done >= 12);
}
