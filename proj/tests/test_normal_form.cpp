#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "testutil.hpp"

#include <auf1/normal_form.hpp>

#include <set>

using namespace auf1;

static int node_count(const FormulaPtr& f) {
  int n = 1;
  for (const auto& k : f->kids) n += node_count(k);
  return n;
}

static int block_count(const FormulaPtr& f) {
  int n = f->kind == Formula::Kind::Block ? 1 : 0;
  for (const auto& k : f->kids) n += block_count(k);
  return n;
}

TEST_CASE("weak normal form: fixed point on an already-normal sentence") {
  Signature s;
  s.add("R", 2);
  FormulaPtr f = parse_formula("(forall (x) (exists (y) (R x y)))", s);
  WeakNormalForm w = to_weak_normal_form(f, s);
  REQUIRE(w.conjuncts.size() == 1);
  CHECK(!w.conjuncts[0].guard);
  CHECK(w.conjuncts[0].prefix.size() == 2);
  CHECK(w.trace.empty());
  CHECK(equal(as_formula(w), f));
}

TEST_CASE("weak normal form: nested block becomes a fresh unary conjunct") {
  Signature s;
  s.add("P", 1);
  s.add("S", 4);
  FormulaPtr f = parse_formula(
      "(forall (x) (or (P x)"
      " (exists (y) (forall (z) (exists (t) (S x y z t))))))", s);
  WeakNormalForm w = to_weak_normal_form(f, s);
  REQUIRE(w.conjuncts.size() == 2);
  REQUIRE(w.trace.size() == 1);
  CHECK(w.trace[0].arity == 1);
  std::string fresh = w.trace[0].fresh;
  CHECK(w.extended.has(fresh));
  CHECK(w.extended.arity_of(fresh) == 1);

  // One conjunct is the outer shell forall x (P(x) or fresh(x)); the other
  // carries the inner block guarded by (not fresh(y)).
  bool found_shell = false, found_inner = false;
  for (const auto& c : w.conjuncts) {
    CHECK(!c.guard);
    if (c.prefix.size() == 1) {
      found_shell = true;
      CHECK(equal(
          c.matrix,
          parse_formula("(or (P " + c.prefix[0].var + ") (" + fresh + " " +
                            c.prefix[0].var + "))",
                        w.extended)));
    } else {
      found_inner = true;
      REQUIRE(c.prefix.size() == 4);
      CHECK(c.prefix[0].q == Quant::Forall);
      CHECK(c.prefix[1].q == Quant::Exists);
      CHECK(c.prefix[2].q == Quant::Forall);
      CHECK(c.prefix[3].q == Quant::Exists);
      // Matrix is (not fresh(v)) or S(...), with v the outermost variable.
      CHECK(equal(
          c.matrix,
          parse_formula("(or (not (" + fresh + " " + c.prefix[0].var + ")) (S " +
                            c.prefix[0].var + " " + c.prefix[1].var + " " +
                            c.prefix[2].var + " " + c.prefix[3].var + "))",
                        w.extended)));
    }
  }
  CHECK(found_shell);
  CHECK(found_inner);

  // Equisatisfiability at sizes <= 2.
  CHECK(testutil::oracle_satisfiable(f, s, 2) ==
        testutil::oracle_satisfiable(as_formula(w), w.extended, 2));
}

TEST_CASE("weak normal form: closed-block disjunction uses 0-ary guards") {
  Signature s;
  s.add("P", 1);
  s.add("Q", 1);
  FormulaPtr f =
      parse_formula("(or (exists (x) (P x)) (forall (x) (Q x)))", s);
  WeakNormalForm w = to_weak_normal_form(f, s);
  std::vector<std::string> zeros = w.extended.zero_ary_names();
  REQUIRE(zeros.size() == 2);

  // Expect: the 0-ary skeleton E1 or E2, an E1-guarded existential conjunct,
  // and an E2-guarded universal conjunct.
  int skeletons = 0, guarded = 0;
  std::set<std::string> guards_seen;
  for (const auto& c : w.conjuncts) {
    if (c.prefix.empty() && !c.guard) {
      ++skeletons;
      CHECK(detail::zero_ary_only(c.matrix));
    } else if (c.guard) {
      ++guarded;
      guards_seen.insert(*c.guard);
      REQUIRE(c.prefix.size() == 1);
    }
  }
  CHECK(skeletons == 1);
  CHECK(guarded == 2);
  CHECK(guards_seen.size() == 2);
  CHECK(testutil::oracle_satisfiable(f, s, 2) ==
        testutil::oracle_satisfiable(as_formula(w), w.extended, 2));

  // Three of the four 0-ary valuations survive (both-false kills the
  // skeleton); binary counting order with the first symbol as MSB.
  std::vector<NormalForm> br = zero_ary_branches(w);
  REQUIRE(br.size() == 3);
  CHECK(br[0].branch_bits == "01");
  CHECK(br[1].branch_bits == "10");
  CHECK(br[2].branch_bits == "11");
  for (const auto& nf : br) {
    REQUIRE(nf.valuation.size() == 2);
    CHECK(nf.valuation[0].first == zeros[0]);
    CHECK(nf.valuation[1].first == zeros[1]);
  }
  // Branch "01": only the second guard is on, so exactly one conjunct
  // remains, and it is the one guarded by zeros[1].
  CHECK(br[0].existential.size() + br[0].universal.size() == 1);
}

TEST_CASE("zero_ary_branches: no 0-ary symbols and a false skeleton") {
  Signature s;
  s.add("R", 2);
  FormulaPtr f = parse_formula("(forall (x) (exists (y) (R x y)))", s);
  WeakNormalForm w = to_weak_normal_form(f, s);
  std::vector<NormalForm> br = zero_ary_branches(w);
  REQUIRE(br.size() == 1);
  CHECK(br[0].branch_bits.empty());
  CHECK(br[0].valuation.empty());
  REQUIRE(br[0].existential.size() == 1);
  CHECK(br[0].universal.empty());
  CHECK(br[0].K() == 2);

  // A weak form whose skeleton is unsatisfiable yields no branches.
  WeakNormalForm dead = w;
  dead.conjuncts.push_back({std::nullopt, {}, mk_false()});
  CHECK(zero_ary_branches(dead).empty());
}

TEST_CASE("expand_model on the spec-style examples") {
  // No fresh symbols: the expansion is the input structure.
  Signature s;
  s.add("R", 2);
  FormulaPtr f = parse_formula("(forall (x) (exists (y) (R x y)))", s);
  WeakNormalForm w = to_weak_normal_form(f, s);
  Structure loop(s, 1);
  loop.set("R", {0, 0}, true);
  Structure e = expand_model(loop, f, w);
  CHECK(e.size == 1);
  CHECK(e.rels == loop.rels);

  // Fresh unary interpreted as the truth set of the replaced block.
  Signature s2;
  s2.add("P", 1);
  s2.add("S", 4);
  FormulaPtr f2 = parse_formula(
      "(forall (x) (or (P x)"
      " (exists (y) (forall (z) (exists (t) (S x y z t))))))", s2);
  WeakNormalForm w2 = to_weak_normal_form(f2, s2);
  Structure m(s2, 2);
  m.set("P", {0}, true);
  // Element 1 needs the inner block: S(1, y, z, t) for some y, all z, some t.
  for (int z = 0; z < 2; ++z) m.set("S", {1, 0, z, 1}, true);
  REQUIRE(evaluate(m, f2, {}));
  Structure e2 = expand_model(m, f2, w2);
  std::string fresh = w2.trace[0].fresh;
  CHECK(!e2.holds(fresh, {0}));
  CHECK(e2.holds(fresh, {1}));
  CHECK(evaluate(e2, as_formula(w2), {}));

  // Fresh 0-ary symbols interpreted as subsentence truth values.
  Signature s3;
  s3.add("P", 1);
  s3.add("Q", 1);
  FormulaPtr f3 =
      parse_formula("(or (exists (x) (P x)) (forall (x) (Q x)))", s3);
  WeakNormalForm w3 = to_weak_normal_form(f3, s3);
  Structure m3(s3, 2);
  m3.set("Q", {0}, true);
  m3.set("Q", {1}, true);  // P empty, Q total
  Structure e3 = expand_model(m3, f3, w3);
  REQUIRE(w3.trace.size() == 2);
  // The trace records which fresh 0-ary replaced which subsentence.
  for (const auto& rec : w3.trace) {
    bool replaced_exists =
        rec.replaced->kind == Formula::Kind::Block &&
        rec.replaced->prefix[0].q == Quant::Exists;
    CHECK(e3.props.at(rec.fresh) == !replaced_exists);
  }
  CHECK(evaluate(e3, as_formula(w3), {}));

  // Precondition violation is detected.
  Structure bad(s3, 1);  // P and Q both empty: f3 is false
  CHECK_THROWS_AS(expand_model(bad, f3, w3), std::runtime_error);
}

TEST_CASE("weak normal form soundness and completeness on the corpus") {
  auto items = testutil::corpus(60);
  for (const auto& item : items) {
    WeakNormalForm w = to_weak_normal_form(item.formula, item.sig);
    // Each quantifier block contributes at most one conjunct, plus one 0-ary
    // skeleton per top-level conjunct of the sentence.
    size_t tops = item.formula->kind == Formula::Kind::And
                      ? item.formula->kids.size()
                      : 1;
    CHECK(w.conjuncts.size() <=
          tops + (size_t)block_count(segment_blocks(to_nnf(item.formula))));
    for (int n = 1; n <= 2; ++n) {
      enumerate_structures(item.sig, n, [&](const Structure& st) {
        if (!evaluate(st, item.formula, {})) return true;
        // Completeness: the expansion satisfies every conjunct.
        Structure ex = expand_model(st, item.formula, w);
        REQUIRE(evaluate(ex, as_formula(w), {}));
        return true;
      });
      // Soundness: every model of the weak form projects to a model of f.
      enumerate_structures(w.extended, n, [&](const Structure& st) {
        if (!evaluate(st, as_formula(w), {})) return true;
        REQUIRE(evaluate(st.reduct(item.sig), item.formula, {}));
        return true;
      });
    }
  }
}

TEST_CASE("branch equivalence: f satisfiable over D iff some branch is") {
  auto items = testutil::corpus(40);
  for (const auto& item : items) {
    WeakNormalForm w = to_weak_normal_form(item.formula, item.sig);
    std::vector<NormalForm> branches = zero_ary_branches(w);
    int max_n = item.sig.max_arity() >= 3 ? 2 : 3;
    for (int n = 1; n <= max_n; ++n) {
      bool f_sat = false;
      enumerate_structures(item.sig, n, [&](const Structure& st) {
        if (evaluate(st, item.formula, {})) { f_sat = true; return false; }
        return true;
      });
      bool branch_sat = false;
      for (const auto& nf : branches) {
        if (branch_sat) break;
        enumerate_structures(nf.sig, n, [&](const Structure& st) {
          if (evaluate(st, as_formula(nf), {})) {
            branch_sat = true;
            return false;
          }
          return true;
        });
      }
      REQUIRE(f_sat == branch_sat);
    }
  }
}

TEST_CASE("check_maslov_shape") {
  // Every branch produced by the pipeline has the prenex shape.
  for (const auto& item : testutil::corpus(60)) {
    WeakNormalForm w = to_weak_normal_form(item.formula, item.sig);
    for (const auto& nf : zero_ary_branches(w)) {
      MaslovReport rep = check_maslov_shape(nf);
      CHECK(rep.all_ok);
      CHECK(rep.entries.size() ==
            nf.existential.size() + nf.universal.size());
    }
  }

  // Hand-built violating universal conjunct: forall x1 x2 with atom R(x1).
  Signature s;
  s.add("R", 2);
  NormalForm bad;
  bad.sig = s;
  bad.universal.push_back(
      {{"x1", "x2"}, parse_formula("(or (R x1 x1) (R x1 x2))", s)});
  // R(x1,x1) uses one variable; R(x1,x2) uses both -- fine so far.
  CHECK(check_maslov_shape(bad).all_ok);
  NormalForm bad2;
  bad2.sig = s;
  bad2.universal.push_back({{"x1", "x2"}, parse_formula("(R x1 x1)", s)});
  CHECK(check_maslov_shape(bad2).all_ok);  // single-variable atom is allowed

  // A 3-variable universal conjunct with a 2-variable atom violates (ii).
  Signature s3;
  s3.add("R", 2);
  NormalForm viol;
  viol.sig = s3;
  viol.universal.push_back({{"x1", "x2", "x3"}, parse_formula("(R x1 x2)", s3)});
  MaslovReport rep = check_maslov_shape(viol);
  CHECK(!rep.all_ok);
  REQUIRE(rep.entries.size() == 1);
  CHECK(!rep.entries[0].ok);

  // Existential conjunct forall x1 exists x2 with R(x1,x2) and P(x1): true.
  Signature se;
  se.add("P", 1);
  se.add("R", 2);
  NormalForm ex;
  ex.sig = se;
  ex.existential.push_back(
      {{{Quant::Forall, "x1"}, {Quant::Exists, "x2"}},
       parse_formula("(and (R x1 x2) (P x1))", se)});
  CHECK(check_maslov_shape(ex).all_ok);

  // Same prefix but the atom's highest variable is universal: false.
  NormalForm ex_bad;
  ex_bad.sig = se;
  ex_bad.existential.push_back(
      {{{Quant::Forall, "x1"}, {Quant::Exists, "x2"}, {Quant::Forall, "x3"}},
       parse_formula("(R x1 x3)", se)});
  CHECK(!check_maslov_shape(ex_bad).all_ok);
}

TEST_CASE("weak normal form output size is linearly bounded") {
  for (const auto& item : testutil::corpus(120)) {
    WeakNormalForm w = to_weak_normal_form(item.formula, item.sig);
    int in_size = node_count(item.formula);
    int out_size = 0;
    for (const auto& c : w.conjuncts)
      out_size += node_count(as_formula(c));
    CHECK(out_size <= 8 * in_size + 8);
  }
}
