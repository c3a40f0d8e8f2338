#pragma once

// Shared test helpers: deterministic corpus generation and brute-force
// satisfiability oracles.

#include <auf1/parse.hpp>
#include <auf1/solver.hpp>

#include <random>

namespace testutil {

using namespace auf1;

inline Signature sig_pr2() {
  Signature s;
  s.add("P", 1);
  s.add("R", 2);
  return s;
}

inline Signature sig_pr3() {
  Signature s;
  s.add("P", 1);
  s.add("R", 3);
  return s;
}

inline FormulaPtr parse(const std::string& text, const Signature& sig) {
  return parse_formula(text, sig);
}

// Brute-force satisfiability over domain sizes 1..max_size by literal
// structure enumeration (only usable when the atom space is small).
inline bool oracle_satisfiable(const FormulaPtr& f, const Signature& sig,
                               int max_size) {
  for (int n = 1; n <= max_size; ++n) {
    bool found = false;
    enumerate_structures(sig, n, [&](const Structure& s) {
      if (evaluate(s, f, {})) {
        found = true;
        return false;
      }
      return true;
    });
    if (found) return true;
  }
  return false;
}

// Satisfiability of the raw sentence via grounding-based search; exact and
// fast, used where enumeration is infeasible.
inline bool ground_satisfiable(const FormulaPtr& f, const Signature& sig,
                               int max_size) {
  SearchConfig cfg;
  cfg.max_size = max_size;
  return solve_bounded(f, sig, cfg).status == SolveStatus::SAT;
}

// ---- corpus generation ----
//
// Deterministic family of closed AUF1-minus sentences: uniform quantifier
// blocks over {P/1, R/2} or {P/1, R/3}, normal-form K <= 2, with nested
// blocks and closed-block disjunctions to exercise the fresh unary and
// 0-ary rewrites.

struct CorpusItem {
  Signature sig;
  FormulaPtr formula;
  std::string text;  // for diagnostics
};

namespace detail {

// All tuples over `vars` of length `arity` whose variable set is exactly
// `vars` (for the full-atom case) collected into rendered atoms.
inline void covering_atoms(const std::string& rel, int arity,
                           const std::vector<std::string>& vars,
                           std::vector<FormulaPtr>& out) {
  std::vector<std::string> tup(arity);
  std::function<void(int)> rec = [&](int i) {
    if (i == arity) {
      std::set<std::string> used(tup.begin(), tup.end());
      if (used.size() == vars.size()) out.push_back(mk_atom(rel, tup));
      return;
    }
    for (const auto& v : vars) {
      tup[i] = v;
      rec(i + 1);
    }
  };
  rec(0);
}

// Literal pool for a block with variable set X (block variables plus the
// optional free variable): full atoms over X and single-variable atoms.
inline std::vector<FormulaPtr> literal_pool(const Signature& sig,
                                            const std::vector<std::string>& X) {
  std::vector<FormulaPtr> pool;
  for (const auto& r : sig.relations) {
    if (r.arity >= (int)X.size() && X.size() >= 2)
      covering_atoms(r.name, r.arity, X, pool);
    for (const auto& v : X)
      pool.push_back(mk_atom(r.name, std::vector<std::string>(r.arity, v)));
  }
  return pool;
}

inline FormulaPtr random_matrix(std::mt19937& rng,
                                const std::vector<FormulaPtr>& pool,
                                int budget) {
  auto pick_lit = [&]() {
    FormulaPtr a = pool[rng() % pool.size()];
    return rng() % 2 ? mk_not(a) : a;
  };
  if (budget <= 1 || rng() % 4 == 0) return pick_lit();
  int n = 2 + (int)(rng() % 2);
  std::vector<FormulaPtr> kids;
  for (int i = 0; i < n; ++i) kids.push_back(random_matrix(rng, pool, budget / n));
  return rng() % 2 ? mk_and(std::move(kids)) : mk_or(std::move(kids));
}

} // namespace detail

inline CorpusItem make_corpus_item(unsigned seed) {
  std::mt19937 rng(seed);
  Signature sig = rng() % 3 == 0 ? sig_pr3() : sig_pr2();

  auto block_part = [&](std::vector<QuantVar> prefix,
                        const std::vector<std::string>& X) {
    return mk_block(std::move(prefix),
                    detail::random_matrix(rng, detail::literal_pool(sig, X), 6));
  };

  auto simple_part = [&]() -> FormulaPtr {
    switch (rng() % 5) {
      case 0: return block_part({{Quant::Forall, "x"}}, {"x"});
      case 1: return block_part({{Quant::Exists, "x"}}, {"x"});
      case 2:
        return block_part({{Quant::Forall, "x"}, {Quant::Forall, "y"}},
                          {"x", "y"});
      case 3:
        return block_part({{Quant::Forall, "x"}, {Quant::Exists, "y"}},
                          {"x", "y"});
      default:
        return block_part({{Quant::Exists, "x"}, {Quant::Exists, "y"}},
                          {"x", "y"});
    }
  };

  // A one-free-variable nested block, wrapped as forall x (L(x) or B(x)):
  // the weak normal form introduces a fresh unary symbol for B.
  auto nested_part = [&]() -> FormulaPtr {
    Quant q = rng() % 2 ? Quant::Exists : Quant::Forall;
    FormulaPtr inner = block_part({{q, "y"}}, {"x", "y"});
    FormulaPtr lit = mk_atom("P", {"x"});
    if (rng() % 2) lit = mk_not(lit);
    FormulaPtr body = rng() % 2 ? mk_or({lit, inner}) : mk_and({lit, inner});
    return mk_block({{Quant::Forall, "x"}}, body);
  };

  // A disjunction of two closed blocks: the weak normal form introduces
  // fresh 0-ary guards.
  auto closed_pair_part = [&]() -> FormulaPtr {
    return mk_or({simple_part(), simple_part()});
  };

  std::vector<FormulaPtr> parts;
  int n_parts = 1 + (int)(rng() % 2);
  for (int i = 0; i < n_parts; ++i) {
    switch (rng() % 4) {
      case 0: parts.push_back(nested_part()); break;
      case 1: parts.push_back(closed_pair_part()); break;
      default: parts.push_back(simple_part()); break;
    }
  }
  FormulaPtr f = parts.size() == 1 ? parts[0] : mk_and(std::move(parts));
  return {sig, f, render_formula(f)};
}

inline std::vector<CorpusItem> corpus(int count = 120) {
  std::vector<CorpusItem> out;
  for (int i = 0; i < count; ++i) out.push_back(make_corpus_item(1000 + i));
  return out;
}

} // namespace testutil
