#pragma once

// Weak normal form (Scott-style reduction with fresh unary and 0-ary
// symbols), 0-ary branch elimination, the existential/universal normal
// form, and the Maslov-class shape check.

#include "formula.hpp"
#include "fragment.hpp"
#include "structure.hpp"

#include <optional>
#include <sstream>

namespace auf1 {

struct WnfConjunct {
  std::optional<std::string> guard;  // 0-ary symbol E of an E -> ... conjunct
  std::vector<QuantVar> prefix;      // all-universal or ending existentially
  FormulaPtr matrix;                 // quantifier-free, uniform
};

struct RewriteRecord {
  std::string fresh;     // "@P1", "@E2", ...
  int arity = 0;         // 0 or 1
  std::string var;       // the free variable, for arity 1
  FormulaPtr replaced;   // the block subformula that was replaced
};

struct WeakNormalForm {
  std::vector<WnfConjunct> conjuncts;
  Signature extended;  // input signature plus fresh symbols
  std::vector<RewriteRecord> trace;
};

struct ExConjunct {
  std::vector<QuantVar> prefix;  // last quantifier existential, k_i >= 1
  FormulaPtr matrix;
};

struct UnivConjunct {
  std::vector<std::string> vars;  // l_i >= 1
  FormulaPtr matrix;
};

struct NormalForm {
  std::vector<ExConjunct> existential;
  std::vector<UnivConjunct> universal;
  Signature sig;  // arity >= 1 relations only
  std::vector<std::pair<std::string, bool>> valuation;  // the 0-ary guess
  std::string branch_bits;

  int K() const {
    int k = 0;
    for (const auto& c : existential) k = std::max<int>(k, c.prefix.size());
    return k;
  }
  int max_l() const {
    int l = 0;
    for (const auto& c : universal) l = std::max<int>(l, c.vars.size());
    return l;
  }
  // Default bound for typeset-compatibility checks: all uses only interrogate
  // element sets no larger than the longest universal prefix or the widest
  // relation.
  int default_m_max() const {
    return std::max({max_l(), sig.max_arity(), 1});
  }
};

inline FormulaPtr as_formula(const ExConjunct& c) {
  return mk_block(c.prefix, c.matrix);
}
inline FormulaPtr as_formula(const UnivConjunct& c) {
  std::vector<QuantVar> prefix;
  for (const auto& v : c.vars) prefix.push_back({Quant::Forall, v});
  return mk_block(std::move(prefix), c.matrix);
}
inline FormulaPtr as_formula(const NormalForm& nf) {
  std::vector<FormulaPtr> kids;
  for (const auto& c : nf.existential) kids.push_back(as_formula(c));
  for (const auto& c : nf.universal) kids.push_back(as_formula(c));
  if (kids.empty()) return mk_true();
  return kids.size() == 1 ? kids[0] : mk_and(std::move(kids));
}

inline FormulaPtr as_formula(const WnfConjunct& c) {
  FormulaPtr core = c.prefix.empty() ? c.matrix : mk_block(c.prefix, c.matrix);
  if (c.guard) return mk_or({mk_not(mk_atom(*c.guard, {})), core});
  return core;
}
inline FormulaPtr as_formula(const WeakNormalForm& w) {
  if (w.conjuncts.empty()) return mk_true();
  std::vector<FormulaPtr> kids;
  for (const auto& c : w.conjuncts) kids.push_back(as_formula(c));
  return kids.size() == 1 ? kids[0] : mk_and(std::move(kids));
}

namespace detail {

// First block node (preorder) whose body contains no block, excluding the
// root when the root itself qualifies.
inline FormulaPtr find_innermost_block(const FormulaPtr& f, bool is_root) {
  if (f->kind == Formula::Kind::Block) {
    FormulaPtr inner = find_innermost_block(f->body(), false);
    if (inner) return inner;
    return is_root ? nullptr : f;
  }
  for (const auto& k : f->kids) {
    FormulaPtr b = find_innermost_block(k, false);
    if (b) return b;
  }
  return nullptr;
}

// Replace the node identified by pointer with `repl`.
inline FormulaPtr replace_node(const FormulaPtr& f, const Formula* target,
                               const FormulaPtr& repl) {
  if (f.get() == target) return repl;
  if (f->kids.empty()) return f;
  std::vector<FormulaPtr> kids;
  bool changed = false;
  for (const auto& k : f->kids) {
    auto nk = replace_node(k, target, repl);
    changed |= nk.get() != k.get();
    kids.push_back(std::move(nk));
  }
  if (!changed) return f;
  auto g = std::make_shared<Formula>(*f);
  g->kids = std::move(kids);
  return g;
}

inline bool zero_ary_only(const FormulaPtr& f) {
  if (f->kind == Formula::Kind::Atom) return f->args.empty();
  if (f->kind == Formula::Kind::Eq || f->kind == Formula::Kind::Block)
    return false;
  for (const auto& k : f->kids)
    if (!zero_ary_only(k)) return false;
  return true;
}

} // namespace detail

struct FragmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Lemma-style reduction to weak normal form.  `f` must be a closed AUF1-
// sentence (NNF is applied here; blocks are re-segmented into a valid
// AUF1- block shape first).  Innermost-leftmost blocks are rewritten
// first; fresh symbols are named @P1, @P2, ... and @E1, @E2, ... in
// rewrite order.
inline WeakNormalForm to_weak_normal_form(const FormulaPtr& f,
                                          const Signature& sig) {
  auto rep = check_fragment(f, Fragment::AUF1minus);
  if (!rep.accepted)
    throw FragmentError("formula is not in AUF1-");
  if (!free_variables(f).empty())
    throw FragmentError("weak normal form requires a sentence");

  WeakNormalForm w;
  w.extended = sig;
  int next_p = 1, next_e = 1;

  FormulaPtr g = segment_blocks(to_nnf(f));

  // A conjunction of weak normal forms is a weak normal form: split
  // top-level conjunctions before introducing any fresh symbols.
  std::vector<FormulaPtr> work;
  std::vector<FormulaPtr> stack{g};
  while (!stack.empty()) {
    FormulaPtr s = stack.back();
    stack.pop_back();
    if (s->kind == Formula::Kind::And)
      for (auto it = s->kids.rbegin(); it != s->kids.rend(); ++it)
        stack.push_back(*it);
    else
      work.push_back(s);
  }

  for (FormulaPtr sentence : work) {
    while (true) {
      if (sentence->kind == Formula::Kind::Block &&
          is_quantifier_free(sentence->body())) {
        w.conjuncts.push_back({std::nullopt, sentence->prefix, sentence->body()});
        break;
      }
      if (is_quantifier_free(sentence)) {
        if (sentence->kind == Formula::Kind::True) break;
        if (!detail::zero_ary_only(sentence))
          throw FragmentError(
              "closed quantifier-free part uses non-0-ary atoms");
        w.conjuncts.push_back({std::nullopt, {}, sentence});
        break;
      }
      FormulaPtr inner = detail::find_innermost_block(sentence, true);
      if (!inner) throw std::logic_error("no innermost block found");
      auto fv = free_variables(inner);
      if (fv.size() > 1)
        throw FragmentError("block leaves more than one variable free");
      if (fv.size() == 1) {
        std::string y = *fv.begin();
        std::string p = "@P" + std::to_string(next_p++);
        w.extended.add(p, 1);
        w.trace.push_back({p, 1, y, inner});
        std::vector<QuantVar> prefix{{Quant::Forall, y}};
        prefix.insert(prefix.end(), inner->prefix.begin(), inner->prefix.end());
        w.conjuncts.push_back(
            {std::nullopt, std::move(prefix),
             mk_or({mk_not(mk_atom(p, {y})), inner->body()})});
        sentence = detail::replace_node(sentence, inner.get(), mk_atom(p, {y}));
      } else {
        std::string e = "@E" + std::to_string(next_e++);
        w.extended.add(e, 0);
        w.trace.push_back({e, 0, "", inner});
        w.conjuncts.push_back({e, inner->prefix, inner->body()});
        sentence = detail::replace_node(sentence, inner.get(), mk_atom(e, {}));
      }
    }
  }

  for (const auto& c : w.conjuncts) {
    if (!is_quantifier_free(c.matrix))
      throw std::logic_error("weak normal form matrix is not quantifier-free");
    if (!c.prefix.empty()) {
      bool all_forall = true;
      for (const auto& qv : c.prefix)
        if (qv.q != Quant::Forall) all_forall = false;
      if (!all_forall && c.prefix.back().q != Quant::Exists)
        throw std::logic_error("weak normal form conjunct has a bad prefix");
    }
  }
  return w;
}

// One normal form per surviving valuation of the 0-ary symbols, in binary
// counting order (first symbol is the most significant bit, false = 0).
// A valuation whose 0-ary skeleton evaluates to false yields no branch.
inline std::vector<NormalForm> zero_ary_branches(const WeakNormalForm& w) {
  std::vector<std::string> zeros = w.extended.zero_ary_names();
  size_t z = zeros.size();
  std::vector<NormalForm> out;
  for (unsigned long long bits = 0; bits < (1ULL << z); ++bits) {
    std::map<std::string, bool> val;
    std::string bitstr;
    for (size_t i = 0; i < z; ++i) {
      bool b = (bits >> (z - 1 - i)) & 1;
      val[zeros[i]] = b;
      bitstr.push_back(b ? '1' : '0');
    }
    NormalForm nf;
    nf.sig = w.extended.without_zero_ary();
    for (size_t i = 0; i < z; ++i) nf.valuation.push_back({zeros[i], val[zeros[i]]});
    nf.branch_bits = bitstr;
    bool alive = true;
    for (const auto& c : w.conjuncts) {
      if (c.guard && !val.at(*c.guard)) continue;  // conjunct dropped
      FormulaPtr m = simplify_constants(substitute_props(c.matrix, val));
      if (c.prefix.empty()) {
        if (m->kind == Formula::Kind::True) continue;
        alive = false;  // the 0-ary skeleton is violated
        break;
      }
      if (m->kind == Formula::Kind::True) continue;
      if (m->kind == Formula::Kind::False) { alive = false; break; }
      bool all_forall = true;
      for (const auto& qv : c.prefix)
        if (qv.q != Quant::Forall) all_forall = false;
      if (c.prefix.back().q == Quant::Exists) {
        nf.existential.push_back({c.prefix, m});
      } else if (all_forall) {
        std::vector<std::string> vars;
        for (const auto& qv : c.prefix) vars.push_back(qv.var);
        nf.universal.push_back({std::move(vars), m});
      } else {
        throw std::logic_error("conjunct prefix is neither universal nor "
                               "existentially terminated");
      }
    }
    if (alive) out.push_back(std::move(nf));
  }
  return out;
}

// Lemma-style model expansion: interprets every fresh symbol by the truth
// set (or truth value) of the subformula it replaced.
inline Structure expand_model(const Structure& s, const FormulaPtr& f,
                              const WeakNormalForm& w) {
  if (!evaluate(s, f))
    throw std::runtime_error("expand_model: structure does not satisfy the input");
  Structure out(w.extended, s.size);
  out.rels = s.rels;
  out.props = s.props;
  for (const auto& rec : w.trace) {
    if (rec.arity == 1) {
      for (int e = 0; e < s.size; ++e)
        if (evaluate(out, rec.replaced, {{rec.var, e}}))
          out.set(rec.fresh, {e}, true);
    } else {
      out.props[rec.fresh] = evaluate(out, rec.replaced);
    }
  }
  return out;
}

struct MaslovReport {
  struct Entry {
    std::string conjunct;  // "existential i" / "universal i"
    bool ok;
    std::string detail;
  };
  bool all_ok = true;
  std::vector<Entry> entries;
};

namespace detail {

// Universal conjunct: every atom uses at most one variable or all of them.
inline bool maslov_universal_atoms(const FormulaPtr& f,
                                   const std::set<std::string>& all) {
  if (f->kind == Formula::Kind::Atom) {
    std::set<std::string> used(f->args.begin(), f->args.end());
    return used.size() <= 1 || used == all;
  }
  if (f->kind == Formula::Kind::Eq) return true;  // free equality
  for (const auto& k : f->kids)
    if (!maslov_universal_atoms(k, all)) return false;
  return true;
}

// Existential conjunct with prefix read as Q1 z1 ... Ql zl: every atom uses
// at most one variable, or its highest-position variable is existential.
inline bool maslov_existential_atoms(const FormulaPtr& f,
                                     const std::vector<QuantVar>& prefix) {
  if (f->kind == Formula::Kind::Atom) {
    std::set<std::string> used(f->args.begin(), f->args.end());
    if (used.size() <= 1) return true;
    size_t hi = 0;
    bool found = false;
    for (size_t i = 0; i < prefix.size(); ++i)
      if (used.count(prefix[i].var)) { hi = i; found = true; }
    if (!found) return false;
    return prefix[hi].q == Quant::Exists;
  }
  if (f->kind == Formula::Kind::Eq) return true;
  for (const auto& k : f->kids)
    if (!maslov_existential_atoms(k, prefix)) return false;
  return true;
}

} // namespace detail

// Checks that every conjunct matches the prenex Maslov-class shape (the
// resolution-decidable class the normal form reduces into).
inline MaslovReport check_maslov_shape(const NormalForm& nf) {
  MaslovReport rep;
  for (size_t i = 0; i < nf.universal.size(); ++i) {
    std::set<std::string> all(nf.universal[i].vars.begin(),
                              nf.universal[i].vars.end());
    bool ok = detail::maslov_universal_atoms(nf.universal[i].matrix, all);
    rep.entries.push_back({"universal " + std::to_string(i), ok,
                           ok ? "" : "atom uses several but not all variables"});
    rep.all_ok &= ok;
  }
  for (size_t i = 0; i < nf.existential.size(); ++i) {
    bool ok = detail::maslov_existential_atoms(nf.existential[i].matrix,
                                               nf.existential[i].prefix);
    rep.entries.push_back({"existential " + std::to_string(i), ok,
                           ok ? "" : "atom's last variable is universal"});
    rep.all_ok &= ok;
  }
  return rep;
}

} // namespace auf1
