#pragma once

// First-order formula AST over purely relational signatures: atoms,
// equality, Boolean connectives, and quantifier blocks with mixed
// prefixes.  Values are immutable after construction.

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace auf1 {

struct Relation {
  std::string name;
  int arity = 0;
};

struct Signature {
  std::vector<Relation> relations;
  bool equality_allowed = false;

  bool has(const std::string& name) const {
    for (const auto& r : relations) if (r.name == name) return true;
    return false;
  }
  int arity_of(const std::string& name) const {
    for (const auto& r : relations) if (r.name == name) return r.arity;
    throw std::runtime_error("undeclared relation: " + name);
  }
  void add(const std::string& name, int arity) {
    if (has(name)) throw std::runtime_error("duplicate relation: " + name);
    if (arity < 0) throw std::runtime_error("negative arity for " + name);
    relations.push_back({name, arity});
  }
  int max_arity() const {
    int m = 0;
    for (const auto& r : relations) m = std::max(m, r.arity);
    return m;
  }
  // The signature restricted to relations of arity >= 1.
  Signature without_zero_ary() const {
    Signature s;
    s.equality_allowed = equality_allowed;
    for (const auto& r : relations)
      if (r.arity >= 1) s.relations.push_back(r);
    return s;
  }
  std::vector<std::string> zero_ary_names() const {
    std::vector<std::string> out;
    for (const auto& r : relations)
      if (r.arity == 0) out.push_back(r.name);
    return out;
  }
};

enum class Quant { Forall, Exists };

inline Quant dual(Quant q) { return q == Quant::Forall ? Quant::Exists : Quant::Forall; }

struct QuantVar {
  Quant q;
  std::string var;
  bool operator==(const QuantVar& o) const { return q == o.q && var == o.var; }
};

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

class Formula {
 public:
  enum class Kind { Atom, Eq, Not, And, Or, Imp, Block, True, False };

  Kind kind;
  std::string rel;                 // Atom
  std::vector<std::string> args;   // Atom arguments / Eq's two variables
  std::vector<FormulaPtr> kids;    // Not:1, Imp:2, And/Or:>=1, Block:1 (body)
  std::vector<QuantVar> prefix;    // Block

  const FormulaPtr& body() const { return kids[0]; }
};

inline FormulaPtr mk_atom(std::string rel, std::vector<std::string> args) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Atom;
  f->rel = std::move(rel);
  f->args = std::move(args);
  return f;
}
inline FormulaPtr mk_eq(std::string a, std::string b) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Eq;
  f->args = {std::move(a), std::move(b)};
  return f;
}
inline FormulaPtr mk_not(FormulaPtr g) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Not;
  f->kids = {std::move(g)};
  return f;
}
inline FormulaPtr mk_and(std::vector<FormulaPtr> kids) {
  if (kids.empty()) throw std::runtime_error("empty conjunction");
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::And;
  f->kids = std::move(kids);
  return f;
}
inline FormulaPtr mk_or(std::vector<FormulaPtr> kids) {
  if (kids.empty()) throw std::runtime_error("empty disjunction");
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Or;
  f->kids = std::move(kids);
  return f;
}
inline FormulaPtr mk_imp(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Imp;
  f->kids = {std::move(a), std::move(b)};
  return f;
}
inline FormulaPtr mk_block(std::vector<QuantVar> prefix, FormulaPtr body) {
  if (prefix.empty()) throw std::runtime_error("empty quantifier prefix");
  std::set<std::string> seen;
  for (const auto& qv : prefix)
    if (!seen.insert(qv.var).second)
      throw std::runtime_error("repeated variable in block prefix: " + qv.var);
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Block;
  f->prefix = std::move(prefix);
  f->kids = {std::move(body)};
  return f;
}
inline FormulaPtr mk_true() {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::True;
  return f;
}
inline FormulaPtr mk_false() {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::False;
  return f;
}

inline bool equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind || a->rel != b->rel || a->args != b->args) return false;
  if (a->prefix.size() != b->prefix.size()) return false;
  for (size_t i = 0; i < a->prefix.size(); ++i)
    if (!(a->prefix[i] == b->prefix[i])) return false;
  if (a->kids.size() != b->kids.size()) return false;
  for (size_t i = 0; i < a->kids.size(); ++i)
    if (!equal(a->kids[i], b->kids[i])) return false;
  return true;
}

inline void collect_free(const FormulaPtr& f, std::set<std::string>& bound,
                         std::set<std::string>& out) {
  switch (f->kind) {
    case Formula::Kind::Atom:
    case Formula::Kind::Eq:
      for (const auto& v : f->args)
        if (!bound.count(v)) out.insert(v);
      break;
    case Formula::Kind::Block: {
      std::vector<std::string> added;
      for (const auto& qv : f->prefix)
        if (bound.insert(qv.var).second) added.push_back(qv.var);
      collect_free(f->body(), bound, out);
      for (const auto& v : added) bound.erase(v);
      break;
    }
    case Formula::Kind::True:
    case Formula::Kind::False:
      break;
    default:
      for (const auto& k : f->kids) collect_free(k, bound, out);
  }
}

inline std::set<std::string> free_variables(const FormulaPtr& f) {
  std::set<std::string> bound, out;
  collect_free(f, bound, out);
  return out;
}

inline void collect_names(const FormulaPtr& f, std::set<std::string>& out) {
  for (const auto& v : f->args) out.insert(v);
  for (const auto& qv : f->prefix) out.insert(qv.var);
  for (const auto& k : f->kids) collect_names(k, out);
}

// All variable names appearing anywhere in f (free, bound or vacuous).
inline std::set<std::string> all_variable_names(const FormulaPtr& f) {
  std::set<std::string> out;
  collect_names(f, out);
  return out;
}

inline std::string fresh_variable(const std::set<std::string>& taken,
                                  const std::string& base) {
  if (!taken.count(base)) return base;
  for (int i = 1;; ++i) {
    std::string cand = base + "_" + std::to_string(i);
    if (!taken.count(cand)) return cand;
  }
}

// Rename free occurrences of `from` to `to`, stopping at rebinding blocks.
inline FormulaPtr rename_free(const FormulaPtr& f, const std::string& from,
                              const std::string& to) {
  switch (f->kind) {
    case Formula::Kind::Atom: {
      auto args = f->args;
      for (auto& v : args) if (v == from) v = to;
      return mk_atom(f->rel, std::move(args));
    }
    case Formula::Kind::Eq: {
      auto args = f->args;
      for (auto& v : args) if (v == from) v = to;
      return mk_eq(args[0], args[1]);
    }
    case Formula::Kind::Block: {
      for (const auto& qv : f->prefix)
        if (qv.var == from) return f;  // rebound below
      return mk_block(f->prefix, rename_free(f->body(), from, to));
    }
    case Formula::Kind::True:
    case Formula::Kind::False:
      return f;
    default: {
      std::vector<FormulaPtr> kids;
      kids.reserve(f->kids.size());
      for (const auto& k : f->kids) kids.push_back(rename_free(k, from, to));
      auto g = std::make_shared<Formula>();
      g->kind = f->kind;
      g->kids = std::move(kids);
      return g;
    }
  }
}

namespace detail {

inline FormulaPtr nnf_rec(const FormulaPtr& f, bool positive) {
  switch (f->kind) {
    case Formula::Kind::Atom:
    case Formula::Kind::Eq:
      return positive ? f : mk_not(f);
    case Formula::Kind::True:
      return positive ? f : mk_false();
    case Formula::Kind::False:
      return positive ? f : mk_true();
    case Formula::Kind::Not:
      return nnf_rec(f->kids[0], !positive);
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      bool conj = (f->kind == Formula::Kind::And) == positive;
      std::vector<FormulaPtr> kids;
      for (const auto& k : f->kids) kids.push_back(nnf_rec(k, positive));
      return conj ? mk_and(std::move(kids)) : mk_or(std::move(kids));
    }
    case Formula::Kind::Imp: {
      if (positive)
        return mk_or({nnf_rec(f->kids[0], false), nnf_rec(f->kids[1], true)});
      return mk_and({nnf_rec(f->kids[0], true), nnf_rec(f->kids[1], false)});
    }
    case Formula::Kind::Block: {
      auto prefix = f->prefix;
      if (!positive)
        for (auto& qv : prefix) qv.q = dual(qv.q);
      return mk_block(std::move(prefix), nnf_rec(f->body(), positive));
    }
  }
  throw std::logic_error("unreachable");
}

} // namespace detail

// Negation normal form: negations only directly above atoms and equalities,
// implications eliminated, quantifier prefixes dualized under negation.
inline FormulaPtr to_nnf(const FormulaPtr& f) { return detail::nnf_rec(f, true); }

// Merge nested quantifier blocks into maximal chains.  A shadowed variable
// in the inner block is renamed apart before the merge.
inline FormulaPtr infer_blocks(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Atom:
    case Formula::Kind::Eq:
    case Formula::Kind::True:
    case Formula::Kind::False:
      return f;
    case Formula::Kind::Block: {
      FormulaPtr body = infer_blocks(f->body());
      if (body->kind != Formula::Kind::Block) return mk_block(f->prefix, body);
      std::set<std::string> outer;
      for (const auto& qv : f->prefix) outer.insert(qv.var);
      std::set<std::string> taken = all_variable_names(f);
      auto inner_prefix = body->prefix;
      FormulaPtr inner_body = body->body();
      for (auto& qv : inner_prefix) {
        if (outer.count(qv.var)) {
          std::string nv = fresh_variable(taken, qv.var);
          taken.insert(nv);
          inner_body = rename_free(inner_body, qv.var, nv);
          qv.var = nv;
        }
      }
      auto prefix = f->prefix;
      prefix.insert(prefix.end(), inner_prefix.begin(), inner_prefix.end());
      return mk_block(std::move(prefix), inner_body);
    }
    default: {
      std::vector<FormulaPtr> kids;
      kids.reserve(f->kids.size());
      for (const auto& k : f->kids) kids.push_back(infer_blocks(k));
      auto g = std::make_shared<Formula>();
      g->kind = f->kind;
      g->kids = std::move(kids);
      return g;
    }
  }
}

// Simplify Boolean constants away.  The result contains True/False only if
// the whole formula is constant.
inline FormulaPtr simplify_constants(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Atom:
    case Formula::Kind::Eq:
    case Formula::Kind::True:
    case Formula::Kind::False:
      return f;
    case Formula::Kind::Not: {
      auto k = simplify_constants(f->kids[0]);
      if (k->kind == Formula::Kind::True) return mk_false();
      if (k->kind == Formula::Kind::False) return mk_true();
      return mk_not(k);
    }
    case Formula::Kind::Imp:
      return simplify_constants(
          mk_or({mk_not(f->kids[0]), f->kids[1]}));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      bool conj = f->kind == Formula::Kind::And;
      std::vector<FormulaPtr> kids;
      for (const auto& k : f->kids) {
        auto s = simplify_constants(k);
        if (s->kind == Formula::Kind::True) {
          if (!conj) return mk_true();
          continue;
        }
        if (s->kind == Formula::Kind::False) {
          if (conj) return mk_false();
          continue;
        }
        kids.push_back(s);
      }
      if (kids.empty()) return conj ? mk_true() : mk_false();
      if (kids.size() == 1) return kids[0];
      return conj ? mk_and(std::move(kids)) : mk_or(std::move(kids));
    }
    case Formula::Kind::Block: {
      auto b = simplify_constants(f->body());
      if (b->kind == Formula::Kind::True) return mk_true();
      if (b->kind == Formula::Kind::False) return mk_false();
      return mk_block(f->prefix, b);
    }
  }
  throw std::logic_error("unreachable");
}

// Replace 0-ary atoms according to `valuation`; other atoms untouched.
inline FormulaPtr substitute_props(
    const FormulaPtr& f, const std::map<std::string, bool>& valuation) {
  switch (f->kind) {
    case Formula::Kind::Atom: {
      if (f->args.empty()) {
        auto it = valuation.find(f->rel);
        if (it != valuation.end()) return it->second ? mk_true() : mk_false();
      }
      return f;
    }
    case Formula::Kind::Eq:
    case Formula::Kind::True:
    case Formula::Kind::False:
      return f;
    case Formula::Kind::Block:
      return mk_block(f->prefix, substitute_props(f->body(), valuation));
    default: {
      std::vector<FormulaPtr> kids;
      kids.reserve(f->kids.size());
      for (const auto& k : f->kids) kids.push_back(substitute_props(k, valuation));
      auto g = std::make_shared<Formula>();
      g->kind = f->kind;
      g->kids = std::move(kids);
      return g;
    }
  }
}

inline bool is_quantifier_free(const FormulaPtr& f) {
  if (f->kind == Formula::Kind::Block) return false;
  for (const auto& k : f->kids)
    if (!is_quantifier_free(k)) return false;
  return true;
}

inline bool uses_equality(const FormulaPtr& f) {
  if (f->kind == Formula::Kind::Eq) return true;
  for (const auto& k : f->kids)
    if (uses_equality(k)) return true;
  return false;
}

// Checks atom arities and argument shape against a signature.
inline void validate_against(const FormulaPtr& f, const Signature& sig) {
  if (f->kind == Formula::Kind::Atom) {
    if (!sig.has(f->rel))
      throw std::runtime_error("undeclared relation: " + f->rel);
    if ((int)f->args.size() != sig.arity_of(f->rel))
      throw std::runtime_error("arity mismatch for " + f->rel);
  }
  if (f->kind == Formula::Kind::Eq && !sig.equality_allowed)
    throw std::runtime_error("equality atom but equality is not allowed");
  for (const auto& k : f->kids) validate_against(k, sig);
}

} // namespace auf1
