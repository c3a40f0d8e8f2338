#pragma once

// Concrete syntax: s-expression formula and structure files.
//
//   file    := decl* formula
//   decl    := "(" "decl" NAME ARITY ")"
//   formula := "(" NAME var* ")" | "(" "=" var var ")"
//            | "(" "not" formula ")" | "(" "and" formula+ ")"
//            | "(" "or" formula+ ")" | "(" "imp" formula formula ")"
//            | "(" ("forall"|"exists") "(" var+ ")" formula ")"
//
// Structure files:
//   file  := "(" "size" N ")" entry*
//   entry := "(" "rel" NAME tuple* ")" | "(" "prop" NAME ("true"|"false") ")"

#include "formula.hpp"
#include "sexpr.hpp"
#include "structure.hpp"

#include <sstream>

namespace auf1 {

namespace detail {

inline bool is_keyword(const std::string& s) {
  return s == "not" || s == "and" || s == "or" || s == "imp" ||
         s == "forall" || s == "exists" || s == "decl" || s == "=";
}

inline void check_var_name(const Sexpr& e) {
  if (!e.is_atom() || e.atom.empty())
    throw ParseError("expected a variable name", e.line, e.col);
  if (is_keyword(e.atom) || e.atom[0] == '@' || isdigit((unsigned char)e.atom[0]))
    throw ParseError("bad variable name '" + e.atom + "'", e.line, e.col);
}

inline FormulaPtr formula_from_sexpr(const Sexpr& e, const Signature& sig) {
  if (!e.is_list || e.size() == 0)
    throw ParseError("expected a formula", e.line, e.col);
  const Sexpr& head = e[0];
  if (!head.is_atom())
    throw ParseError("expected an operator or relation name", head.line, head.col);
  const std::string& op = head.atom;

  if (op == "not") {
    if (e.size() != 2) throw ParseError("'not' takes one formula", e.line, e.col);
    return mk_not(formula_from_sexpr(e[1], sig));
  }
  if (op == "and" || op == "or") {
    if (e.size() < 2)
      throw ParseError("'" + op + "' needs at least one formula", e.line, e.col);
    std::vector<FormulaPtr> kids;
    for (size_t i = 1; i < e.size(); ++i)
      kids.push_back(formula_from_sexpr(e[i], sig));
    return op == "and" ? mk_and(std::move(kids)) : mk_or(std::move(kids));
  }
  if (op == "imp") {
    if (e.size() != 3) throw ParseError("'imp' takes two formulas", e.line, e.col);
    return mk_imp(formula_from_sexpr(e[1], sig), formula_from_sexpr(e[2], sig));
  }
  if (op == "forall" || op == "exists") {
    if (e.size() != 3 || !e[1].is_list || e[1].size() == 0)
      throw ParseError("'" + op + "' takes a variable list and a formula",
                       e.line, e.col);
    std::vector<QuantVar> prefix;
    Quant q = op == "forall" ? Quant::Forall : Quant::Exists;
    for (const auto& v : e[1].items) {
      check_var_name(v);
      for (const auto& qv : prefix)
        if (qv.var == v.atom)
          throw ParseError("repeated variable in prefix: " + v.atom, v.line, v.col);
      prefix.push_back({q, v.atom});
    }
    FormulaPtr body = formula_from_sexpr(e[2], sig);
    // Merge directly nested quantifier chains into one block, so that
    // parse is a left inverse of render on block prefixes.
    if (body->kind == Formula::Kind::Block) {
      bool clash = false;
      for (const auto& in : body->prefix)
        for (const auto& out : prefix)
          if (in.var == out.var) clash = true;
      if (!clash) {
        auto merged = prefix;
        merged.insert(merged.end(), body->prefix.begin(), body->prefix.end());
        return mk_block(std::move(merged), body->body());
      }
    }
    return mk_block(std::move(prefix), std::move(body));
  }
  if (op == "=") {
    if (!sig.equality_allowed)
      throw ParseError("equality atom but equality is not enabled", e.line, e.col);
    if (e.size() != 3)
      throw ParseError("'=' takes two variables", e.line, e.col);
    check_var_name(e[1]);
    check_var_name(e[2]);
    return mk_eq(e[1].atom, e[2].atom);
  }
  // Relation atom.
  if (!sig.has(op))
    throw ParseError("undeclared relation: " + op, head.line, head.col);
  int arity = sig.arity_of(op);
  if ((int)e.size() - 1 != arity)
    throw ParseError("arity mismatch for " + op + ": expected " +
                         std::to_string(arity) + " arguments, got " +
                         std::to_string(e.size() - 1),
                     e.line, e.col);
  std::vector<std::string> args;
  for (size_t i = 1; i < e.size(); ++i) {
    check_var_name(e[i]);
    args.push_back(e[i].atom);
  }
  return mk_atom(op, std::move(args));
}

} // namespace detail

inline FormulaPtr parse_formula(const std::string& text, const Signature& sig) {
  auto es = read_sexprs(text);
  if (es.size() != 1)
    throw ParseError("expected exactly one formula", 1, 1);
  return detail::formula_from_sexpr(es[0], sig);
}

struct Problem {
  Signature sig;
  FormulaPtr formula;
};

// Parses a formula file: declarations followed by a single formula.
inline Problem parse_problem(const std::string& text, bool allow_equality = false) {
  auto es = read_sexprs(text);
  Problem p;
  p.sig.equality_allowed = allow_equality;
  size_t i = 0;
  for (; i < es.size(); ++i) {
    const Sexpr& e = es[i];
    if (!e.is_list || e.size() == 0 || !e[0].is_atom() || e[0].atom != "decl")
      break;
    if (e.size() != 3 || !e[1].is_atom() || !e[2].is_atom())
      throw ParseError("decl takes a name and an arity", e.line, e.col);
    const std::string& name = e[1].atom;
    if (detail::is_keyword(name) || name.empty() || name[0] == '@')
      throw ParseError("bad relation name '" + name + "'", e[1].line, e[1].col);
    int arity;
    try {
      arity = std::stoi(e[2].atom);
    } catch (...) {
      throw ParseError("bad arity '" + e[2].atom + "'", e[2].line, e[2].col);
    }
    if (arity < 0)
      throw ParseError("negative arity", e[2].line, e[2].col);
    if (p.sig.has(name))
      throw ParseError("duplicate relation: " + name, e[1].line, e[1].col);
    p.sig.add(name, arity);
  }
  if (i + 1 != es.size())
    throw ParseError("expected declarations followed by one formula", 1, 1);
  p.formula = detail::formula_from_sexpr(es[i], p.sig);
  return p;
}

namespace detail {

inline void render_rec(const FormulaPtr& f, std::ostream& os) {
  switch (f->kind) {
    case Formula::Kind::Atom:
      os << '(' << f->rel;
      for (const auto& a : f->args) os << ' ' << a;
      os << ')';
      break;
    case Formula::Kind::Eq:
      os << "(= " << f->args[0] << ' ' << f->args[1] << ')';
      break;
    case Formula::Kind::Not:
      os << "(not ";
      render_rec(f->kids[0], os);
      os << ')';
      break;
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      os << (f->kind == Formula::Kind::And ? "(and" : "(or");
      for (const auto& k : f->kids) {
        os << ' ';
        render_rec(k, os);
      }
      os << ')';
      break;
    }
    case Formula::Kind::Imp:
      os << "(imp ";
      render_rec(f->kids[0], os);
      os << ' ';
      render_rec(f->kids[1], os);
      os << ')';
      break;
    case Formula::Kind::Block: {
      // Split the prefix into maximal same-quantifier runs.
      size_t i = 0, depth = 0;
      while (i < f->prefix.size()) {
        size_t j = i;
        while (j < f->prefix.size() && f->prefix[j].q == f->prefix[i].q) ++j;
        os << (f->prefix[i].q == Quant::Forall ? "(forall (" : "(exists (");
        for (size_t k = i; k < j; ++k)
          os << (k > i ? " " : "") << f->prefix[k].var;
        os << ") ";
        ++depth;
        i = j;
      }
      render_rec(f->body(), os);
      for (size_t k = 0; k < depth; ++k) os << ')';
      break;
    }
    case Formula::Kind::True:
      os << "(and)";  // not produced by public operations
      break;
    case Formula::Kind::False:
      os << "(or)";
      break;
  }
}

} // namespace detail

inline std::string render_formula(const FormulaPtr& f) {
  std::ostringstream os;
  detail::render_rec(f, os);
  return os.str();
}

inline std::string render_signature(const Signature& sig) {
  std::ostringstream os;
  for (const auto& r : sig.relations)
    os << "(decl " << r.name << ' ' << r.arity << ")\n";
  return os.str();
}

// ---- structure files ----

inline Structure parse_structure(const std::string& text, const Signature& sig) {
  auto es = read_sexprs(text);
  if (es.empty() || !es[0].is_list || es[0].size() != 2 || !es[0][0].is_atom() ||
      es[0][0].atom != "size")
    throw ParseError("structure file must start with (size N)", 1, 1);
  int n;
  try {
    n = std::stoi(es[0][1].atom);
  } catch (...) {
    throw ParseError("bad size", es[0].line, es[0].col);
  }
  if (n < 1) throw ParseError("structure size must be positive", es[0].line, es[0].col);
  Structure s(sig, n);
  for (size_t i = 1; i < es.size(); ++i) {
    const Sexpr& e = es[i];
    if (!e.is_list || e.size() < 2 || !e[0].is_atom())
      throw ParseError("expected (rel ...) or (prop ...)", e.line, e.col);
    if (e[0].atom == "rel") {
      const std::string& name = e[1].atom;
      if (!sig.has(name))
        throw ParseError("undeclared relation: " + name, e[1].line, e[1].col);
      int arity = sig.arity_of(name);
      if (arity == 0)
        throw ParseError("use (prop ...) for 0-ary relations", e.line, e.col);
      for (size_t j = 2; j < e.size(); ++j) {
        const Sexpr& t = e[j];
        if (!t.is_list || (int)t.size() != arity)
          throw ParseError("tuple arity mismatch for " + name, t.line, t.col);
        std::vector<int> tup;
        for (const auto& x : t.items) {
          int v;
          try {
            v = std::stoi(x.atom);
          } catch (...) {
            throw ParseError("bad element index", x.line, x.col);
          }
          if (v < 0 || v >= n)
            throw ParseError("element index out of range", x.line, x.col);
          tup.push_back(v);
        }
        s.set(name, tup, true);
      }
    } else if (e[0].atom == "prop") {
      if (e.size() != 3)
        throw ParseError("prop takes a name and true/false", e.line, e.col);
      const std::string& name = e[1].atom;
      if (!sig.has(name) || sig.arity_of(name) != 0)
        throw ParseError("not a declared 0-ary relation: " + name, e[1].line, e[1].col);
      if (e[2].atom != "true" && e[2].atom != "false")
        throw ParseError("expected true or false", e[2].line, e[2].col);
      s.props[name] = e[2].atom == "true";
    } else {
      throw ParseError("expected rel or prop", e[0].line, e[0].col);
    }
  }
  return s;
}

inline std::string render_structure(const Structure& s) {
  std::ostringstream os;
  os << "(size " << s.size << ")\n";
  for (const auto& r : s.sig.relations) {
    if (r.arity == 0) {
      auto it = s.props.find(r.name);
      bool v = it != s.props.end() && it->second;
      if (v) os << "(prop " << r.name << " true)\n";
      continue;
    }
    auto it = s.rels.find(r.name);
    if (it == s.rels.end() || it->second.empty()) continue;
    os << "(rel " << r.name;
    for (const auto& t : it->second) {
      os << " (";
      for (size_t i = 0; i < t.size(); ++i) os << (i ? " " : "") << t[i];
      os << ')';
    }
    os << ")\n";
  }
  return os.str();
}

} // namespace auf1
