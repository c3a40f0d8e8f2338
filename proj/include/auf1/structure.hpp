#pragma once

// Finite relational structures, Tarskian evaluation, 1-types, and the
// partially defined pre-structures used by the uniform machinery.

#include "formula.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace auf1 {

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Assignment = std::map<std::string, int>;

struct Structure {
  Signature sig;
  int size = 1;  // domain is {0, ..., size-1}
  std::map<std::string, std::set<std::vector<int>>> rels;  // arity >= 1
  std::map<std::string, bool> props;                       // arity == 0

  Structure() = default;
  Structure(Signature s, int n) : sig(std::move(s)), size(n) {
    if (n < 1) throw std::runtime_error("structures have nonempty domains");
  }

  bool holds(const std::string& rel, const std::vector<int>& tuple) const {
    if (tuple.empty()) {
      auto it = props.find(rel);
      return it != props.end() && it->second;
    }
    auto it = rels.find(rel);
    return it != rels.end() && it->second.count(tuple) > 0;
  }

  void set(const std::string& rel, const std::vector<int>& tuple, bool value) {
    for (int e : tuple)
      if (e < 0 || e >= size) throw std::runtime_error("element out of range");
    if (tuple.empty()) {
      props[rel] = value;
      return;
    }
    if (value) rels[rel].insert(tuple);
    else rels[rel].erase(tuple);
  }

  // Restriction to the given signature (must be a subset of sig's relations).
  Structure reduct(const Signature& to) const {
    Structure out(to, size);
    for (const auto& r : to.relations) {
      if (r.arity == 0) {
        auto it = props.find(r.name);
        if (it != props.end()) out.props[r.name] = it->second;
      } else {
        auto it = rels.find(r.name);
        if (it != rels.end()) out.rels[r.name] = it->second;
      }
    }
    return out;
  }
};

namespace detail {

inline bool eval_rec(const Structure& s, const FormulaPtr& f, Assignment& a) {
  switch (f->kind) {
    case Formula::Kind::Atom: {
      std::vector<int> tuple;
      tuple.reserve(f->args.size());
      for (const auto& v : f->args) {
        auto it = a.find(v);
        if (it == a.end()) throw EvalError("unbound variable: " + v);
        tuple.push_back(it->second);
      }
      return s.holds(f->rel, tuple);
    }
    case Formula::Kind::Eq: {
      auto i = a.find(f->args[0]), j = a.find(f->args[1]);
      if (i == a.end() || j == a.end())
        throw EvalError("unbound variable in equality");
      return i->second == j->second;
    }
    case Formula::Kind::Not:
      return !eval_rec(s, f->kids[0], a);
    case Formula::Kind::And:
      for (const auto& k : f->kids)
        if (!eval_rec(s, k, a)) return false;
      return true;
    case Formula::Kind::Or:
      for (const auto& k : f->kids)
        if (eval_rec(s, k, a)) return true;
      return false;
    case Formula::Kind::Imp:
      return !eval_rec(s, f->kids[0], a) || eval_rec(s, f->kids[1], a);
    case Formula::Kind::True:
      return true;
    case Formula::Kind::False:
      return false;
    case Formula::Kind::Block: {
      // Recurse over the prefix positions.
      struct Rec {
        const Structure& s;
        const FormulaPtr& f;
        Assignment& a;
        bool at(size_t pos) {
          if (pos == f->prefix.size()) return eval_rec(s, f->body(), a);
          const auto& qv = f->prefix[pos];
          auto saved = a.find(qv.var) != a.end()
                           ? std::optional<int>(a[qv.var]) : std::nullopt;
          bool forall = qv.q == Quant::Forall;
          bool result = forall;
          for (int e = 0; e < s.size; ++e) {
            a[qv.var] = e;
            bool v = at(pos + 1);
            if (v != forall) { result = v; break; }
          }
          if (saved) a[qv.var] = *saved; else a.erase(qv.var);
          return result;
        }
      };
      Rec r{s, f, a};
      return r.at(0);
    }
  }
  throw std::logic_error("unreachable");
}

} // namespace detail

inline bool evaluate(const Structure& s, const FormulaPtr& f,
                     const Assignment& a = {}) {
  Assignment copy = a;
  return detail::eval_rec(s, f, copy);
}

// A complete truth assignment to the single-variable atoms R(x,...,x) of
// the arity >= 1 relations.  0-ary relations carry no per-element
// information and are excluded.
struct OneType {
  std::map<std::string, bool> atoms;  // relation name -> R(x,...,x)

  bool operator==(const OneType& o) const { return atoms == o.atoms; }
  bool operator<(const OneType& o) const { return atoms < o.atoms; }
};

inline OneType one_type_of(const Structure& s, int e) {
  if (e < 0 || e >= s.size) throw std::runtime_error("element out of range");
  OneType t;
  for (const auto& r : s.sig.relations) {
    if (r.arity == 0) continue;
    std::vector<int> tup(r.arity, e);
    t.atoms[r.name] = s.holds(r.name, tup);
  }
  return t;
}

using AtomKey = std::pair<std::string, std::vector<int>>;

// A pre-structure over an element set H: truth values defined exactly for
// the atoms whose argument tuple contains all of H or just one element.
struct PreStructure {
  Signature sig;                 // arity >= 1 relations only
  std::vector<int> elements;     // sorted, distinct
  std::map<AtomKey, bool> truth;

  bool operator==(const PreStructure& o) const {
    return elements == o.elements && truth == o.truth;
  }

  bool defined(const AtomKey& k) const { return truth.count(k) > 0; }

  bool value(const AtomKey& k) const {
    auto it = truth.find(k);
    if (it == truth.end())
      throw EvalError("undefined pre-structure atom: " + k.first);
    return it->second;
  }

  OneType one_type(int e) const {
    OneType t;
    for (const auto& r : sig.relations) {
      if (r.arity == 0) continue;
      t.atoms[r.name] = value({r.name, std::vector<int>(r.arity, e)});
    }
    return t;
  }
};

namespace detail {

// Does the tuple's element set equal H, or consist of a single element?
inline bool covering_or_single(const std::vector<int>& tuple,
                               const std::vector<int>& H) {
  std::set<int> used(tuple.begin(), tuple.end());
  if (used.size() == 1) return true;
  return std::vector<int>(used.begin(), used.end()) == H;
}

// Enumerate all tuples over H of the given arity, calling fn on each.
template <typename Fn>
inline void for_each_tuple(const std::vector<int>& H, int arity, Fn fn) {
  std::vector<int> tup(arity, 0);
  std::vector<size_t> idx(arity, 0);
  while (true) {
    for (int i = 0; i < arity; ++i) tup[i] = H[idx[i]];
    fn(tup);
    int i = arity - 1;
    for (; i >= 0; --i) {
      if (++idx[i] < H.size()) break;
      idx[i] = 0;
    }
    if (i < 0) break;
  }
}

} // namespace detail

// The atom keys on which a pre-structure over H is defined, in lexicographic
// order of (relation name, tuple).
inline std::vector<AtomKey> pre_atom_domain(const Signature& sig,
                                            const std::vector<int>& H) {
  std::vector<AtomKey> out;
  std::vector<Relation> rels = sig.relations;
  std::sort(rels.begin(), rels.end(),
            [](const Relation& a, const Relation& b) { return a.name < b.name; });
  for (const auto& r : rels) {
    if (r.arity == 0) continue;
    detail::for_each_tuple(H, r.arity, [&](const std::vector<int>& tup) {
      if (detail::covering_or_single(tup, H)) out.push_back({r.name, tup});
    });
  }
  return out;
}

inline PreStructure pre_substructure(const Structure& s,
                                     const std::set<int>& H) {
  if (H.empty()) throw std::runtime_error("pre-substructure over empty set");
  PreStructure p;
  p.sig = s.sig.without_zero_ary();
  p.elements.assign(H.begin(), H.end());
  for (int e : p.elements)
    if (e < 0 || e >= s.size) throw std::runtime_error("element out of range");
  for (const auto& k : pre_atom_domain(p.sig, p.elements))
    p.truth[k] = s.holds(k.first, k.second);
  return p;
}

// Evaluate a quantifier-free formula against a pre-structure.  Undefined
// atom accesses signal a non-uniform use in the caller.
inline bool evaluate_pre(const PreStructure& p, const FormulaPtr& qf,
                         const Assignment& a) {
  switch (qf->kind) {
    case Formula::Kind::Atom: {
      std::vector<int> tuple;
      for (const auto& v : qf->args) {
        auto it = a.find(v);
        if (it == a.end()) throw EvalError("unbound variable: " + v);
        tuple.push_back(it->second);
      }
      return p.value({qf->rel, tuple});
    }
    case Formula::Kind::Eq: {
      auto i = a.find(qf->args[0]), j = a.find(qf->args[1]);
      if (i == a.end() || j == a.end())
        throw EvalError("unbound variable in equality");
      return i->second == j->second;
    }
    case Formula::Kind::Not:
      return !evaluate_pre(p, qf->kids[0], a);
    case Formula::Kind::And:
      for (const auto& k : qf->kids)
        if (!evaluate_pre(p, k, a)) return false;
      return true;
    case Formula::Kind::Or:
      for (const auto& k : qf->kids)
        if (evaluate_pre(p, k, a)) return true;
      return false;
    case Formula::Kind::Imp:
      return !evaluate_pre(p, qf->kids[0], a) || evaluate_pre(p, qf->kids[1], a);
    case Formula::Kind::True:
      return true;
    case Formula::Kind::False:
      return false;
    case Formula::Kind::Block:
      throw EvalError("evaluate_pre applies to quantifier-free formulas only");
  }
  throw std::logic_error("unreachable");
}

} // namespace auf1
