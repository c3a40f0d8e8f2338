#pragma once

// Compatibility of pre-structures and 1-type sets with the universal part
// of a normal form.

#include "normal_form.hpp"
#include "structure.hpp"

namespace auf1 {

namespace detail {

// All sequences of length `len` over H whose element set is exactly H.
template <typename Fn>
inline bool for_each_covering_sequence(const std::vector<int>& H, int len,
                                       Fn fn) {
  if ((int)H.size() > len) return true;  // no covering sequence exists
  std::vector<int> seq(len);
  std::vector<size_t> idx(len, 0);
  while (true) {
    std::set<int> used;
    for (int i = 0; i < len; ++i) { seq[i] = H[idx[i]]; used.insert(seq[i]); }
    if (used.size() == H.size())
      if (!fn(seq)) return false;
    int i = len - 1;
    for (; i >= 0; --i) {
      if (++idx[i] < H.size()) break;
      idx[i] = 0;
    }
    if (i < 0) break;
  }
  return true;
}

} // namespace detail

// A pre-structure is compatible with the universal conjuncts if every
// covering variable assignment satisfies every universal matrix.  A
// conjunct shorter than |H| imposes no condition (no covering sequence).
inline bool is_forall_compatible(const PreStructure& p, const NormalForm& nf) {
  for (const auto& c : nf.universal) {
    bool ok = detail::for_each_covering_sequence(
        p.elements, (int)c.vars.size(), [&](const std::vector<int>& seq) {
          Assignment a;
          for (size_t i = 0; i < c.vars.size(); ++i) a[c.vars[i]] = seq[i];
          return evaluate_pre(p, c.matrix, a);
        });
    if (!ok) return false;
  }
  return true;
}

namespace detail {

// Search, in lexicographic order of (atom list, false < true), for a
// completion of the covering atoms that is forall-compatible and realizes
// the requested 1-types.  Returns the first hit.
inline std::optional<PreStructure> complete_pre_search(
    const std::vector<std::pair<int, OneType>>& elems, const NormalForm& nf) {
  PreStructure p;
  p.sig = nf.sig;
  for (const auto& [e, t] : elems) p.elements.push_back(e);
  std::sort(p.elements.begin(), p.elements.end());
  for (size_t i = 1; i < p.elements.size(); ++i)
    if (p.elements[i] == p.elements[i - 1])
      throw std::runtime_error("complete_pre: elements must be distinct");

  // Constant tuples are fixed by the 1-types.
  for (const auto& [e, t] : elems)
    for (const auto& [rel, val] : t.atoms) {
      int arity = p.sig.arity_of(rel);
      p.truth[{rel, std::vector<int>(arity, e)}] = val;
    }
  // The remaining covering atoms are free.
  std::vector<AtomKey> free_atoms;
  for (const auto& k : pre_atom_domain(p.sig, p.elements))
    if (!p.truth.count(k)) free_atoms.push_back(k);

  size_t m = free_atoms.size();
  if (m > 24)
    throw std::runtime_error("complete_pre: covering-atom space too large");
  for (unsigned long long bits = 0; bits < (1ULL << m); ++bits) {
    for (size_t i = 0; i < m; ++i)
      p.truth[free_atoms[i]] = (bits >> (m - 1 - i)) & 1;  // lexicographic
    if (is_forall_compatible(p, nf)) return p;
  }
  return std::nullopt;
}

} // namespace detail

// Deterministic completion used by the model-building step; fails only when
// the requested 1-type combination is not forall-compatible.
inline PreStructure complete_pre(
    const std::vector<std::pair<int, OneType>>& elems, const NormalForm& nf) {
  auto p = detail::complete_pre_search(elems, nf);
  if (!p)
    throw EvalError(
        "complete_pre: no forall-compatible pre-structure exists");
  return *p;
}

// A set of 1-types is compatible if every assignment of the types to every
// set of at most m_max fresh elements admits a forall-compatible
// pre-structure realizing it.
inline bool is_typeset_compatible(const std::set<OneType>& types,
                                  const NormalForm& nf, int m_max) {
  if (m_max < 1) throw std::runtime_error("m_max must be at least 1");
  if (types.empty() || nf.universal.empty()) return true;
  std::vector<OneType> ts(types.begin(), types.end());
  for (int m = 1; m <= m_max; ++m) {
    // Fresh elements are interchangeable: assignments equal up to a
    // permutation of the elements need only be checked once.
    std::vector<size_t> pick(m, 0);
    while (true) {
      std::vector<std::pair<int, OneType>> elems;
      for (int i = 0; i < m; ++i) elems.push_back({i, ts[pick[i]]});
      if (!detail::complete_pre_search(elems, nf)) return false;
      int i = m - 1;
      for (; i >= 0; --i) {
        if (pick[i] + 1 < ts.size()) {
          ++pick[i];
          for (int j = i + 1; j < m; ++j) pick[j] = pick[i];  // non-decreasing
          break;
        }
      }
      if (i < 0) break;
    }
  }
  return true;
}

} // namespace auf1
