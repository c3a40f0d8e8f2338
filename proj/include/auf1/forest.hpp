#pragma once

// Satisfaction forests: one labelled tree per existential conjunct, with
// branch pre-structures; extraction from a model, the condition verifier,
// and model reconstruction.

#include "compat.hpp"
#include "normal_form.hpp"
#include "sexpr.hpp"
#include "structure.hpp"

#include <functional>
#include <sstream>

namespace auf1 {

struct ForestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ForestNode {
  Quant kind = Quant::Exists;
  int label = -1;
  std::vector<ForestNode> children;
  std::optional<PreStructure> pre;  // set on leaves (the branch label)
};

struct SatisfactionTree {
  int conjunct_index = 0;
  std::vector<ForestNode> roots;  // level-1 nodes (children of the empty root)
};

struct SatisfactionForest {
  int domain_size = 0;
  std::vector<SatisfactionTree> trees;
};

struct Branch {
  std::vector<const ForestNode*> nodes;
  std::vector<int> seq;          // Seq: labels root-child -> leaf
  std::vector<int> set_sorted;   // Set: sorted distinct labels
  const PreStructure* pre = nullptr;
};

inline std::vector<Branch> branches_of(const SatisfactionTree& t) {
  std::vector<Branch> out;
  std::vector<const ForestNode*> path;
  std::function<void(const ForestNode&)> walk = [&](const ForestNode& n) {
    path.push_back(&n);
    if (n.children.empty()) {
      Branch b;
      b.nodes = path;
      for (const auto* p : path) b.seq.push_back(p->label);
      std::set<int> s(b.seq.begin(), b.seq.end());
      b.set_sorted.assign(s.begin(), s.end());
      b.pre = n.pre ? &*n.pre : nullptr;
      out.push_back(std::move(b));
    } else {
      for (const auto& c : n.children) walk(c);
    }
    path.pop_back();
  };
  for (const auto& r : t.roots) walk(r);
  return out;
}

// ---- extraction (from a model) ----

// Builds the satisfaction forest of a model: universal levels branch over
// the whole domain, existential levels take the least witness of the
// remaining suffix.
inline SatisfactionForest extract_forest(const Structure& s,
                                         const NormalForm& nf) {
  SatisfactionForest fst;
  fst.domain_size = s.size;
  for (size_t ci = 0; ci < nf.existential.size(); ++ci) {
    const auto& conj = nf.existential[ci];
    size_t k = conj.prefix.size();
    SatisfactionTree tree;
    tree.conjunct_index = (int)ci;

    // Least element whose remaining suffix still holds in s.
    auto witness = [&](size_t level, const std::vector<int>& labels) {
      FormulaPtr suffix =
          level == k ? conj.matrix
                     : mk_block(std::vector<QuantVar>(conj.prefix.begin() + level,
                                                      conj.prefix.end()),
                                conj.matrix);
      for (int b = 0; b < s.size; ++b) {
        Assignment a;
        for (size_t i = 0; i < labels.size(); ++i)
          a[conj.prefix[i].var] = labels[i];
        a[conj.prefix[level - 1].var] = b;
        if (evaluate(s, suffix, a)) return b;
      }
      throw ForestError("extract_forest: no witness (structure violates the "
                        "normal form)");
    };

    std::vector<int> labels;
    std::function<std::vector<ForestNode>(size_t, std::vector<int>&)> children =
        [&](size_t level, std::vector<int>& labs) -> std::vector<ForestNode> {
      // Builds all nodes of `level` under the path `labs`.
      std::vector<ForestNode> out;
      auto finish = [&](int label) {
        ForestNode n;
        n.kind = conj.prefix[level - 1].q;
        n.label = label;
        labs.push_back(label);
        if (level == k) {
          std::set<int> H(labs.begin(), labs.end());
          n.pre = pre_substructure(s, H);
        } else {
          n.children = children(level + 1, labs);
        }
        labs.pop_back();
        out.push_back(std::move(n));
      };
      if (conj.prefix[level - 1].q == Quant::Forall) {
        for (int b = 0; b < s.size; ++b) finish(b);
      } else {
        finish(witness(level, labs));
      }
      return out;
    };

    if (k == 0) throw ForestError("existential conjunct with empty prefix");
    tree.roots = children(1, labels);
    fst.trees.push_back(std::move(tree));
  }
  return fst;
}

// ---- verification ----

struct ForestReport {
  struct Cond {
    bool pass = true;
    std::string where;
  };
  std::map<std::string, Cond> conds;  // T1..T5, F1..F4, structural
  int m_max = 1;

  ForestReport() {
    for (const char* c : {"structural", "T1", "T2", "T3", "T4", "T5",
                          "F1", "F2", "F3", "F4"})
      conds[c] = {};
  }
  void fail(const std::string& c, const std::string& where) {
    if (conds[c].pass) conds[c] = {false, where};
  }
  bool passed() const {
    for (const auto& [k, v] : conds)
      if (!v.pass) return false;
    return true;
  }
  // First failing condition name, or "" when passing.
  std::string first_failure() const {
    for (const char* c : {"structural", "T1", "T2", "T3", "T4", "T5",
                          "F1", "F2", "F3", "F4"})
      if (!conds.at(c).pass) return c;
    return "";
  }
};

inline ForestReport verify_forest(const SatisfactionForest& fst,
                                  const NormalForm& nf) {
  ForestReport rep;
  rep.m_max = nf.default_m_max();
  if (fst.trees.size() != nf.existential.size()) {
    rep.fail("structural", "tree count differs from the number of "
                           "existential conjuncts");
    rep.fail("F1", "tree count");
    return rep;
  }
  int B = fst.domain_size;

  // Structural pass and (T1): shapes, levels, label ranges, branching.
  for (size_t ti = 0; ti < fst.trees.size(); ++ti) {
    const auto& conj = nf.existential[ti];
    size_t k = conj.prefix.size();
    std::string where = "tree " + std::to_string(ti);
    std::function<void(const ForestNode&, size_t)> walk = [&](const ForestNode& n,
                                                              size_t level) {
      if (n.label < 0 || n.label >= B)
        rep.fail("structural", where + ": label out of range");
      if (level == k) {
        if (!n.children.empty() || !n.pre)
          rep.fail("structural", where + ": leaf at wrong depth or without a "
                                         "branch pre-structure");
        return;
      }
      if (n.children.empty()) {
        rep.fail("structural", where + ": branch shorter than the prefix");
        return;
      }
      Quant q = conj.prefix[level].q;  // quantifier of the children's level
      if (q == Quant::Forall) {
        std::set<int> labels;
        for (const auto& c : n.children) labels.insert(c.label);
        if ((int)n.children.size() != B || (int)labels.size() != B)
          rep.fail("T1", where + ": universal node without |B| distinctly "
                                 "labelled children");
      } else {
        if (n.children.size() != 1)
          rep.fail("T1", where + ": existential node with more than one child");
      }
      for (const auto& c : n.children) walk(c, level + 1);
    };
    // Level-1 arity.
    if (conj.prefix[0].q == Quant::Forall) {
      std::set<int> labels;
      for (const auto& r : fst.trees[ti].roots) labels.insert(r.label);
      if ((int)fst.trees[ti].roots.size() != B || (int)labels.size() != B)
        rep.fail("T1", where + ": root without |B| distinctly labelled children");
    } else if (fst.trees[ti].roots.size() != 1) {
      rep.fail("T1", where + ": root of an existential level with several "
                             "children");
    }
    for (const auto& r : fst.trees[ti].roots) walk(r, 1);
  }
  if (!rep.conds["structural"].pass) {
    rep.fail("F1", rep.conds["structural"].where);
    return rep;
  }

  std::vector<std::vector<Branch>> all(fst.trees.size());
  for (size_t ti = 0; ti < fst.trees.size(); ++ti)
    all[ti] = branches_of(fst.trees[ti]);

  // (T2): each branch pre-structure satisfies the existential matrix.
  for (size_t ti = 0; ti < all.size(); ++ti) {
    const auto& conj = nf.existential[ti];
    for (size_t bi = 0; bi < all[ti].size(); ++bi) {
      const Branch& b = all[ti][bi];
      if (b.pre->elements != b.set_sorted) {
        rep.fail("structural", "tree " + std::to_string(ti) + " branch " +
                                   std::to_string(bi) +
                                   ": pre-structure domain differs from Set");
        continue;
      }
      Assignment a;
      for (size_t i = 0; i < conj.prefix.size(); ++i)
        a[conj.prefix[i].var] = b.seq[i];
      bool ok = false;
      try {
        ok = evaluate_pre(*b.pre, conj.matrix, a);
      } catch (const EvalError&) {
        ok = false;
      }
      if (!ok)
        rep.fail("T2", "tree " + std::to_string(ti) + " branch " +
                           std::to_string(bi));
    }
  }

  // (T3)/(F2): shared elements carry one 1-type; (T4)/(F3): equal Set means
  // equal branch label.
  std::map<int, std::pair<size_t, OneType>> global_type;
  std::map<std::vector<int>, std::pair<size_t, const PreStructure*>> global_pre;
  for (size_t ti = 0; ti < all.size(); ++ti) {
    std::map<int, OneType> tree_type;
    std::map<std::vector<int>, const PreStructure*> tree_pre;
    for (size_t bi = 0; bi < all[ti].size(); ++bi) {
      const Branch& b = all[ti][bi];
      for (int e : b.set_sorted) {
        OneType t = b.pre->one_type(e);
        auto it = tree_type.find(e);
        if (it == tree_type.end()) tree_type[e] = t;
        else if (!(it->second == t))
          rep.fail("T3", "tree " + std::to_string(ti) + ", element " +
                             std::to_string(e));
        auto git = global_type.find(e);
        if (git == global_type.end()) global_type[e] = {ti, t};
        else if (git->second.first != ti && !(git->second.second == t))
          rep.fail("F2", "trees " + std::to_string(git->second.first) + "/" +
                             std::to_string(ti) + ", element " +
                             std::to_string(e));
      }
      auto it = tree_pre.find(b.set_sorted);
      if (it == tree_pre.end()) tree_pre[b.set_sorted] = b.pre;
      else if (!(*it->second == *b.pre))
        rep.fail("T4", "tree " + std::to_string(ti) + " branch " +
                           std::to_string(bi));
      auto git = global_pre.find(b.set_sorted);
      if (git == global_pre.end()) global_pre[b.set_sorted] = {ti, b.pre};
      else if (git->second.first != ti && !(*git->second.second == *b.pre))
        rep.fail("F3", "trees " + std::to_string(git->second.first) + "/" +
                           std::to_string(ti) + " branch " + std::to_string(bi));
    }
  }

  // (T5): every branch label is forall-compatible.
  for (size_t ti = 0; ti < all.size(); ++ti)
    for (size_t bi = 0; bi < all[ti].size(); ++bi)
      if (!is_forall_compatible(*all[ti][bi].pre, nf))
        rep.fail("T5", "tree " + std::to_string(ti) + " branch " +
                           std::to_string(bi));

  // (F4): the set of all 1-types in branch labels is typeset-compatible.
  std::set<OneType> types;
  for (const auto& tb : all)
    for (const auto& b : tb)
      for (int e : b.set_sorted) types.insert(b.pre->one_type(e));
  if (!is_typeset_compatible(types, nf, rep.m_max))
    rep.fail("F4", "typeset over all branch labels, m_max = " +
                       std::to_string(rep.m_max));

  for (const char* t : {"T1", "T2", "T3", "T4", "T5"})
    if (!rep.conds[t].pass) rep.fail("F1", rep.conds[t].where);
  return rep;
}

// ---- model reconstruction (verified forest -> structure) ----

// Per-element fallback 1-types for elements in no branch; shrink supplies
// the types tied to the small-domain layout.
inline Structure build_model(const SatisfactionForest& fst, const NormalForm& nf,
                             const std::vector<OneType>* fallback_types = nullptr) {
  ForestReport rep = verify_forest(fst, nf);
  if (!rep.passed())
    throw ForestError("build_model: forest fails " + rep.first_failure() +
                      " (" + rep.conds.at(rep.first_failure()).where + ")");
  int n = fst.domain_size;
  Structure out(nf.sig, n);

  std::vector<std::vector<Branch>> all(fst.trees.size());
  for (size_t ti = 0; ti < fst.trees.size(); ++ti)
    all[ti] = branches_of(fst.trees[ti]);

  // Step 1: 1-types, from the first branch (depth-first, first tree)
  // containing the element; the consistency conditions make the choice
  // immaterial.
  std::vector<std::optional<OneType>> ty(n);
  std::set<OneType> seen_types;
  for (const auto& tb : all)
    for (const auto& b : tb)
      for (int e : b.set_sorted) {
        OneType t = b.pre->one_type(e);
        seen_types.insert(t);
        if (!ty[e]) ty[e] = t;
      }
  OneType all_false;
  for (const auto& r : nf.sig.relations)
    if (r.arity >= 1) all_false.atoms[r.name] = false;
  for (int e = 0; e < n; ++e) {
    if (ty[e]) continue;
    if (fallback_types) ty[e] = (*fallback_types)[e];
    else if (!seen_types.empty()) ty[e] = *seen_types.begin();
    else ty[e] = all_false;
  }
  for (int e = 0; e < n; ++e)
    for (const auto& [rel, val] : ty[e]->atoms)
      out.set(rel, std::vector<int>(nf.sig.arity_of(rel), e), val);

  // Step 2: covering atoms on every branch Set, from the branch label.
  std::set<std::vector<int>> defined_sets;
  for (const auto& tb : all)
    for (const auto& b : tb) {
      defined_sets.insert(b.set_sorted);
      for (const auto& [key, val] : b.pre->truth) out.set(key.first, key.second, val);
    }

  // Step 3: completion of every remaining element set of size <= m_max;
  // everything larger is never interrogated and stays false.
  int m_max = rep.m_max;
  std::vector<int> comb;
  std::function<void(int, int)> complete = [&](int start, int want) {
    if (want == 0) {
      if (defined_sets.count(comb)) return;
      std::vector<std::pair<int, OneType>> elems;
      for (int e : comb) elems.push_back({e, *ty[e]});
      PreStructure p = complete_pre(elems, nf);
      for (const auto& [key, val] : p.truth) out.set(key.first, key.second, val);
      return;
    }
    for (int e = start; e <= n - want; ++e) {
      comb.push_back(e);
      complete(e + 1, want - 1);
      comb.pop_back();
    }
  };
  for (int h = 2; h <= m_max && h <= n; ++h) complete(0, h);
  return out;
}

// ---- forest files ----

inline std::string render_forest(const SatisfactionForest& fst) {
  std::ostringstream os;
  os << "(forest (domain " << fst.domain_size << ")";
  std::function<void(const ForestNode&)> emit = [&](const ForestNode& n) {
    if (n.children.empty() && n.pre) {
      os << "\n  (leaf " << n.label << " (pre";
      const PreStructure& p = *n.pre;
      for (const auto& [key, val] : p.truth) {
        std::set<int> used(key.second.begin(), key.second.end());
        if (used.size() == 1 && p.elements.size() > 1) continue;  // in tp entries
        os << " (" << key.first << " (";
        for (size_t i = 0; i < key.second.size(); ++i)
          os << (i ? " " : "") << key.second[i];
        os << ") " << (val ? "true" : "false") << ")";
      }
      if (p.elements.size() > 1)
        for (int e : p.elements) {
          os << " (tp " << e;
          for (const auto& [rel, val] : p.one_type(e).atoms)
            os << " (" << rel << ' ' << (val ? "true" : "false") << ')';
          os << ')';
        }
      os << "))";
      return;
    }
    os << "\n  (" << (n.kind == Quant::Forall ? 'u' : 'e') << ' ' << n.label;
    for (const auto& c : n.children) emit(c);
    os << ')';
  };
  for (size_t ti = 0; ti < fst.trees.size(); ++ti) {
    os << "\n (tree " << fst.trees[ti].conjunct_index;
    for (const auto& r : fst.trees[ti].roots) emit(r);
    os << ')';
  }
  os << ")\n";
  return os.str();
}

namespace detail {

inline ForestNode forest_node_from_sexpr(const Sexpr& e, const Signature& sig) {
  if (!e.is_list || e.size() < 2 || !e[0].is_atom())
    throw ParseError("expected a forest node", e.line, e.col);
  ForestNode n;
  const std::string& tag = e[0].atom;
  n.label = std::stoi(e[1].atom);
  if (tag == "u" || tag == "e") {
    n.kind = tag == "u" ? Quant::Forall : Quant::Exists;
    for (size_t i = 2; i < e.size(); ++i)
      n.children.push_back(forest_node_from_sexpr(e[i], sig));
    return n;
  }
  if (tag != "leaf" || e.size() != 3 || !e[2].is_list || e[2].size() < 1 ||
      !e[2][0].is_atom() || e[2][0].atom != "pre")
    throw ParseError("expected (leaf LABEL (pre ...))", e.line, e.col);
  n.kind = Quant::Exists;
  PreStructure p;
  p.sig = sig.without_zero_ary();
  for (size_t i = 1; i < e[2].size(); ++i) {
    const Sexpr& item = e[2][i];
    if (!item.is_list || item.size() < 2 || !item[0].is_atom())
      throw ParseError("bad pre entry", item.line, item.col);
    if (item[0].atom == "tp") {
      int el = std::stoi(item[1].atom);
      for (size_t j = 2; j < item.size(); ++j) {
        const Sexpr& ta = item[j];
        if (!ta.is_list || ta.size() != 2)
          throw ParseError("bad tp entry", ta.line, ta.col);
        const std::string& rel = ta[0].atom;
        bool val = ta[1].atom == "true";
        p.truth[{rel, std::vector<int>(p.sig.arity_of(rel), el)}] = val;
      }
    } else {
      if (item.size() != 3 || !item[1].is_list)
        throw ParseError("bad atom entry", item.line, item.col);
      const std::string& rel = item[0].atom;
      std::vector<int> tup;
      for (const auto& x : item[1].items) tup.push_back(std::stoi(x.atom));
      if ((int)tup.size() != p.sig.arity_of(rel))
        throw ParseError("tuple arity mismatch in pre", item.line, item.col);
      p.truth[{rel, tup}] = item[2].atom == "true";
    }
  }
  n.pre = std::move(p);
  return n;
}

// Recompute each leaf's element list from the labels along its branch.
inline void fix_pre_elements(ForestNode& n, std::vector<int>& labels) {
  labels.push_back(n.label);
  if (n.children.empty() && n.pre) {
    std::set<int> s(labels.begin(), labels.end());
    n.pre->elements.assign(s.begin(), s.end());
  }
  for (auto& c : n.children) fix_pre_elements(c, labels);
  labels.pop_back();
}

} // namespace detail

inline SatisfactionForest parse_forest(const std::string& text,
                                       const Signature& sig) {
  auto es = read_sexprs(text);
  if (es.size() != 1 || !es[0].is_list || es[0].size() < 2 ||
      !es[0][0].is_atom() || es[0][0].atom != "forest")
    throw ParseError("expected (forest (domain N) (tree ...) ...)", 1, 1);
  const Sexpr& top = es[0];
  if (!top[1].is_list || top[1].size() != 2 || top[1][0].atom != "domain")
    throw ParseError("expected (domain N)", top.line, top.col);
  SatisfactionForest fst;
  fst.domain_size = std::stoi(top[1][1].atom);
  for (size_t i = 2; i < top.size(); ++i) {
    const Sexpr& te = top[i];
    if (!te.is_list || te.size() < 2 || !te[0].is_atom() || te[0].atom != "tree")
      throw ParseError("expected (tree I node ...)", te.line, te.col);
    SatisfactionTree t;
    t.conjunct_index = std::stoi(te[1].atom);
    for (size_t j = 2; j < te.size(); ++j)
      t.roots.push_back(detail::forest_node_from_sexpr(te[j], sig));
    std::vector<int> labels;
    for (auto& r : t.roots) detail::fix_pre_elements(r, labels);
    fst.trees.push_back(std::move(t));
  }
  return fst;
}

} // namespace auf1
