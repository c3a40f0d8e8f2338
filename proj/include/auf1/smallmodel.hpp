#pragma once

// Exponential small-model construction: extension functions via Hall
// matchings, the product domain B, and model shrinking through pattern
// elements.

#include "forest.hpp"

#include <algorithm>

namespace auf1 {

struct SmallModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- Hall matchings ----

struct BipartiteGraph {
  int n_left = 0;
  int n_right = 0;
  std::vector<std::vector<int>> adj;  // adj[left] = right neighbours
};

struct MatchingResult {
  bool success = false;
  std::vector<int> match_left;  // right vertex per left vertex, -1 if none
  std::vector<int> witness;     // on failure: W with |N(W)| < |W|
};

// Augmenting-path matching; left vertices processed in index order, right
// neighbours tried in adjacency order, so the result is deterministic.
inline MatchingResult hall_matching(const BipartiteGraph& g) {
  MatchingResult r;
  r.match_left.assign(g.n_left, -1);
  std::vector<int> match_right(g.n_right, -1);
  std::vector<char> visited;
  std::function<bool(int)> try_kuhn = [&](int u) {
    for (int v : g.adj[u]) {
      if (visited[v]) continue;
      visited[v] = 1;
      if (match_right[v] == -1 || try_kuhn(match_right[v])) {
        match_right[v] = u;
        r.match_left[u] = v;
        return true;
      }
    }
    return false;
  };
  bool all = true;
  for (int u = 0; u < g.n_left; ++u) {
    visited.assign(g.n_right, 0);
    if (!try_kuhn(u)) all = false;
  }
  r.success = all;
  if (!all) {
    // Alternating-path closure from the unmatched left vertices yields a
    // Hall violator.
    std::vector<char> in_w(g.n_left, 0), right_seen(g.n_right, 0);
    std::vector<int> queue;
    for (int u = 0; u < g.n_left; ++u)
      if (r.match_left[u] == -1) {
        in_w[u] = 1;
        queue.push_back(u);
      }
    while (!queue.empty()) {
      int u = queue.back();
      queue.pop_back();
      for (int v : g.adj[u]) {
        if (right_seen[v]) continue;
        right_seen[v] = 1;
        int u2 = match_right[v];
        if (u2 != -1 && !in_w[u2]) {
          in_w[u2] = 1;
          queue.push_back(u2);
        }
      }
    }
    for (int u = 0; u < g.n_left; ++u)
      if (in_w[u]) r.witness.push_back(u);
  }
  return r;
}

// ---- extension functions ----

struct ExtensionFunction {
  int K = 1;
  // Sorted 1-based subsets of [2K]; includes {} -> {1}.
  std::map<std::vector<int>, std::vector<int>> table;

  const std::vector<int>& apply(const std::vector<int>& s) const {
    auto it = table.find(s);
    if (it == table.end())
      throw SmallModelError("ext: subset outside the domain");
    return it->second;
  }
};

namespace detail {

inline std::vector<std::vector<int>> subsets_of_size(int n, int l) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int, int)> rec = [&](int start, int want) {
    if (want == 0) {
      out.push_back(cur);
      return;
    }
    for (int e = start; e <= n - want + 1; ++e) {
      cur.push_back(e);
      rec(e + 1, want - 1);
      cur.pop_back();
    }
  };
  rec(1, l);
  return out;
}

} // namespace detail

inline ExtensionFunction build_ext(int K) {
  if (K < 1) throw SmallModelError("build_ext: K must be at least 1");
  ExtensionFunction ext;
  ext.K = K;
  ext.table[{}] = {1};
  for (int l = 1; l < K; ++l) {
    auto lefts = detail::subsets_of_size(2 * K, l);
    auto rights = detail::subsets_of_size(2 * K, l + 1);
    BipartiteGraph g;
    g.n_left = (int)lefts.size();
    g.n_right = (int)rights.size();
    g.adj.resize(g.n_left);
    for (int i = 0; i < g.n_left; ++i)
      for (int j = 0; j < g.n_right; ++j)
        if (std::includes(rights[j].begin(), rights[j].end(), lefts[i].begin(),
                          lefts[i].end()))
          g.adj[i].push_back(j);
    MatchingResult m = hall_matching(g);
    if (!m.success)
      throw SmallModelError("build_ext: matching failed, which contradicts "
                            "the counting argument");
    for (int i = 0; i < g.n_left; ++i)
      ext.table[lefts[i]] = rights[m.match_left[i]];
  }
  return ext;
}

// ---- the domain B ----

struct SmallDomain {
  int K = 1;
  int m_ex = 0;
  int T = 1;  // (K-1)^(K-1), with 0^0 = 1
  int L = 0;
  std::vector<OneType> types;  // alpha_1..alpha_L (0-based storage)

  int size() const { return 2 * K * m_ex * T * L; }

  // Flat index of (s, i, t, l), all 1-based.
  int index(int s, int i, int t, int l) const {
    return (((s - 1) * m_ex + (i - 1)) * T + (t - 1)) * L + (l - 1);
  }
  int layer_of(int b) const { return b / (m_ex * T * L) + 1; }
  int type_index_of(int b) const { return b % L + 1; }  // the l coordinate
  const OneType& type_of(int b) const { return types[b % L]; }
};

inline SmallDomain build_small_domain(const Structure& s, const NormalForm& nf) {
  if (s.size < 1)
    throw SmallModelError("build_small_domain: the source model is empty");
  if (nf.existential.empty())
    throw SmallModelError("build_small_domain: m_exists = 0; a purely "
                          "universal sentence is preserved under "
                          "substructures, search size 1 directly");
  SmallDomain d;
  d.K = nf.K();
  d.m_ex = (int)nf.existential.size();
  d.T = 1;
  for (int i = 0; i < d.K - 1; ++i) d.T *= d.K - 1;
  for (int e = 0; e < s.size; ++e) {
    OneType t = one_type_of(s, e);
    if (std::find(d.types.begin(), d.types.end(), t) == d.types.end())
      d.types.push_back(t);
  }
  d.L = (int)d.types.size();
  return d;
}

// ---- shrinking ----

struct ShrinkResult {
  SmallDomain domain;
  SatisfactionForest forest;
  Structure model;
};

// Rebuilds a satisfaction forest over B by walking each tree shape and
// maintaining a pattern element of the source model per node, then
// reconstructs a model of nf of exactly |B| elements.
inline ShrinkResult shrink(const Structure& s, const NormalForm& nf) {
  for (const auto& c : nf.existential)
    if (uses_equality(c.matrix))
      throw SmallModelError("shrink: equality in an existential matrix; the "
                            "pattern map does not preserve equality");
  for (const auto& c : nf.universal)
    if (uses_equality(c.matrix))
      throw SmallModelError("shrink: equality in a universal matrix; the "
                            "pattern map does not preserve equality");
  if (!evaluate(s, as_formula(nf), {}))
    throw SmallModelError("shrink: the source structure does not satisfy the "
                          "normal form");
  SmallDomain dom = build_small_domain(s, nf);
  ExtensionFunction ext = build_ext(dom.K);
  int B = dom.size();

  SatisfactionForest fst;
  fst.domain_size = B;

  // Least source element of a given 1-type.
  auto element_of_type = [&](const OneType& t) {
    for (int e = 0; e < s.size; ++e)
      if (one_type_of(s, e) == t) return e;
    throw SmallModelError("shrink: unrealized 1-type");
  };

  for (int ti = 0; ti < dom.m_ex; ++ti) {
    const auto& conj = nf.existential[ti];
    size_t k = conj.prefix.size();
    SatisfactionTree tree;
    tree.conjunct_index = ti;
    // Leaf labels used so far, keyed by Set^- (sorted labels of the first
    // k-1 levels of the branch).
    std::map<std::vector<int>, std::set<int>> used_leaf;

    // Least source element satisfying the suffix of the matrix below
    // level-1-based position `level`, under the ancestor patterns.
    auto witness = [&](size_t level, const std::vector<int>& pats) {
      FormulaPtr suffix =
          level == k ? conj.matrix
                     : mk_block(std::vector<QuantVar>(conj.prefix.begin() + level,
                                                      conj.prefix.end()),
                                conj.matrix);
      for (int w = 0; w < s.size; ++w) {
        Assignment a;
        for (size_t i = 0; i + 1 < level; ++i) a[conj.prefix[i].var] = pats[i];
        a[conj.prefix[level - 1].var] = w;
        if (evaluate(s, suffix, a)) return w;
      }
      throw SmallModelError("shrink: missing witness (internal fault)");
    };

    // labels/pats are the branch so far (levels 1..level-1).
    std::function<std::vector<ForestNode>(size_t, std::vector<int>&,
                                          std::vector<int>&)>
        children = [&](size_t level, std::vector<int>& labels,
                       std::vector<int>& pats) -> std::vector<ForestNode> {
      std::vector<ForestNode> out;
      auto finish = [&](int label, int pat) {
        ForestNode n;
        n.kind = conj.prefix[level - 1].q;
        n.label = label;
        labels.push_back(label);
        pats.push_back(pat);
        if (level == k) {
          // Branch pre-structure: atoms copied from the source through pat.
          std::map<int, int> pat_of;
          for (size_t i = 0; i < labels.size(); ++i) pat_of[labels[i]] = pats[i];
          std::set<int> H(labels.begin(), labels.end());
          PreStructure p;
          p.sig = nf.sig.without_zero_ary();
          p.elements.assign(H.begin(), H.end());
          for (const auto& key : pre_atom_domain(p.sig, p.elements)) {
            std::vector<int> src;
            for (int b : key.second) src.push_back(pat_of.at(b));
            p.truth[key] = s.holds(key.first, src);
          }
          n.pre = std::move(p);
        } else {
          n.children = children(level + 1, labels, pats);
        }
        labels.pop_back();
        pats.pop_back();
        out.push_back(std::move(n));
      };

      if (conj.prefix[level - 1].q == Quant::Forall) {
        for (int b = 0; b < B; ++b) {
          // Reuse the ancestor pattern on a repeated label, otherwise take
          // the least source element of the label's associated 1-type.
          int pat = -1;
          for (size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == b) pat = pats[i];
          if (pat < 0) pat = element_of_type(dom.type_of(b));
          finish(b, pat);
        }
        return out;
      }

      int w = witness(level, pats);
      int label = -1;
      if (level < k) {
        for (size_t i = 0; i < labels.size(); ++i)
          if (pats[i] == w) label = labels[i];
        if (label < 0) {
          OneType tw = one_type_of(s, w);
          for (int b = 0; b < B; ++b) {
            if (!(dom.type_of(b) == tw)) continue;
            if (std::find(labels.begin(), labels.end(), b) != labels.end())
              continue;
            label = b;
            break;
          }
          if (label < 0)
            throw SmallModelError("shrink: no fresh element of the witness "
                                  "1-type (internal fault)");
        }
      } else {
        // Leaf: the layer is forced by ext, the t coordinate avoids every
        // earlier same-Set^- branch of this tree.
        std::set<int> layer_set;
        for (int b : labels) layer_set.insert(dom.layer_of(b));
        std::vector<int> S(layer_set.begin(), layer_set.end());
        const std::vector<int>& eS = ext.apply(S);
        int layer = -1;
        for (int x : eS)
          if (!layer_set.count(x)) layer = x;
        std::set<int> set_minus(labels.begin(), labels.end());
        std::vector<int> key(set_minus.begin(), set_minus.end());
        OneType tw = one_type_of(s, w);
        int l = 1 + (int)(std::find(dom.types.begin(), dom.types.end(), tw) -
                          dom.types.begin());
        const std::set<int>& used = used_leaf[key];
        for (int t = 1; t <= dom.T; ++t) {
          int cand = dom.index(layer, ti + 1, t, l);
          if (!used.count(cand)) {
            label = cand;
            break;
          }
        }
        if (label < 0)
          throw SmallModelError("shrink: t-coordinate pool exhausted "
                                "(internal fault)");
        used_leaf[key].insert(label);
      }
      finish(label, w);
      return out;
    };

    std::vector<int> labels, pats;
    tree.roots = children(1, labels, pats);
    fst.trees.push_back(std::move(tree));
  }

  std::vector<OneType> fallback(B);
  for (int b = 0; b < B; ++b) fallback[b] = dom.type_of(b);
  Structure model = build_model(fst, nf, &fallback);
  return {std::move(dom), std::move(fst), std::move(model)};
}

} // namespace auf1
