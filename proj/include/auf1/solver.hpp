#pragma once

// Satisfiability: the exhaustive enumeration oracle, a grounding-based
// bounded search, the completeness bound, and the full decision pipeline.

#include "fragment.hpp"
#include "normal_form.hpp"
#include "structure.hpp"

#include <chrono>
#include <numeric>

namespace auf1 {

enum class SolveStatus { SAT, UNSAT_UP_TO, UNSAT_COMPLETE, UNKNOWN };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::SAT: return "SAT";
    case SolveStatus::UNSAT_UP_TO: return "UNSAT_UP_TO";
    case SolveStatus::UNSAT_COMPLETE: return "UNSAT_COMPLETE";
    default: return "UNKNOWN";
  }
}

struct SolveStats {
  long long nodes = 0;  // search nodes / structures examined
  double elapsed_seconds = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::UNKNOWN;
  int bound = 0;  // for UNSAT_UP_TO: largest size fully searched
  std::optional<Structure> model;
  std::vector<std::pair<std::string, bool>> branch;  // SAT branch valuation
  std::optional<Structure> branch_model;
  std::optional<NormalForm> branch_nf;
  SolveStats stats;
};

struct SearchConfig {
  int max_size = 1;
  bool isomorphism_pruning = false;
  std::optional<double> time_budget;  // seconds
};

// ---- enumeration oracle ----

namespace detail {

inline std::vector<AtomKey> atom_space(const Signature& sig, int n) {
  std::vector<AtomKey> keys;
  std::vector<std::string> names;
  for (const auto& r : sig.relations) names.push_back(r.name);
  std::sort(names.begin(), names.end());
  for (const auto& name : names) {
    int ar = sig.arity_of(name);
    std::vector<int> tup(ar, 0);
    while (true) {
      keys.push_back({name, tup});
      int i = ar - 1;
      while (i >= 0 && tup[i] == n - 1) tup[i--] = 0;
      if (i < 0) break;
      ++tup[i];
    }
  }
  return keys;
}

inline Structure structure_from_bits(const Signature& sig, int n,
                                     const std::vector<AtomKey>& keys,
                                     const std::vector<char>& bits) {
  Structure s(sig, n);
  for (size_t i = 0; i < keys.size(); ++i)
    if (bits[i]) s.set(keys[i].first, keys[i].second, true);
  return s;
}

// True when `bits` is the lexicographically least among all domain
// permutations of the structure it encodes.
inline bool lex_least_representative(const Signature& sig, int n,
                                     const std::vector<AtomKey>& keys,
                                     const std::vector<char>& bits) {
  std::map<AtomKey, size_t> pos;
  for (size_t i = 0; i < keys.size(); ++i) pos[keys[i]] = i;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  while (std::next_permutation(perm.begin(), perm.end())) {
    // Compare the permuted structure's bit string with the original.
    for (size_t i = 0; i < keys.size(); ++i) {
      AtomKey mapped = keys[i];
      for (int& x : mapped.second) x = perm[x];
      char v = bits[pos[mapped]];
      if (v != bits[i]) {
        if (v < bits[i]) return false;  // a smaller representative exists
        break;                          // permuted string is larger; next perm
      }
    }
  }
  return true;
}

} // namespace detail

// Calls fn on every structure over sig with domain {0..n-1}, in
// lexicographic order of relation contents (all-false first); fn returning
// false stops the stream. With pruning, only lex-least class representatives.
inline void enumerate_structures(const Signature& sig, int n,
                                 const std::function<bool(const Structure&)>& fn,
                                 bool isomorphism_pruning = false) {
  auto keys = detail::atom_space(sig, n);
  std::vector<char> bits(keys.size(), 0);
  while (true) {
    if (!isomorphism_pruning ||
        detail::lex_least_representative(sig, n, keys, bits))
      if (!fn(detail::structure_from_bits(sig, n, keys, bits))) return;
    // Binary counting with the first atom as the most significant bit.
    int i = (int)bits.size() - 1;
    while (i >= 0 && bits[i]) bits[i--] = 0;
    if (i < 0) return;
    bits[i] = 1;
  }
}

// ---- grounding engine ----

namespace detail {

struct Ground {
  // node: op 'a' = And, 'o' = Or, 'l' = literal, 't'/'f' = constants
  struct Node {
    char op;
    std::vector<int> kids;  // children for a/o
    int var = -1;           // for l
    bool pos = true;
  };
  std::vector<Node> nodes;
  std::vector<AtomKey> vars;
  int root = -1;

  int add(Node n) {
    nodes.push_back(std::move(n));
    return (int)nodes.size() - 1;
  }
};

// Grounds an NNF formula over domain {0..n-1}, folding equality literals
// and Boolean constants away.
inline int ground_rec(Ground& g, std::map<AtomKey, int>& var_of,
                      const FormulaPtr& f, Assignment& a, int n) {
  auto mk_const = [&](bool v) { return g.add({v ? 't' : 'f', {}, -1, true}); };
  auto mk_lit = [&](const std::string& rel, const std::vector<int>& tup,
                    bool pos) {
    AtomKey key{rel, tup};
    auto it = var_of.find(key);
    int v;
    if (it == var_of.end()) {
      v = (int)g.vars.size();
      g.vars.push_back(key);
      var_of[key] = v;
    } else {
      v = it->second;
    }
    return g.add({'l', {}, v, pos});
  };
  auto junction = [&](char op, const std::vector<FormulaPtr>& parts) {
    std::vector<int> kids;
    for (const auto& p : parts) {
      int k = ground_rec(g, var_of, p, a, n);
      char kop = g.nodes[k].op;
      if (kop == (op == 'a' ? 'f' : 't')) return k;       // absorbing
      if (kop == (op == 'a' ? 't' : 'f')) continue;        // neutral
      if (kop == op) {
        for (int kk : g.nodes[k].kids) kids.push_back(kk);
        continue;
      }
      kids.push_back(k);
    }
    if (kids.empty()) return mk_const(op == 'a');
    if (kids.size() == 1) return kids[0];
    return g.add({op, std::move(kids), -1, true});
  };

  switch (f->kind) {
    case Formula::Kind::True: return mk_const(true);
    case Formula::Kind::False: return mk_const(false);
    case Formula::Kind::Atom: {
      std::vector<int> tup;
      for (const auto& v : f->args) tup.push_back(a.at(v));
      return mk_lit(f->rel, tup, true);
    }
    case Formula::Kind::Eq:
      return mk_const(a.at(f->args[0]) == a.at(f->args[1]));
    case Formula::Kind::Not: {
      const Formula& in = *f->kids[0];
      if (in.kind == Formula::Kind::Atom) {
        std::vector<int> tup;
        for (const auto& v : in.args) tup.push_back(a.at(v));
        return mk_lit(in.rel, tup, false);
      }
      if (in.kind == Formula::Kind::Eq)
        return mk_const(a.at(in.args[0]) != a.at(in.args[1]));
      throw EvalError("ground: formula is not in negation normal form");
    }
    case Formula::Kind::And: return junction('a', f->kids);
    case Formula::Kind::Or: return junction('o', f->kids);
    case Formula::Kind::Block: {
      // Expand one prefix position at a time.
      std::function<int(size_t)> expand = [&](size_t i) -> int {
        if (i == f->prefix.size()) return ground_rec(g, var_of, f->kids[0], a, n);
        char op = f->prefix[i].q == Quant::Forall ? 'a' : 'o';
        std::vector<int> kids;
        for (int e = 0; e < n; ++e) {
          a[f->prefix[i].var] = e;
          int k = expand(i + 1);
          a.erase(f->prefix[i].var);
          char kop = g.nodes[k].op;
          if (kop == (op == 'a' ? 'f' : 't')) return k;
          if (kop == (op == 'a' ? 't' : 'f')) continue;
          kids.push_back(k);
        }
        if (kids.empty()) return g.add({op == 'a' ? 't' : 'f', {}, -1, true});
        if (kids.size() == 1) return kids[0];
        return g.add({op, std::move(kids), -1, true});
      };
      return expand(0);
    }
    default:
      throw EvalError("ground: implication outside negation normal form");
  }
}

inline Ground ground(const FormulaPtr& f, int n) {
  Ground g;
  std::map<AtomKey, int> var_of;
  Assignment a;
  g.root = ground_rec(g, var_of, to_nnf(f), a, n);
  return g;
}

// 3-valued evaluation: 1 true, 0 false, -1 unknown; on unknown, `pick`
// receives the first unknown variable in evaluation order.
inline int eval_ground(const Ground& g, int node, const std::vector<char>& asg,
                       int& pick) {
  const Ground::Node& nd = g.nodes[node];
  switch (nd.op) {
    case 't': return 1;
    case 'f': return 0;
    case 'l': {
      char v = asg[nd.var];
      if (v < 0) {
        if (pick < 0) pick = nd.var;
        return -1;
      }
      return nd.pos ? v : 1 - v;
    }
    default: {
      bool is_and = nd.op == 'a';
      bool unknown = false;
      int local_pick = -1;
      for (int k : nd.kids) {
        int sub_pick = -1;
        int v = eval_ground(g, k, asg, sub_pick);
        if (v == (is_and ? 0 : 1)) return v;
        if (v < 0) {
          unknown = true;
          if (local_pick < 0) local_pick = sub_pick;
        }
      }
      if (unknown) {
        if (pick < 0) pick = local_pick;
        return -1;
      }
      return is_and ? 1 : 0;
    }
  }
}

} // namespace detail

// ---- bounded search ----

// Searches domain sizes 1..max_size in order. Satisfiability per size is
// decided by grounding the sentence and running a deterministic
// backtracking search (branching on the first undetermined atom in
// evaluation order, false first), so the first model found is the same on
// every run.
inline SolveResult solve_bounded(const FormulaPtr& f, const Signature& sig,
                                 const SearchConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  SolveResult res;
  for (int n = 1; n <= cfg.max_size; ++n) {
    detail::Ground g = detail::ground(f, n);
    std::vector<char> asg(g.vars.size(), -1);
    std::vector<int> trail;
    bool timeout = false;
    std::function<bool()> dfs = [&]() {
      ++res.stats.nodes;
      if (cfg.time_budget && (res.stats.nodes & 1023) == 0 &&
          elapsed() > *cfg.time_budget) {
        timeout = true;
        return false;
      }
      int pick = -1;
      int v = detail::eval_ground(g, g.root, asg, pick);
      if (v == 1) return true;
      if (v == 0) return false;
      for (char val : {0, 1}) {
        asg[pick] = val;
        if (dfs()) return true;
        if (timeout) return false;
      }
      asg[pick] = -1;
      return false;
    };
    bool sat = g.nodes[g.root].op != 'f' && dfs();
    if (timeout) {
      res.status = SolveStatus::UNKNOWN;
      res.bound = n - 1;
      res.stats.elapsed_seconds = elapsed();
      return res;
    }
    if (sat) {
      Structure s(sig, n);
      for (size_t i = 0; i < g.vars.size(); ++i)
        if (asg[i] == 1) s.set(g.vars[i].first, g.vars[i].second, true);
      res.status = SolveStatus::SAT;
      res.model = std::move(s);
      res.stats.elapsed_seconds = elapsed();
      return res;
    }
  }
  res.status = SolveStatus::UNSAT_UP_TO;
  res.bound = cfg.max_size;
  res.stats.elapsed_seconds = elapsed();
  return res;
}

inline SolveResult solve_bounded(const NormalForm& nf, const SearchConfig& cfg) {
  return solve_bounded(as_formula(nf), nf.sig, cfg);
}

// ---- theoretical completeness bound ----

// 2K * m_exists * (K-1)^(K-1) * 2^(#single-variable atoms over the
// signature); the type count uses all 1-types rather than realized ones.
inline long long theoretical_bound(const NormalForm& nf) {
  if (nf.existential.empty()) return 1;
  long long K = nf.K();
  long long t = 1;
  for (int i = 0; i < K - 1; ++i) t *= K - 1;
  int atoms1 = 0;
  for (const auto& r : nf.sig.relations)
    if (r.arity >= 1) ++atoms1;
  long long types = 1;
  for (int i = 0; i < atoms1; ++i) types *= 2;
  return 2 * K * (long long)nf.existential.size() * t * types;
}

// ---- the decision pipeline ----

inline SolveResult decide(const FormulaPtr& f, const Signature& sig,
                          const SearchConfig& cfg) {
  MembershipReport rep = check_fragment(f, Fragment::AUF1minus);
  if (!rep.accepted)
    throw FragmentError("decide: the sentence is outside the fragment (" +
                        (rep.violations.empty() ? std::string("unknown")
                                                : rep.violations[0].rule) +
                        ")");
  bool equality = uses_equality(f);
  WeakNormalForm w = to_weak_normal_form(f, sig);
  std::vector<NormalForm> branches = zero_ary_branches(w);

  auto t0 = std::chrono::steady_clock::now();
  SolveResult out;
  bool all_complete = true;
  bool any_unknown = false;
  int weakest = cfg.max_size;  // smallest fully-searched size over open branches
  for (const auto& nf : branches) {
    long long tb = theoretical_bound(nf);
    SearchConfig sub = cfg;
    sub.max_size = (int)std::min<long long>(cfg.max_size, tb);
    if (cfg.time_budget) {
      double left = *cfg.time_budget -
                    std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
      if (left <= 0) {
        any_unknown = true;
        all_complete = false;
        break;
      }
      sub.time_budget = left;
    }
    SolveResult r = solve_bounded(nf, sub);
    out.stats.nodes += r.stats.nodes;
    if (r.status == SolveStatus::SAT) {
      out.status = SolveStatus::SAT;
      out.branch = nf.valuation;
      out.branch_nf = nf;
      out.branch_model = r.model;
      // The reduct to the original signature is a model of the input.
      Structure reduced = r.model->reduct(sig);
      for (const auto& [name, val] : nf.valuation)
        if (sig.has(name) && sig.arity_of(name) == 0) reduced.props[name] = val;
      out.model = std::move(reduced);
      out.stats.elapsed_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      return out;
    }
    if (r.status == SolveStatus::UNKNOWN) {
      any_unknown = true;
      all_complete = false;
      weakest = std::min(weakest, r.bound);
    } else if (equality || sub.max_size < tb) {
      // With equality the bound argument does not apply (no finite model
      // property), so even an exhausted branch is only a bounded guarantee.
      all_complete = false;
      weakest = std::min(weakest, r.bound);
    }
  }
  out.stats.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (all_complete && !equality) {
    out.status = SolveStatus::UNSAT_COMPLETE;
    out.bound = cfg.max_size;
  } else if (any_unknown) {
    out.status = SolveStatus::UNKNOWN;
    out.bound = weakest;
  } else {
    out.status = SolveStatus::UNSAT_UP_TO;
    out.bound = weakest;
  }
  return out;
}

} // namespace auf1
