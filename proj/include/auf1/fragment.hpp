#pragma once

// Fragment membership: sUF1, AUF1, AUF1- and FO2.
//
// A parsed AST only shows maximal quantifier chains, so a chain is accepted
// iff SOME split into consecutive blocks satisfies the fragment's formation
// rules.  segment_blocks() additionally materializes one such split (fewest
// blocks, longest first block) as nested Block nodes, which is the shape the
// normal-form transformation consumes.

#include "formula.hpp"

#include <optional>
#include <string>
#include <vector>

namespace auf1 {

enum class Fragment { sUF1, AUF1, AUF1minus, FO2 };

inline Fragment fragment_from_name(const std::string& s) {
  if (s == "suf1") return Fragment::sUF1;
  if (s == "auf1") return Fragment::AUF1;
  if (s == "auf1m") return Fragment::AUF1minus;
  if (s == "fo2") return Fragment::FO2;
  throw std::runtime_error("unknown fragment identifier: " + s);
}

inline std::string fragment_name(Fragment f) {
  switch (f) {
    case Fragment::sUF1: return "suf1";
    case Fragment::AUF1: return "auf1";
    case Fragment::AUF1minus: return "auf1m";
    case Fragment::FO2: return "fo2";
  }
  return "?";
}

struct Violation {
  std::string locator;  // path into the AST, e.g. "1/body/0"
  std::string rule;     // one-dimensionality | uniformity | block-shape |
                        // variable-count | equality-use
};

struct MembershipReport {
  Fragment fragment;
  bool accepted = false;
  std::vector<Violation> violations;
  std::vector<std::string> notes;
};

namespace detail {

struct FragmentChecker {
  Fragment frag;
  std::vector<Violation>* vio;       // null = silent validity probe
  std::vector<std::string>* notes;

  void violation(const std::string& loc, const std::string& rule) const {
    if (vio) vio->push_back({loc, rule});
  }
  void note(const std::string& n) const {
    if (notes) {
      for (const auto& x : *notes) if (x == n) return;
      notes->push_back(n);
    }
  }

  bool segment_shape_ok(const std::vector<QuantVar>& prefix, size_t i,
                        size_t j) const {
    switch (frag) {
      case Fragment::sUF1:
        for (size_t k = i + 1; k < j; ++k)
          if (prefix[k].q != prefix[i].q) return false;
        return true;
      case Fragment::AUF1:
        return true;
      case Fragment::AUF1minus: {
        bool all_forall = true;
        for (size_t k = i; k < j; ++k)
          if (prefix[k].q != Quant::Forall) all_forall = false;
        return all_forall || prefix[j - 1].q == Quant::Exists;
      }
      default:
        return false;
    }
  }

  // Boolean decomposition of a block matrix: every leaf must be a full atom
  // over X, an atom with at most one variable, or a fragment member.
  bool matrix_ok(const FormulaPtr& body, const std::set<std::string>& X,
                 const std::string& loc) const {
    switch (body->kind) {
      case Formula::Kind::Not:
      case Formula::Kind::And:
      case Formula::Kind::Or:
      case Formula::Kind::Imp: {
        bool ok = true;
        for (size_t i = 0; i < body->kids.size(); ++i)
          ok &= matrix_ok(body->kids[i], X, loc + "/" + std::to_string(i));
        return ok;
      }
      case Formula::Kind::Atom: {
        std::set<std::string> used(body->args.begin(), body->args.end());
        if (used.size() <= 1 || used == X) return true;
        violation(loc, "uniformity");
        return false;
      }
      case Formula::Kind::Eq: {
        if (frag == Fragment::sUF1) {
          violation(loc, "equality-use");
          return false;
        }
        note("equality used freely (excluded from the finite-model theorems)");
        return true;
      }
      case Formula::Kind::Block:
        return in_fragment(body, loc);
      case Formula::Kind::True:
      case Formula::Kind::False:
        return true;
    }
    return false;
  }

  // Is the chain suffix starting at position i a fragment member?
  bool chain_ok(const std::vector<QuantVar>& prefix, size_t i,
                const FormulaPtr& body, const std::set<std::string>& body_fv,
                const std::string& loc, bool record_failures) const {
    size_t n = prefix.size();
    // One-dimensionality for the segment starting at i: the suffix formula
    // leaves at most one variable free.
    std::set<std::string> rest_fv = body_fv;
    for (size_t k = i; k < n; ++k) rest_fv.erase(prefix[k].var);
    if (rest_fv.size() > 1) {
      if (record_failures) violation(loc, "one-dimensionality");
      return false;
    }
    for (size_t j = n; j > i; --j) {  // prefer the longest first segment
      if (!segment_shape_ok(prefix, i, j)) continue;
      if (j == n) {
        std::set<std::string> X = rest_fv;
        for (size_t k = i; k < n; ++k) X.insert(prefix[k].var);
        FragmentChecker silent{frag, nullptr, notes};
        if (silent.matrix_ok(body, X, loc + "/body")) return true;
      } else {
        FragmentChecker silent{frag, nullptr, notes};
        if (silent.chain_ok(prefix, j, body, body_fv, loc, false)) return true;
      }
    }
    if (record_failures) {
      // No split works; diagnose against the whole-chain reading.
      size_t before = vio ? vio->size() : 0;
      if (!segment_shape_ok(prefix, i, n)) violation(loc, "block-shape");
      std::set<std::string> X = rest_fv;
      for (size_t k = i; k < n; ++k) X.insert(prefix[k].var);
      matrix_ok(body, X, loc + "/body");
      if (vio && vio->size() == before) violation(loc, "block-shape");
    }
    return false;
  }

  bool in_fragment(const FormulaPtr& f, const std::string& loc) const {
    switch (f->kind) {
      case Formula::Kind::Atom: {
        std::set<std::string> used(f->args.begin(), f->args.end());
        if (used.size() <= 1) return true;
        violation(loc, "uniformity");
        return false;
      }
      case Formula::Kind::Eq:
        if (frag == Fragment::sUF1) {
          violation(loc, "equality-use");
          return false;
        }
        note("equality used freely (excluded from the finite-model theorems)");
        return true;
      case Formula::Kind::Not:
      case Formula::Kind::And:
      case Formula::Kind::Or:
      case Formula::Kind::Imp: {
        bool ok = true;
        for (size_t i = 0; i < f->kids.size(); ++i)
          ok &= in_fragment(f->kids[i], loc + "/" + std::to_string(i));
        return ok;
      }
      case Formula::Kind::Block: {
        std::set<std::string> body_fv = free_variables(f->body());
        bool vacuous = false;
        for (const auto& qv : f->prefix)
          if (!body_fv.count(qv.var)) vacuous = true;
        if (vacuous) note("vacuous quantification accepted");
        return chain_ok(f->prefix, 0, f->body(), body_fv, loc, true);
      }
      case Formula::Kind::True:
      case Formula::Kind::False:
        return true;
    }
    return false;
  }
};

inline void fo2_check(const FormulaPtr& f, std::vector<Violation>& vio,
                      const std::string& loc) {
  if (f->kind == Formula::Kind::Atom && f->args.size() > 2)
    vio.push_back({loc, "variable-count"});
  for (size_t i = 0; i < f->kids.size(); ++i)
    fo2_check(f->kids[i], vio, loc + "/" + std::to_string(i));
}

} // namespace detail

inline MembershipReport check_fragment(const FormulaPtr& f, Fragment frag) {
  MembershipReport rep;
  rep.fragment = frag;
  if (frag == Fragment::FO2) {
    auto names = all_variable_names(f);
    if (names.size() > 2)
      rep.violations.push_back({"", "variable-count"});
    detail::fo2_check(f, rep.violations, "");
    if (uses_equality(f))
      rep.notes.push_back("equality used (tolerated in FO2)");
    rep.accepted = rep.violations.empty();
    return rep;
  }
  FormulaPtr g = f;
  if (frag == Fragment::AUF1minus) {
    g = to_nnf(g);
    rep.notes.push_back("checked after conversion to NNF");
  }
  g = infer_blocks(g);
  detail::FragmentChecker c{frag, &rep.violations, &rep.notes};
  c.in_fragment(g, "");
  rep.accepted = rep.violations.empty();
  return rep;
}

inline MembershipReport check_fragment(const FormulaPtr& f,
                                       const std::string& frag) {
  return check_fragment(f, fragment_from_name(frag));
}

// Rewrites every maximal quantifier chain of an NNF formula into explicitly
// nested blocks following a valid AUF1- split (fewest blocks, longest first
// block).  Throws if the formula is outside AUF1-.
inline FormulaPtr segment_blocks(const FormulaPtr& f) {
  struct Seg {
    detail::FragmentChecker probe{Fragment::AUF1minus, nullptr, nullptr};

    FormulaPtr run(const FormulaPtr& f) {
      switch (f->kind) {
        case Formula::Kind::Atom:
        case Formula::Kind::Eq:
        case Formula::Kind::True:
        case Formula::Kind::False:
          return f;
        case Formula::Kind::Block: {
          FormulaPtr body = run(f->body());
          return split_chain(f->prefix, 0, body);
        }
        default: {
          std::vector<FormulaPtr> kids;
          for (const auto& k : f->kids) kids.push_back(run(k));
          auto g = std::make_shared<Formula>();
          g->kind = f->kind;
          g->kids = std::move(kids);
          return g;
        }
      }
    }

    FormulaPtr split_chain(const std::vector<QuantVar>& prefix, size_t i,
                           const FormulaPtr& body) {
      size_t n = prefix.size();
      std::set<std::string> body_fv = free_variables(body);
      // DP over split points: fewest segments, then longest first segment.
      std::vector<int> best(n + 1, -1);
      std::vector<size_t> choice(n + 1, 0);
      best[n] = 0;
      for (size_t i2 = n; i2-- > 0;) {
        std::set<std::string> rest_fv = body_fv;
        for (size_t k = i2; k < n; ++k) rest_fv.erase(prefix[k].var);
        if (rest_fv.size() > 1) continue;
        for (size_t j = n; j > i2; --j) {
          if (!probe.segment_shape_ok(prefix, i2, j)) continue;
          if (j == n) {
            std::set<std::string> X = rest_fv;
            for (size_t k = i2; k < n; ++k) X.insert(prefix[k].var);
            if (!probe.matrix_ok(body, X, "")) continue;
            best[i2] = 1;
            choice[i2] = j;
            break;  // j descending: first hit has the longest segment
          }
          if (best[j] < 0) continue;
          if (best[i2] < 0 || best[j] + 1 < best[i2]) {
            best[i2] = best[j] + 1;
            choice[i2] = j;
          }
        }
      }
      if (best[i] < 0)
        throw std::runtime_error("formula is outside AUF1-");
      // Rebuild innermost-first.
      std::vector<std::pair<size_t, size_t>> segs;
      for (size_t p = i; p < n; p = choice[p]) segs.push_back({p, choice[p]});
      FormulaPtr out = body;
      for (size_t k = segs.size(); k-- > 0;) {
        std::vector<QuantVar> pre(prefix.begin() + segs[k].first,
                                  prefix.begin() + segs[k].second);
        out = mk_block(std::move(pre), out);
      }
      return out;
    }
  };
  Seg s;
  return s.run(infer_blocks(f));
}

} // namespace auf1
