#pragma once

// Command-line front end: every pipeline stage as a subcommand with
// deterministic, verdict-first output.

#include "parse.hpp"
#include "smallmodel.hpp"
#include "solver.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace auf1 {

namespace detail {

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The branch whose 0-ary valuation matches the expanded model.
inline const NormalForm* branch_for(const std::vector<NormalForm>& branches,
                                    const Structure& expanded) {
  for (const auto& nf : branches) {
    bool ok = true;
    for (const auto& [name, val] : nf.valuation) {
      auto it = expanded.props.find(name);
      bool v = it != expanded.props.end() && it->second;
      if (v != val) {
        ok = false;
        break;
      }
    }
    if (ok) return &nf;
  }
  return nullptr;
}

inline std::string set_text(const std::vector<int>& s) {
  std::string t = "{";
  for (size_t i = 0; i < s.size(); ++i)
    t += (i ? "," : "") + std::to_string(s[i]);
  return t + "}";
}

} // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"satisfiability toolkit for the uniform one-dimensional "
               "fragment"};
  app.require_subcommand(1);

  std::string fragment_arg = "auf1m", file_a, file_b, branch_bits;
  bool allow_eq = false, all_branches = false, prune_iso = false,
       want_forest = false;
  int max_size = 1, ext_k = 1;
  double time_budget = 0.0;

  auto* c_check = app.add_subcommand("check", "fragment membership");
  c_check->add_option("--fragment", fragment_arg, "suf1|auf1|auf1m|fo2");
  c_check->add_flag("--allow-equality", allow_eq);
  c_check->add_option("file", file_a)->required();

  auto* c_nnf = app.add_subcommand("nnf", "negation normal form");
  c_nnf->add_flag("--allow-equality", allow_eq);
  c_nnf->add_option("file", file_a)->required();

  auto* c_norm = app.add_subcommand("normalize", "weak normal form / branches");
  c_norm->add_flag("--allow-equality", allow_eq);
  c_norm->add_option("--branch", branch_bits, "print one 0-ary branch");
  c_norm->add_flag("--all", all_branches, "print every 0-ary branch");
  c_norm->add_option("file", file_a)->required();

  auto* c_solve = app.add_subcommand("solve", "bounded satisfiability");
  c_solve->add_option("--max-size", max_size)->required();
  c_solve->add_flag("--allow-equality", allow_eq);
  c_solve->add_flag("--prune-iso", prune_iso);
  c_solve->add_option("--time-budget", time_budget, "seconds");
  c_solve->add_option("file", file_a)->required();

  auto* c_mc = app.add_subcommand("model-check", "evaluate a structure");
  c_mc->add_flag("--allow-equality", allow_eq);
  c_mc->add_option("formula", file_a)->required();
  c_mc->add_option("structure", file_b)->required();

  auto* c_fx = app.add_subcommand("forest-extract", "satisfaction forest of a model");
  c_fx->add_flag("--allow-equality", allow_eq);
  c_fx->add_option("formula", file_a)->required();
  c_fx->add_option("structure", file_b)->required();

  auto* c_fv = app.add_subcommand("forest-verify", "check (T1)-(T5)/(F1)-(F4)");
  c_fv->add_flag("--allow-equality", allow_eq);
  c_fv->add_option("formula", file_a)->required();
  c_fv->add_option("forest", file_b)->required();

  auto* c_fm = app.add_subcommand("forest-to-model", "model of a verified forest");
  c_fm->add_flag("--allow-equality", allow_eq);
  c_fm->add_option("formula", file_a)->required();
  c_fm->add_option("forest", file_b)->required();

  auto* c_sh = app.add_subcommand("shrink", "exponential small model");
  c_sh->add_flag("--forest", want_forest, "print the forest instead");
  c_sh->add_option("formula", file_a)->required();
  c_sh->add_option("structure", file_b)->required();

  auto* c_ext = app.add_subcommand("ext-fn", "extension function table");
  c_ext->add_option("k", ext_k)->required();

  std::vector<std::string> argv = args;
  try {
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }

  try {
    if (app.got_subcommand(c_check)) {
      Fragment frag = fragment_from_name(fragment_arg);
      Problem p = parse_problem(detail::slurp(file_a), allow_eq);
      MembershipReport rep = check_fragment(p.formula, frag);
      out << (rep.accepted ? "ACCEPT" : "REJECT") << "\n";
      for (const auto& v : rep.violations)
        out << "violation " << v.rule << " at " << v.locator << "\n";
      for (const auto& n : rep.notes) out << "note " << n << "\n";
      return rep.accepted ? 0 : 1;
    }

    if (app.got_subcommand(c_nnf)) {
      Problem p = parse_problem(detail::slurp(file_a), allow_eq);
      out << render_signature(p.sig) << render_formula(to_nnf(p.formula))
          << "\n";
      return 0;
    }

    if (app.got_subcommand(c_norm)) {
      Problem p = parse_problem(detail::slurp(file_a), allow_eq);
      WeakNormalForm w = to_weak_normal_form(p.formula, p.sig);
      if (!all_branches && branch_bits.empty()) {
        out << render_signature(w.extended) << render_formula(as_formula(w))
            << "\n";
        return 0;
      }
      std::vector<NormalForm> branches = zero_ary_branches(w);
      bool found = false;
      for (const auto& nf : branches) {
        if (!branch_bits.empty() && nf.branch_bits != branch_bits) continue;
        found = true;
        out << "branch " << (nf.branch_bits.empty() ? "-" : nf.branch_bits)
            << "\n"
            << render_formula(as_formula(nf)) << "\n";
      }
      if (!branch_bits.empty() && !found)
        throw std::runtime_error("no branch " + branch_bits);
      return 0;
    }

    if (app.got_subcommand(c_solve)) {
      Problem p = parse_problem(detail::slurp(file_a), allow_eq);
      SearchConfig cfg;
      cfg.max_size = max_size;
      cfg.isomorphism_pruning = prune_iso;
      if (time_budget > 0) cfg.time_budget = time_budget;
      MembershipReport rep = check_fragment(p.formula, Fragment::AUF1minus);
      SolveResult r;
      if (rep.accepted) {
        r = decide(p.formula, p.sig, cfg);
      } else {
        err << "note: outside the decidable fragment; falling back to plain "
               "bounded search (no completeness bound)\n";
        r = solve_bounded(p.formula, p.sig, cfg);
      }
      switch (r.status) {
        case SolveStatus::SAT:
          out << "SAT\n" << render_structure(*r.model);
          return 0;
        case SolveStatus::UNSAT_COMPLETE:
          out << "UNSAT\n";
          return 1;
        case SolveStatus::UNSAT_UP_TO:
          out << "UNSAT-UP-TO " << r.bound << "\n";
          return 2;
        default:
          out << "UNKNOWN\n";
          return 2;
      }
    }

    if (app.got_subcommand(c_mc)) {
      Problem p = parse_problem(detail::slurp(file_a), allow_eq);
      Structure s = parse_structure(detail::slurp(file_b), p.sig);
      bool ok = evaluate(s, p.formula, {});
      out << (ok ? "PASS" : "FAIL") << "\n";
      return ok ? 0 : 1;
    }

    if (app.got_subcommand(c_fx) || app.got_subcommand(c_sh)) {
      Problem p = parse_problem(detail::slurp(file_a), allow_eq);
      Structure s = parse_structure(detail::slurp(file_b), p.sig);
      if (!evaluate(s, p.formula, {})) {
        out << "FAIL\n";
        err << "the structure does not satisfy the formula\n";
        return 2;
      }
      WeakNormalForm w = to_weak_normal_form(p.formula, p.sig);
      Structure expanded = expand_model(s, p.formula, w);
      std::vector<NormalForm> branches = zero_ary_branches(w);
      const NormalForm* nf = detail::branch_for(branches, expanded);
      if (!nf)
        throw std::runtime_error("internal fault: no branch matches the "
                                 "expanded model");
      Structure reduced = expanded.reduct(nf->sig);
      if (app.got_subcommand(c_fx)) {
        SatisfactionForest fst = extract_forest(reduced, *nf);
        out << render_forest(fst);
        return 0;
      }
      ShrinkResult sr = shrink(reduced, *nf);
      err << "|B| = " << sr.domain.size() << "\n";
      out << (want_forest ? render_forest(sr.forest)
                          : render_structure(sr.model));
      return 0;
    }

    if (app.got_subcommand(c_fv) || app.got_subcommand(c_fm)) {
      Problem p = parse_problem(detail::slurp(file_a), allow_eq);
      WeakNormalForm w = to_weak_normal_form(p.formula, p.sig);
      std::vector<NormalForm> branches = zero_ary_branches(w);
      if (branches.empty()) throw std::runtime_error("no satisfiable branch");
      SatisfactionForest fst =
          parse_forest(detail::slurp(file_b), branches[0].sig);
      for (const auto& nf : branches) {
        ForestReport rep = verify_forest(fst, nf);
        if (!rep.passed()) continue;
        if (app.got_subcommand(c_fv)) {
          out << "PASS\n"
              << "branch " << (nf.branch_bits.empty() ? "-" : nf.branch_bits)
              << "\nm_max " << rep.m_max << "\n";
          return 0;
        }
        out << render_structure(build_model(fst, nf));
        return 0;
      }
      out << "FAIL\n";
      ForestReport rep = verify_forest(fst, branches[0]);
      for (const auto& [cond, c] : rep.conds)
        if (!c.pass) out << "violated " << cond << " at " << c.where << "\n";
      return 1;
    }

    if (app.got_subcommand(c_ext)) {
      ExtensionFunction ext = build_ext(ext_k);
      std::vector<std::pair<std::vector<int>, std::vector<int>>> rows(
          ext.table.begin(), ext.table.end());
      std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.first.size() != b.first.size())
          return a.first.size() < b.first.size();
        return a.first < b.first;
      });
      for (const auto& [s, e] : rows)
        out << detail::set_text(s) << " -> " << detail::set_text(e) << "\n";
      return 0;
    }
  } catch (const ParseError& e) {
    err << "error: line " << e.line << " col " << e.col << ": " << e.what()
        << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  err << "error: no subcommand\n";
  return 3;
}

} // namespace auf1
