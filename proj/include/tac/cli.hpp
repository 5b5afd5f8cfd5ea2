#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tac/algebra.hpp"
#include "tac/completion.hpp"
#include "tac/constructions.hpp"
#include "tac/guard.hpp"
#include "tac/spec_file.hpp"

namespace tac {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int negative = 1;  // member/equal answered no
inline constexpr int guard_failed = 2;
inline constexpr int step_limit = 3;
inline constexpr int usage = 64;
inline constexpr int data = 65;
inline constexpr int internal = 70;
}  // namespace exit_code

/// Raised when a result violates an invariant the pipeline relies on.
class InvariantBreach : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace cli_detail {

template <class T>
const T& pick(const std::vector<Named<T>>& v, const std::string& name, const std::string& what,
              const std::string& path) {
  if (!name.empty()) {
    for (const auto& n : v)
      if (n.name == name) return n.value;
    throw Error(path + ": no " + what + " named '" + name + "'");
  }
  if (v.empty()) throw Error(path + ": no " + what + " section");
  return v.front().value;
}

template <class T>
std::string pick_name(const std::vector<Named<T>>& v, const std::string& name) {
  if (!name.empty()) return name;
  return v.empty() ? "A" : v.front().name;
}

/// Ops header, optional TRS (so the constructor split survives), automaton.
inline std::string automaton_document(const Signature& sig, const TreeAutomaton& a,
                                      const std::string& name, const Trs* trs = nullptr,
                                      const std::string& trs_name = "R",
                                      const std::vector<std::string>& vars = {}) {
  std::ostringstream os;
  os << print_ops(sig);
  if (trs && !trs->empty()) {
    if (!vars.empty()) {
      os << "Vars";
      for (const auto& v : vars) os << ' ' << v;
      os << "\n";
    }
    os << "TRS " << trs_name << "\n";
    for (const Rule& r : trs->rules()) os << "  " << to_string(r) << "\n";
  }
  os << print_automaton(a, name);
  return os.str();
}

inline GuardMode infer_mode(const Trs& trs, const EquationSet& eqs) {
  if (trs.signature().fully_sorted() && !trs.signature().sorts().empty()) return GuardMode::sorted;
  if (!trs.empty() && missing_equations(eqs, r_equations(trs)).empty()) return GuardMode::functional;
  return GuardMode::general;
}

struct Selection {
  std::string trs, automaton, equations;

  void attach(CLI::App* app) {
    app->add_option("--trs", trs, "TRS section name");
    app->add_option("--automaton", automaton, "Automaton section name");
    app->add_option("--equations", equations, "Equations section name");
  }
};

/// The TRS of `spec`, or an empty one over its signature.
inline Trs trs_or_empty(const SpecFile& spec, const std::string& name, const std::string& path) {
  if (spec.trs.empty() && name.empty()) return Trs(spec.signature, {});
  return pick(spec.trs, name, "TRS", path);
}

inline EquationSet equations_or_empty(const SpecFile& spec, const std::string& name,
                                      const std::string& path) {
  if (spec.equations.empty() && name.empty()) return {};
  return pick(spec.equations, name, "Equations", path);
}

inline TreeAutomaton data_terms_for(const SpecFile& spec, const std::string& trs_name,
                                    const std::string& path) {
  if (spec.trs.empty()) throw Error(path + ": --with-data-terms needs a TRS to split constructors");
  Trs trs = with_constructor_split(pick(spec.trs, trs_name, "TRS", path));
  return data_term_automaton(trs.signature());
}

}  // namespace cli_detail

/// Runs one command line (without the program name). Returns the exit code.
inline int run_command(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"Tree automata completion with a termination guard", "tac"};
  app.require_subcommand(1);
  app.fallthrough(false);

  std::string spec_path, other_path, term_text, trace_path, mode_name, format = "table";
  std::size_t max_steps = 1000, depth = 0, diagnose = 0;
  bool assume_sc = false, assume_coh = false, skip_guard = false, with_data = false;
  Selection sel;

  auto add_assumptions = [&](CLI::App* c) {
    c->add_flag("--assume-sufficiently-complete", assume_sc, "Assert sufficient completeness");
    c->add_flag("--assume-re-coherent", assume_coh, "Assert R/E-coherence of the initial automaton");
  };

  auto* check = app.add_subcommand("check", "Check the termination guard");
  check->add_option("spec", spec_path, "Specification file")->required();
  check->add_option("--mode", mode_name, "general, functional or sorted")
      ->required()
      ->check(CLI::IsMember({"general", "functional", "sorted"}));
  add_assumptions(check);
  check->add_option("--format", format, "table or kv")->check(CLI::IsMember({"table", "kv"}));
  check->add_option("--diagnose", diagnose, "Depth of the bounded heuristic diagnostics");
  sel.attach(check);

  auto* comp = app.add_subcommand("complete", "Run completion and print the final automaton");
  comp->add_option("spec", spec_path, "Specification file")->required();
  comp->add_option("--max-steps", max_steps, "Step limit");
  comp->add_option("--trace", trace_path, "Write the completion trace to FILE");
  comp->add_flag("--skip-guard", skip_guard, "Run even if the guard fails");
  comp->add_option("--mode", mode_name, "Guard mode (inferred when omitted)")
      ->check(CLI::IsMember({"general", "functional", "sorted"}));
  comp->add_flag("--intersect-data-terms", with_data,
                 "Print the intersection with the well-sorted data terms instead");
  add_assumptions(comp);
  sel.attach(comp);

  auto* irr = app.add_subcommand("irr", "Automaton of the irreducible terms of a TRS");
  irr->add_option("spec", spec_path, "Specification file")->required();
  irr->add_option("--trs", sel.trs, "TRS section name");

  auto* inter = app.add_subcommand("intersect", "Product automaton");
  inter->add_option("spec", spec_path, "Specification file")->required();
  inter->add_option("other", other_path, "Second specification file");
  inter->add_flag("--with-data-terms", with_data, "Intersect with the well-sorted data terms");
  inter->add_option("--automaton", sel.automaton, "Automaton section name");
  inter->add_option("--trs", sel.trs, "TRS used for the constructor split");

  auto* mem = app.add_subcommand("member", "Exit 0 iff the automaton accepts the term");
  mem->add_option("spec", spec_path, "Specification file")->required();
  mem->add_option("--term", term_text, "Ground term")->required();
  mem->add_option("--automaton", sel.automaton, "Automaton section name");

  auto* en = app.add_subcommand("enumerate", "Accepted terms up to a height");
  en->add_option("spec", spec_path, "Specification file")->required();
  en->add_option("--depth", depth, "Maximal height")->required();
  en->add_option("--automaton", sel.automaton, "Automaton section name");

  auto* eq = app.add_subcommand("equal", "Exit 0 iff the two automata have the same language");
  eq->add_option("spec", spec_path, "First specification file")->required();
  eq->add_option("other", other_path, "Second specification file")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << "tac: " << e.what() << "\n";
    return exit_code::usage;
  }

  try {
    if (check->parsed()) {
      SpecFile spec = read_spec_file(spec_path);
      Trs trs = trs_or_empty(spec, sel.trs, spec_path);
      EquationSet eqs = equations_or_empty(spec, sel.equations, spec_path);
      GuardOptions go;
      go.assumptions = {assume_sc, assume_coh};
      if (!spec.automata.empty() || !sel.automaton.empty())
        go.initial = &pick(spec.automata, sel.automaton, "Automaton", spec_path);
      go.diagnostic_depth = diagnose;
      GuardReport r = guard_check(trs, eqs, *parse_guard_mode(mode_name), go);
      out << (format == "kv" ? format_key_values(r) : format_table(r));
      return r.pass ? exit_code::ok : exit_code::guard_failed;
    }

    if (comp->parsed()) {
      SpecFile spec = read_spec_file(spec_path);
      Trs trs = with_constructor_split(trs_or_empty(spec, sel.trs, spec_path));
      EquationSet eqs = equations_or_empty(spec, sel.equations, spec_path);
      const TreeAutomaton& a0 = pick(spec.automata, sel.automaton, "Automaton", spec_path);
      const GuardMode mode = mode_name.empty() ? infer_mode(trs, eqs) : *parse_guard_mode(mode_name);

      std::optional<GuardReport> report;
      if (!skip_guard) {
        GuardOptions go;
        go.assumptions = {assume_sc, assume_coh};
        go.initial = &a0;
        report = guard_check(trs, eqs, mode, go);
        auto failures = report->verifiable_failures();
        if (!failures.empty()) {
          err << "tac: termination guard (" << to_string(mode) << ") failed:\n";
          for (const auto* c : failures) err << "  " << c->name << ": " << c->detail << "\n";
          err << "use --skip-guard to run anyway\n";
          return exit_code::guard_failed;
        }
        for (const auto& c : report->checks) {
          if (c.assertion && c.status == CheckStatus::failed)
            err << "tac: warning: " << c.name << " not asserted; termination relies on it\n";
        }
      }

      CompletionOptions co;
      co.max_steps = max_steps;
      co.keep_history = report && report->bound;
      CompletionResult res = complete(a0, trs, eqs, co);
      for (const auto& w : res.warnings) err << "tac: warning: " << w << "\n";

      if (report && report->bound) {
        const auto k = mode == GuardMode::general ? trs.signature().names()
                                                  : trs.signature().constructors();
        for (std::size_t i = 0; i < res.history.size(); ++i) {
          const std::size_t n = count_states_recognizing(res.history[i], k);
          if (n > *report->bound) {
            throw InvariantBreach("A^" + std::to_string(i) + " has " + std::to_string(n) +
                                  " states recognizing K-terms, above the bound " +
                                  std::to_string(*report->bound));
          }
        }
      }

      if (!trace_path.empty()) {
        std::ofstream tf(trace_path, std::ios::binary);
        if (!tf) throw Error("cannot write '" + trace_path + "'");
        for (const auto& line : trace_lines(res)) tf << line << "\n";
        tf << "outcome: " << (res.outcome == Outcome::fixpoint ? "fixpoint" : "step-limit")
           << " after " << res.steps << " steps\n";
      }

      const std::string trs_name = pick_name(spec.trs, sel.trs);
      const std::string a_name = pick_name(spec.automata, sel.automaton);
      if (with_data) {
        TreeAutomaton data = data_term_automaton(trs.signature());
        TreeAutomaton result = trim(intersection(res.automaton, data));
        out << automaton_document(spec.signature, result, a_name + "_data", &trs, trs_name,
                                  spec.variables);
      } else {
        out << automaton_document(spec.signature, res.automaton, a_name + "_complete", &trs,
                                  trs_name, spec.variables);
      }
      err << "tac: " << (res.outcome == Outcome::fixpoint ? "fixpoint" : "step limit")
          << " after " << res.steps << " steps, " << res.automaton.transition_count()
          << " transitions\n";
      return res.outcome == Outcome::fixpoint ? exit_code::ok : exit_code::step_limit;
    }

    if (irr->parsed()) {
      SpecFile spec = read_spec_file(spec_path);
      const Trs& trs = pick(spec.trs, sel.trs, "TRS", spec_path);
      out << automaton_document(spec.signature, irr_automaton(trs), "Irr");
      return exit_code::ok;
    }

    if (inter->parsed()) {
      SpecFile spec = read_spec_file(spec_path);
      const TreeAutomaton& a = pick(spec.automata, sel.automaton, "Automaton", spec_path);
      TreeAutomaton b;
      if (with_data == !other_path.empty()) {
        err << "tac: intersect needs either a second spec or --with-data-terms\n";
        return exit_code::usage;
      }
      if (with_data) {
        b = data_terms_for(spec, sel.trs, spec_path);
      } else {
        SpecFile other = read_spec_file(other_path);
        b = pick(other.automata, "", "Automaton", other_path);
      }
      TreeAutomaton result = trim(intersection(a, b));
      const Trs* trs = spec.trs.empty() ? nullptr : &pick(spec.trs, sel.trs, "TRS", spec_path);
      out << automaton_document(spec.signature, result, "Intersection", trs,
                                pick_name(spec.trs, sel.trs), spec.variables);
      return exit_code::ok;
    }

    if (mem->parsed()) {
      SpecFile spec = read_spec_file(spec_path);
      const TreeAutomaton& a = pick(spec.automata, sel.automaton, "Automaton", spec_path);
      Term t = parse_term(spec, term_text);
      if (!t.is_ground()) throw Error("term must be ground: " + to_string(t));
      const bool yes = accepts(a, t);
      out << (yes ? "accepted" : "rejected") << "\n";
      return yes ? exit_code::ok : exit_code::negative;
    }

    if (en->parsed()) {
      SpecFile spec = read_spec_file(spec_path);
      const TreeAutomaton& a = pick(spec.automata, sel.automaton, "Automaton", spec_path);
      for (const Term& t : enumerate(a, depth)) out << to_string(t) << "\n";
      return exit_code::ok;
    }

    if (eq->parsed()) {
      SpecFile sa = read_spec_file(spec_path);
      SpecFile sb = read_spec_file(other_path);
      const TreeAutomaton& a = pick(sa.automata, "", "Automaton", spec_path);
      const TreeAutomaton& b = pick(sb.automata, "", "Automaton", other_path);
      const bool yes = language_equal(a, b);
      out << (yes ? "equal" : "different") << "\n";
      return yes ? exit_code::ok : exit_code::negative;
    }
  } catch (const InvariantBreach& e) {
    err << "tac: internal invariant breach: " << e.what() << "\n";
    return exit_code::internal;
  } catch (const Error& e) {
    err << "tac: " << e.what() << "\n";
    return exit_code::data;
  } catch (const std::exception& e) {
    err << "tac: internal error: " << e.what() << "\n";
    return exit_code::internal;
  }
  return exit_code::usage;
}

}  // namespace tac
