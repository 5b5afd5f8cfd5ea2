#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tac/algebra.hpp"
#include "tac/constructions.hpp"
#include "tac/oracle.hpp"
#include "tac/rewriting.hpp"

namespace tac {

/// Which termination criterion to check.
enum class GuardMode {
  general,     ///< E ⊇ E^r ∪ E^c over all symbols
  functional,  ///< E ⊇ E^r ∪ E^c over constructors ∪ E_R, sufficiently complete R
  sorted,      ///< functional, with sorts and a R/E-coherent initial automaton
};

inline std::string to_string(GuardMode m) {
  switch (m) {
    case GuardMode::general: return "general";
    case GuardMode::functional: return "functional";
    case GuardMode::sorted: return "sorted";
  }
  return "?";
}

inline std::optional<GuardMode> parse_guard_mode(const std::string& s) {
  if (s == "general") return GuardMode::general;
  if (s == "functional") return GuardMode::functional;
  if (s == "sorted") return GuardMode::sorted;
  return std::nullopt;
}

/// User assertions for the properties the guard does not prove.
struct Assumptions {
  bool sufficient_completeness = false;
  bool re_coherence = false;
};

enum class CheckStatus { verified, asserted, failed };

inline std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::verified: return "verified";
    case CheckStatus::asserted: return "asserted";
    case CheckStatus::failed: return "failed";
  }
  return "?";
}

struct GuardCheck {
  std::string name;
  CheckStatus status = CheckStatus::failed;
  std::string detail;
  /// Assertion-gated: can only ever be asserted, never verified.
  bool assertion = false;
};

struct GuardReport {
  bool pass = false;
  GuardMode mode = GuardMode::general;
  std::vector<GuardCheck> checks;
  /// Number of irreducible terms of the contracting system: the state bound.
  std::optional<std::size_t> bound;

  const GuardCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
  /// Failed checks other than the assertion-gated ones.
  std::vector<const GuardCheck*> verifiable_failures() const {
    std::vector<const GuardCheck*> out;
    for (const auto& c : checks)
      if (c.status == CheckStatus::failed && !c.assertion) out.push_back(&c);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Equation families

/// f(x1,...,xn) = f(x1,...,xn) for every symbol f.
inline EquationSet reflexivity_equations(const Signature& sig) {
  EquationSet out;
  for (const Symbol& s : sig.symbols()) {
    std::vector<Term> args;
    for (std::size_t i = 1; i <= s.arity; ++i)
      args.push_back(Term::variable("x" + std::to_string(i)));
    Term t = Term::app(s.name, std::move(args));
    out.add(Equation{t, t, EquationRole::reflexivity});
  }
  return out;
}

/// l = r for every rule l -> r.
inline EquationSet r_equations(const Trs& trs) {
  EquationSet out;
  for (const Rule& r : trs.rules()) out.add(Equation{r.lhs, r.rhs, EquationRole::r_equation});
  return out;
}

// ---------------------------------------------------------------------------
// Contracting equations

/// Orientation of one equation into a contracting rule, or why it has none.
struct Orientation {
  std::optional<Rule> rule;
  std::string problem;
};

/// u = u|p with u linear and p != root orients to u -> u|p (either side may
/// be the larger one). In sorted mode u = c is also accepted when c is the
/// unique constant of u's sort.
inline Orientation orient_contracting(const Signature& sig, const Equation& e, bool sorted) {
  for (int flip = 0; flip < 2; ++flip) {
    const Term& u = flip ? e.rhs : e.lhs;
    const Term& v = flip ? e.lhs : e.rhs;
    if (u.is_variable() || !is_linear(u)) continue;
    const auto pos = positions(u);
    for (std::size_t i = 1; i < pos.size(); ++i) {
      if (subterm_at(u, pos[i]) == v) return {Rule{u, v}, {}};
    }
  }
  if (sorted && sig.is_sorted()) {
    for (int flip = 0; flip < 2; ++flip) {
      const Term& u = flip ? e.rhs : e.lhs;
      const Term& v = flip ? e.lhs : e.rhs;
      if (u.is_variable() || u == v || !v.is_application() || v.arity() != 0) continue;
      auto sort = check_sorts(sig, u);
      if (!sort.ok || !sort.sort) continue;
      auto c = sig.unique_constant(*sort.sort);
      if (c && *c == v.name()) {
        if (!is_linear(u)) return {std::nullopt, "non-linear lhs in " + to_string(e)};
        return {Rule{u, v}, {}};
      }
    }
  }
  return {std::nullopt, "not of the form u = u|p or u = c^S: " + to_string(e)};
}

struct ContractingResult {
  bool shape_ok = true;
  bool finite = false;
  /// |normal forms| when finite.
  std::optional<std::size_t> bound;
  /// Trimmed automaton of the irreducible K-terms (well-sorted in sorted mode).
  TreeAutomaton irr;
  Trs oriented;
  std::vector<std::string> problems;

  bool contracting() const { return shape_ok && finite; }
};

/// Checks that `ec` is contracting for the symbol set `k`: every equation
/// has a contracting shape over K, and T(K) (or T(K)^S) has finitely many
/// normal forms for the oriented system.
inline ContractingResult contracting_check(const Signature& sig, const EquationSet& ec,
                                           const std::set<std::string>& k, bool sorted) {
  for (const auto& s : k)
    if (!sig.contains(s)) throw Error("symbol '" + s + "' of K is not in the signature");
  ContractingResult out;
  std::vector<Rule> rules;
  for (const Equation& e : ec) {
    if (!uses_only(e.lhs, k) || !uses_only(e.rhs, k)) {
      out.shape_ok = false;
      out.problems.push_back("uses symbols outside K: " + to_string(e));
      continue;
    }
    auto o = orient_contracting(sig, e, sorted);
    if (!o.rule) {
      out.shape_ok = false;
      out.problems.push_back(o.problem);
      continue;
    }
    if (o.rule->rhs.size() >= o.rule->lhs.size())
      throw Error("contracting orientation does not decrease size: " + to_string(*o.rule));
    rules.push_back(*o.rule);
  }
  out.oriented = Trs(sig, rules);
  TreeAutomaton k_terms = sorted_term_automaton(sig, k, sorted);
  out.irr = trim(intersection(irr_automaton(out.oriented), k_terms));
  out.finite = is_finite(out.irr);
  if (out.finite) out.bound = enumerate(out.irr, out.irr.states().size()).size();
  return out;
}

// ---------------------------------------------------------------------------
// Bounded diagnostics

enum class Diagnostic { ok_to_depth, counterexample, unknown };

inline std::string to_string(Diagnostic d) {
  switch (d) {
    case Diagnostic::ok_to_depth: return "ok-to-depth";
    case Diagnostic::counterexample: return "counterexample";
    case Diagnostic::unknown: return "unknown";
  }
  return "?";
}

struct DiagnosticResult {
  Diagnostic verdict = Diagnostic::unknown;
  std::optional<Term> witness;
  std::string detail;
};

/// Heuristic: every well-sorted ground term of height <= depth reaches a data
/// term within 10*depth rewrite generations. Budget exhaustion yields unknown.
inline DiagnosticResult sufficient_completeness_bounded(const Trs& trs, std::size_t depth,
                                                        std::size_t max_set_size = 20000) {
  const Trs t = with_constructor_split(trs);
  const auto constructors = t.signature().constructors();
  const std::size_t budget = std::max<std::size_t>(1, 10 * depth);
  bool unknown = false;
  std::optional<Term> unknown_term;
  for (const Term& s : well_sorted_ground_terms(t.signature(), depth)) {
    if (uses_only(s, constructors)) continue;
    std::set<Term> seen{s};
    std::vector<Term> frontier{s};
    bool found = false, cut = false;
    for (std::size_t g = 0; g < budget && !frontier.empty() && !found; ++g) {
      std::vector<Term> next;
      for (const Term& u : frontier) {
        for (const Term& v : rewrite_one(t, u)) {
          if (uses_only(v, constructors)) {
            found = true;
            break;
          }
          if (seen.size() >= max_set_size) {
            cut = true;
            break;
          }
          if (seen.insert(v).second) next.push_back(v);
        }
        if (found || cut) break;
      }
      if (cut) break;
      frontier = std::move(next);
    }
    if (found) continue;
    if (!cut && frontier.empty()) {
      return {Diagnostic::counterexample, s,
              "no data term is reachable from " + to_string(s)};
    }
    unknown = true;
    if (!unknown_term) unknown_term = s;
  }
  if (unknown) {
    return {Diagnostic::unknown, unknown_term, "search budget exhausted on " + to_string(*unknown_term)};
  }
  return {Diagnostic::ok_to_depth, std::nullopt, "ok to depth " + std::to_string(depth)};
}

/// Heuristic: for every state, the epsilon-free language up to `depth`
/// lies in one E-class, as seen by a height-bounded E-closure. This is only
/// a necessary-condition probe, not the formal coherence property.
inline DiagnosticResult re_coherence_bounded(const TreeAutomaton& a0, const EquationSet& eqs,
                                             std::size_t depth = 3) {
  const std::size_t cap = depth + 1;
  bool unknown = false;
  for (const auto& [q, terms] : enumerate_states(a0, depth, Recognition::eps_free)) {
    if (terms.size() <= 1) continue;
    auto closure = e_closure_bounded(eqs, a0.signature(), *terms.begin(), cap, 20000);
    for (const Term& t : terms) {
      if (closure.terms.contains(t)) continue;
      if (closure.truncated) {
        unknown = true;
        continue;
      }
      return {Diagnostic::counterexample, t,
              "state " + a0.state_label(q) + " recognizes " + to_string(*terms.begin()) +
                  " and " + to_string(t) + " with no bounded E-proof"};
    }
  }
  if (unknown) return {Diagnostic::unknown, std::nullopt, "E-closure truncated"};
  return {Diagnostic::ok_to_depth, std::nullopt, "ok to depth " + std::to_string(depth)};
}

// ---------------------------------------------------------------------------
// Guard

struct GuardOptions {
  Assumptions assumptions;
  /// When present, also checks that it recognizes only well-sorted terms,
  /// and feeds the coherence diagnostic.
  const TreeAutomaton* initial = nullptr;
  /// Depth of the bounded diagnostics attached to assertion-gated checks;
  /// 0 disables them.
  std::size_t diagnostic_depth = 0;
};

/// Candidate contracting equations of E over K: those of contracting shape.
inline EquationSet contracting_candidates(const Signature& sig, const EquationSet& eqs,
                                          const std::set<std::string>& k, bool sorted) {
  EquationSet out;
  for (const Equation& e : eqs) {
    if (!uses_only(e.lhs, k) || !uses_only(e.rhs, k)) continue;
    if (orient_contracting(sig, e, sorted).rule) out.add(e);
  }
  return out;
}

inline std::string plural(std::size_t n, const std::string& word) {
  return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
}

inline std::string join_equations(const std::vector<Equation>& eqs) {
  std::string out;
  for (const auto& e : eqs) out += (out.empty() ? "" : " ") + to_string(e);
  return out;
}

/// Checks the hypotheses of the termination criterion selected by `mode`.
/// Failures are reported, never thrown.
inline GuardReport guard_check(const Trs& input, const EquationSet& eqs, GuardMode mode,
                               const GuardOptions& options = {}) {
  GuardReport report;
  report.mode = mode;
  const Trs trs = with_constructor_split(input);
  const Signature& sig = trs.signature();
  auto add = [&](std::string name, bool ok, std::string detail, bool assertion = false) {
    report.checks.push_back(GuardCheck{std::move(name),
                                       ok ? CheckStatus::verified : CheckStatus::failed,
                                       std::move(detail), assertion});
  };

  auto lin = check_left_linear(trs);
  std::string offenders;
  for (auto i : lin.offenders) offenders += (offenders.empty() ? "" : " ") + to_string(trs.rules()[i]);
  add("left-linear", lin.left_linear, lin.left_linear ? "" : "non-linear lhs: " + offenders);

  auto missing_refl = missing_equations(eqs, reflexivity_equations(sig));
  add("reflexivity-equations", missing_refl.empty(),
      missing_refl.empty() ? std::to_string(sig.size()) + " present"
                           : "missing: " + join_equations(missing_refl));

  const bool sorted = mode == GuardMode::sorted;
  const std::set<std::string> k =
      mode == GuardMode::general ? sig.names() : sig.constructors();
  if (sorted && !sig.fully_sorted()) {
    add("sorted-signature", false, "every symbol needs a profile");
  } else {
    if (sorted) add("sorted-signature", true, std::to_string(sig.sorts().size()) + " sorts");
    auto cand = contracting_candidates(sig, eqs, k, sorted);
    auto cr = contracting_check(sig, cand, k, sorted);
    std::string over = mode == GuardMode::general ? "all symbols" : "constructors";
    if (cr.contracting()) {
      report.bound = cr.bound;
      add("contracting-equations", true,
          plural(cand.size(), "equation") + " over " + over + ", " +
              std::to_string(*cr.bound) + " normal forms");
    } else {
      add("contracting-equations", false,
          plural(cand.size(), "candidate equation") + " over " + over +
              ": infinitely many normal forms");
    }
  }

  if (mode != GuardMode::general) {
    auto missing_r = missing_equations(eqs, r_equations(trs));
    add("r-equations", missing_r.empty(),
        missing_r.empty() ? std::to_string(trs.size()) + " present"
                          : "missing: " + join_equations(missing_r));
  }

  if (sorted && sig.fully_sorted()) {
    auto st = check_sorts(trs);
    add("sort-preserving-trs", st.ok, st.detail);
    auto se = check_sorts(sig, eqs);
    add("sort-preserving-equations", se.ok, se.detail);
    if (options.initial) {
      TreeAutomaton sorted_terms = sorted_term_automaton(sig, sig.names());
      bool ok = language_included(*options.initial, sorted_terms);
      add("initial-automaton-well-sorted", ok, ok ? "" : "accepts ill-sorted terms");
    }
  }

  auto assertion = [&](const std::string& name, bool asserted, std::string diag) {
    GuardCheck c{name, asserted ? CheckStatus::asserted : CheckStatus::failed,
                 asserted ? "asserted by user" : "not asserted", true};
    if (!diag.empty()) c.detail += "; bounded diagnostic: " + diag;
    report.checks.push_back(std::move(c));
  };
  if (mode != GuardMode::general) {
    std::string diag;
    if (options.diagnostic_depth > 0) {
      auto d = sufficient_completeness_bounded(trs, options.diagnostic_depth);
      diag = to_string(d.verdict) + " (" + d.detail + ")";
    }
    assertion("sufficient-completeness", options.assumptions.sufficient_completeness, diag);
  }
  if (sorted) {
    std::string diag;
    if (options.diagnostic_depth > 0 && options.initial) {
      auto d = re_coherence_bounded(*options.initial, eqs, options.diagnostic_depth);
      diag = to_string(d.verdict) + " (" + d.detail + ")";
    }
    assertion("re-coherence", options.assumptions.re_coherence, diag);
  }

  report.pass = std::all_of(report.checks.begin(), report.checks.end(),
                            [](const GuardCheck& c) { return c.status != CheckStatus::failed; });
  return report;
}

// ---------------------------------------------------------------------------
// Report serialization

inline std::string format_table(const GuardReport& r) {
  std::ostringstream os;
  os << "criterion: " << to_string(r.mode) << "\n";
  os << "verdict: " << (r.pass ? "PASS" : "FAIL") << "\n";
  std::size_t width = 5;
  for (const auto& c : r.checks) width = std::max(width, c.name.size());
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  os << pad("check", width) << "  " << pad("status", 8) << "  detail\n";
  for (const auto& c : r.checks) {
    std::string line = pad(c.name, width) + "  " + pad(to_string(c.status), 8) + "  " + c.detail;
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << "\n";
  }
  os << "bound: " << (r.bound ? std::to_string(*r.bound) : "none") << "\n";
  return os.str();
}

/// key=value lines: verdict, mode, bound, then check.<name>.status/detail.
inline std::string format_key_values(const GuardReport& r) {
  std::ostringstream os;
  os << "verdict=" << (r.pass ? "pass" : "fail") << "\n";
  os << "mode=" << to_string(r.mode) << "\n";
  os << "bound=" << (r.bound ? std::to_string(*r.bound) : "") << "\n";
  for (const auto& c : r.checks) {
    os << "check." << c.name << ".status=" << to_string(c.status) << "\n";
    os << "check." << c.name << ".detail=" << c.detail << "\n";
  }
  return os.str();
}

}  // namespace tac
