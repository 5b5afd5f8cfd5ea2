#pragma once

#include <map>
#include <set>
#include <string>

#include "tac/algebra.hpp"
#include "tac/rewriting.hpp"

namespace tac {

/// Automaton recognizing the terms that contain an instance of some
/// left-hand side of `trs` (the reducible terms). Requires left-linearity.
///
/// One state per distinct non-variable lhs subterm (variables abstracted
/// away), a universal state, and a final "contains a redex" state.
inline TreeAutomaton reducible_automaton(const Trs& trs) {
  require_left_linear(trs);
  const Signature& sig = trs.signature();
  TreeAutomaton a(sig);
  const State any = a.new_state();
  const State redex = a.new_state();
  a.add_final(redex);
  for (const Symbol& s : sig.symbols()) {
    a.add_transition(s.name, std::vector<State>(s.arity, any), any);
    for (std::size_t i = 0; i < s.arity; ++i) {
      std::vector<State> args(s.arity, any);
      args[i] = redex;
      a.add_transition(s.name, args, redex);
    }
  }

  const Term hole = Term::variable("_");
  std::map<Term, State> pattern_state;
  std::function<State(const Term&)> state_for = [&](const Term& p) -> State {
    if (p.is_variable()) return any;
    Substitution to_hole;
    for (const auto& v : variables(p)) to_hole.emplace(v, hole);
    Term key = tac::apply(p, to_hole);
    if (auto it = pattern_state.find(key); it != pattern_state.end()) return it->second;
    std::vector<State> args;
    for (const Term& c : p.args()) args.push_back(state_for(c));
    State q = a.new_state();
    pattern_state.emplace(key, q);
    a.add_transition(p.name(), args, q);
    return q;
  };
  for (const Rule& r : trs.rules()) a.add_epsilon(state_for(r.lhs), redex);
  return a;
}

/// Automaton recognizing Irr(R), the R-irreducible ground terms, trimmed.
inline TreeAutomaton irr_automaton(const Trs& trs) {
  return trim(complement(reducible_automaton(trs)));
}

/// One state per sort and one transition per symbol of `symbols`, following
/// the profiles; every state is final. Unsorted signatures use a single
/// implicit sort, as does `use_sorts = false`. Recognizes the well-sorted
/// ground terms over `symbols`.
inline TreeAutomaton sorted_term_automaton(const Signature& sig,
                                           const std::set<std::string>& symbols,
                                           bool use_sorts = true) {
  const bool sorted = use_sorts && sig.is_sorted();
  if (sorted && !sig.fully_sorted())
    throw Error("signature is only partially sorted: every symbol needs a profile");
  TreeAutomaton a(sig);
  std::map<std::string, State> sort_state;
  auto state_of = [&](const std::string& sort) {
    auto it = sort_state.find(sort);
    if (it != sort_state.end()) return it->second;
    State q = a.new_state();
    a.set_state_name(q, "q" + sort);
    a.add_final(q);
    sort_state.emplace(sort, q);
    return q;
  };
  if (sorted) {
    for (const auto& sort : sig.sorts()) state_of(sort);
  } else {
    state_of("");
  }
  for (const Symbol& s : sig.symbols()) {
    if (!symbols.contains(s.name)) continue;
    std::vector<State> args;
    if (sorted) {
      for (const auto& sort : s.profile->arguments) args.push_back(state_of(sort));
      a.add_transition(s.name, args, state_of(s.profile->result));
    } else {
      args.assign(s.arity, state_of(""));
      a.add_transition(s.name, args, state_of(""));
    }
  }
  return a;
}

/// Automaton of all well-sorted data terms T(C)^S. Needs a constructor split.
inline TreeAutomaton data_term_automaton(const Signature& sig) {
  if (!sig.has_split()) throw Error("signature has no constructor/defined split");
  return sorted_term_automaton(sig, sig.constructors());
}

}  // namespace tac
