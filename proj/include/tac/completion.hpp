#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tac/algebra.hpp"
#include "tac/rewriting.hpp"

namespace tac {

/// Variable-to-state map; extends homomorphically to T(F,X) -> T(F,Q).
using StateSubstitution = std::map<std::string, State>;

inline Term apply(const Term& t, const StateSubstitution& sigma) {
  Substitution s;
  for (const auto& [x, q] : sigma) s.emplace(x, Term::of_state(q));
  return tac::apply(t, s);
}

inline std::string to_string(const StateSubstitution& sigma,
                             const StateLabeler& label = default_state_label) {
  std::string out = "{";
  bool first = true;
  for (const auto& [x, q] : sigma) {
    if (!first) out += ',';
    first = false;
    out += x + "->" + label(q);
  }
  return out + "}";
}

struct Match {
  StateSubstitution sigma;
  State state;

  friend auto operator<=>(const Match&, const Match&) = default;
  friend bool operator==(const Match&, const Match&) = default;
};

namespace detail {

using Solutions = std::map<State, std::set<StateSubstitution>>;

inline std::optional<StateSubstitution> merge(const StateSubstitution& a,
                                              const StateSubstitution& b) {
  StateSubstitution out = a;
  for (const auto& [x, q] : b) {
    auto [it, inserted] = out.emplace(x, q);
    if (!inserted && it->second != q) return std::nullopt;
  }
  return out;
}

inline void close_solutions(const TreeAutomaton& a, Solutions& sols) {
  Solutions closed;
  for (const auto& [q, sigmas] : sols) {
    for (State r : a.epsilon_closure(q)) closed[r].insert(sigmas.begin(), sigmas.end());
  }
  sols = std::move(closed);
}

inline Solutions solve(const TreeAutomaton& a, const Term& p, Recognition mode) {
  Solutions sols;
  switch (p.kind()) {
    case Term::Kind::variable:
      for (State q : a.states()) sols[q].insert(StateSubstitution{{p.name(), q}});
      break;
    case Term::Kind::state:
      sols[p.state()].insert(StateSubstitution{});
      break;
    case Term::Kind::application: {
      std::vector<Solutions> child;
      for (const Term& c : p.args()) {
        child.push_back(solve(a, c, mode));
        if (child.back().empty()) return {};
      }
      auto [lo, hi] = a.transitions_for(p.name());
      for (auto it = lo; it != hi; ++it) {
        if (it->first.args.size() != p.arity()) continue;
        std::vector<StateSubstitution> partial{StateSubstitution{}};
        for (std::size_t i = 0; i < p.arity() && !partial.empty(); ++i) {
          auto found = child[i].find(it->first.args[i]);
          if (found == child[i].end()) {
            partial.clear();
            break;
          }
          std::vector<StateSubstitution> next;
          for (const auto& s : partial) {
            for (const auto& t : found->second) {
              if (auto m = merge(s, t)) next.push_back(std::move(*m));
            }
          }
          partial = std::move(next);
        }
        for (State q : it->second) sols[q].insert(partial.begin(), partial.end());
      }
      for (auto it = sols.begin(); it != sols.end();) {
        it = it->second.empty() ? sols.erase(it) : std::next(it);
      }
      break;
    }
  }
  if (mode == Recognition::full) close_solutions(a, sols);
  return sols;
}

}  // namespace detail

/// All (sigma, q) with l·sigma ->* q (full) or ->(no eps)* q (eps_free).
/// Variables range over every state; repeated variables must agree. Results
/// are ordered by state, then substitution.
inline std::vector<Match> matching(const TreeAutomaton& a, const Term& l,
                                   Recognition mode = Recognition::full) {
  if (l.is_variable()) throw Error("matching a bare variable " + l.name());
  std::vector<Match> out;
  for (const auto& [q, sigmas] : detail::solve(a, l, mode)) {
    for (const auto& s : sigmas) out.push_back(Match{s, q});
  }
  return out;
}

struct CriticalPair {
  std::size_t rule = 0;  // index into the TRS
  StateSubstitution sigma;
  State state;
};

/// Every (l->r, sigma, q) with l·sigma ->* q and not r·sigma ->* q, ordered
/// by rule index, then state, then substitution.
inline std::vector<CriticalPair> critical_pairs(const Trs& trs, const TreeAutomaton& a) {
  require_left_linear(trs);
  std::vector<CriticalPair> out;
  for (std::size_t i = 0; i < trs.rules().size(); ++i) {
    const Rule& r = trs.rules()[i];
    for (const Match& m : matching(a, r.lhs, Recognition::full)) {
      if (!recognizes(a, tac::apply(r.rhs, m.sigma), m.state, Recognition::full))
        out.push_back(CriticalPair{i, m.sigma, m.state});
    }
  }
  return out;
}

/// Normalized transitions recognizing c into q without epsilon steps.
///
/// Subterms f(q1,...,qn) below the root reuse the smallest q' with
/// f(q1,...,qn) -> q' in `a` (or in transitions produced earlier in the same
/// call); otherwise a fresh state is allocated from `a`. New transitions are
/// returned, not inserted, but fresh states are added to `a`.
inline std::set<Transition> normalize(TreeAutomaton& a, const Term& c, State q) {
  if (c.is_state()) throw Error("cannot normalize a bare state");
  if (c.is_variable()) throw Error("cannot normalize variable " + c.name());
  std::set<Transition> out;
  std::map<Configuration, State> local;
  std::function<State(const Term&, std::optional<State>)> norm =
      [&](const Term& t, std::optional<State> target) -> State {
    if (t.is_state()) return t.state();
    if (t.is_variable()) throw Error("cannot normalize variable " + t.name());
    Configuration lhs{t.name(), {}};
    for (const Term& s : t.args()) lhs.args.push_back(norm(s, std::nullopt));
    if (target) {
      out.insert(Transition{lhs, *target});
      return *target;
    }
    std::optional<State> reuse;
    if (const auto* existing = a.targets(lhs)) reuse = *existing->begin();
    if (auto it = local.find(lhs); it != local.end() && (!reuse || it->second < *reuse))
      reuse = it->second;
    State r = reuse ? *reuse : a.new_state();
    local.emplace(lhs, r);
    out.insert(Transition{lhs, r});
    return r;
  };
  norm(c, q);
  return out;
}

// ---------------------------------------------------------------------------
// Trace

struct JoinEvent {
  std::size_t step = 0;
  std::size_t rule = 0;
  State state;
  StateSubstitution sigma;
  std::size_t added = 0;
};

struct MergeEvent {
  std::size_t step = 0;
  State from;  // renamed away
  State into;
  std::size_t equation = 0;
};

using TraceEvent = std::variant<JoinEvent, MergeEvent>;

/// One line per event: joins as `step n: rule#i at state q via {x->q'} ->
/// added m transitions`, merges as `merge qb -> qa by equation#j`; rule and
/// equation numbers are 1-based.
inline std::string to_string(const TraceEvent& e) {
  if (const auto* j = std::get_if<JoinEvent>(&e)) {
    return "step " + std::to_string(j->step) + ": rule#" + std::to_string(j->rule + 1) +
           " at state " + default_state_label(j->state) + " via " + to_string(j->sigma) +
           " -> added " + std::to_string(j->added) + " transitions";
  }
  const auto& m = std::get<MergeEvent>(e);
  return "merge " + default_state_label(m.from) + " -> " + default_state_label(m.into) +
         " by equation#" + std::to_string(m.equation + 1);
}

// ---------------------------------------------------------------------------
// Completion

/// C_R(A): joins every critical pair of A, computed up front, against the
/// transition set as it grows.
inline TreeAutomaton completion_step(const TreeAutomaton& a, const Trs& trs,
                                     std::vector<TraceEvent>* trace = nullptr,
                                     std::size_t step = 0) {
  const auto pairs = critical_pairs(trs, a);
  TreeAutomaton out = a;
  for (const CriticalPair& cp : pairs) {
    const Term rhs = tac::apply(trs.rules()[cp.rule].rhs, cp.sigma);
    // an earlier join in this step may already cover the pair
    if (recognizes(out, rhs, cp.state, Recognition::full)) continue;
    std::size_t added = 0;
    auto direct = reachable_states(out, rhs, Recognition::eps_free);
    State via;
    if (!direct.empty()) {
      via = *direct.begin();
    } else {
      via = out.new_state();
      for (const Transition& t : normalize(out, rhs, via)) added += out.add_transition(t);
    }
    added += out.add_epsilon(via, cp.state);
    if (trace) trace->push_back(JoinEvent{step, cp.rule, cp.state, cp.sigma, added});
  }
  return out;
}

namespace detail {

/// First simplification situation: an equation u=v and sigma with
/// u·sigma ->(no eps)* qa, v·sigma ->(no eps)* qb, qa != qb.
inline std::optional<std::pair<std::pair<State, State>, std::size_t>> find_merge(
    const TreeAutomaton& a, const EquationSet& eqs, bool reversed) {
  const std::size_t n = eqs.size();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = reversed ? n - 1 - k : k;
    const Equation& e = eqs.equations[j];
    if (e.lhs.is_variable() && e.rhs.is_variable()) continue;
    auto side = [&](const Term& t) -> std::vector<Match> {
      if (!t.is_variable()) return matching(a, t, Recognition::eps_free);
      std::vector<Match> all;
      for (State q : a.states()) all.push_back(Match{{{t.name(), q}}, q});
      return all;
    };
    const auto left = side(e.lhs);
    if (left.empty()) continue;
    const auto right = side(e.rhs);
    for (const Match& l : left) {
      for (const Match& r : right) {
        if (l.state == r.state) continue;
        if (!merge(l.sigma, r.sigma)) continue;
        return std::pair{std::pair{l.state, r.state}, j};
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

struct SimplifyOptions {
  /// Scan equations last-to-first instead of first-to-last.
  bool reverse_equation_order = false;
};

/// Applies the simplification relation until no equation applies. Each
/// merge renames the larger state index into the smaller one.
inline TreeAutomaton simplify(const TreeAutomaton& a, const EquationSet& eqs,
                              std::vector<TraceEvent>* trace = nullptr, std::size_t step = 0,
                              SimplifyOptions options = {}) {
  TreeAutomaton cur = a;
  while (auto found = detail::find_merge(cur, eqs, options.reverse_equation_order)) {
    auto [qa, qb] = found->first;
    const State into = std::min(qa, qb), from = std::max(qa, qb);
    std::map<State, State> alpha;
    for (State q : cur.states()) alpha.emplace(q, q == from ? into : q);
    cur = rename_states(cur, alpha);
    if (trace) trace->push_back(MergeEvent{step, from, into, found->second});
  }
  return cur;
}

enum class Outcome { fixpoint, step_limit };

struct CompletionResult {
  TreeAutomaton automaton;
  std::size_t steps = 0;
  Outcome outcome = Outcome::step_limit;
  std::vector<TraceEvent> trace;
  /// automata[n] is A^n; kept only when requested.
  std::vector<TreeAutomaton> history;
  std::vector<std::string> warnings;

  std::size_t merge_count() const {
    return std::count_if(trace.begin(), trace.end(), [](const TraceEvent& e) {
      return std::holds_alternative<MergeEvent>(e);
    });
  }
};

struct CompletionOptions {
  std::size_t max_steps = 1000;
  bool keep_history = false;
  SimplifyOptions simplify;
};

/// Iterates A^(n+1) = simplify(C_R(A^n), E) until A^n has no critical pair
/// (fixpoint) or n reaches max_steps (step limit).
inline CompletionResult complete(const TreeAutomaton& a0, const Trs& trs,
                                 const EquationSet& eqs, CompletionOptions options = {}) {
  require_left_linear(trs);
  CompletionResult result{a0, 0, Outcome::step_limit, {}, {}, {}};
  if (!a0.is_eps_free_deterministic())
    result.warnings.push_back("initial automaton is not epsilon-free deterministic");
  if (options.keep_history) result.history.push_back(a0);
  TreeAutomaton& cur = result.automaton;
  for (;;) {
    if (critical_pairs(trs, cur).empty()) {
      result.outcome = Outcome::fixpoint;
      break;
    }
    if (result.steps >= options.max_steps) {
      result.outcome = Outcome::step_limit;
      break;
    }
    ++result.steps;
    TreeAutomaton stepped = completion_step(cur, trs, &result.trace, result.steps);
    cur = simplify(stepped, eqs, &result.trace, result.steps, options.simplify);
    if (options.keep_history) result.history.push_back(cur);
  }
  return result;
}

inline std::vector<std::string> trace_lines(const CompletionResult& r) {
  std::vector<std::string> out;
  for (const auto& e : r.trace) out.push_back(to_string(e));
  return out;
}

}  // namespace tac
