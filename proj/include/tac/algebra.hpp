#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "tac/automaton.hpp"

namespace tac {

/// Replaces every epsilon transition q -> q' by copies of the normalized
/// transitions into q, retargeted to q'. The full-mode language of every
/// state is preserved.
inline TreeAutomaton eliminate_epsilon(const TreeAutomaton& a) {
  TreeAutomaton out(a.signature());
  for (State q : a.states()) out.add_state(q);
  for (State q : a.finals()) out.add_final(q);
  for (const auto& [q, name] : a.state_names()) out.set_state_name(q, name);
  for (const auto& [lhs, targets] : a.delta()) {
    for (State q : targets) {
      for (State r : a.epsilon_closure(q)) out.add_transition(Transition{lhs, r});
    }
  }
  return out;
}

/// States with a nonempty language (least fixpoint over all transitions).
inline std::set<State> reachable_states(const TreeAutomaton& a,
                                        Recognition mode = Recognition::full) {
  std::set<State> reach;
  bool changed = true;
  auto insert = [&](State q) {
    if (mode == Recognition::full) {
      for (State r : a.epsilon_closure(q)) changed |= reach.insert(r).second;
    } else {
      changed |= reach.insert(q).second;
    }
  };
  while (changed) {
    changed = false;
    for (const auto& [lhs, targets] : a.delta()) {
      if (!std::all_of(lhs.args.begin(), lhs.args.end(),
                       [&](State q) { return reach.contains(q); }))
        continue;
      for (State q : targets) insert(q);
    }
  }
  return reach;
}

/// No ground term reaches q (or, without q, any final state).
inline bool is_empty(const TreeAutomaton& a, std::optional<State> q = std::nullopt) {
  if (q && !a.has_state(*q)) throw Error("unknown state " + a.state_label(*q));
  auto reach = reachable_states(a);
  if (q) return !reach.contains(*q);
  return std::none_of(a.finals().begin(), a.finals().end(),
                      [&](State f) { return reach.contains(f); });
}

/// Restriction to the given states; transitions touching others are dropped.
inline TreeAutomaton restrict_states(const TreeAutomaton& a, const std::set<State>& keep) {
  TreeAutomaton out(a.signature());
  for (State q : keep) out.add_state(q);
  for (const auto& [q, name] : a.state_names())
    if (keep.contains(q)) out.set_state_name(q, name);
  for (State q : a.finals())
    if (keep.contains(q)) out.add_final(q);
  for (const auto& [lhs, targets] : a.delta()) {
    if (!std::all_of(lhs.args.begin(), lhs.args.end(),
                     [&](State q) { return keep.contains(q); }))
      continue;
    for (State q : targets)
      if (keep.contains(q)) out.add_transition(Transition{lhs, q});
  }
  for (const Epsilon& e : a.epsilons())
    if (keep.contains(e.from) && keep.contains(e.to)) out.add_epsilon(e.from, e.to);
  return out;
}

/// Drops states with an empty language.
inline TreeAutomaton trim_unreachable(const TreeAutomaton& a) {
  return restrict_states(a, reachable_states(a));
}

/// Keeps states that are reachable and can occur in an accepting run.
inline TreeAutomaton trim(const TreeAutomaton& a) {
  TreeAutomaton r = trim_unreachable(eliminate_epsilon(a));
  std::set<State> useful(r.finals().begin(), r.finals().end());
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [lhs, targets] : r.delta()) {
      if (std::none_of(targets.begin(), targets.end(),
                       [&](State q) { return useful.contains(q); }))
        continue;
      for (State q : lhs.args) changed |= useful.insert(q).second;
    }
  }
  return restrict_states(r, useful);
}

/// L(a) is finite: after epsilon elimination and trimming, the dependency
/// graph from argument states to target states is acyclic.
inline bool is_finite(const TreeAutomaton& a) {
  TreeAutomaton t = trim(a);
  std::map<State, std::set<State>> succ;
  for (const auto& [lhs, targets] : t.delta())
    for (State arg : lhs.args) succ[arg].insert(targets.begin(), targets.end());
  enum class Mark { white, grey, black };
  std::map<State, Mark> mark;
  std::function<bool(State)> has_cycle = [&](State q) {
    mark[q] = Mark::grey;
    for (State n : succ[q]) {
      Mark m = mark[n];
      if (m == Mark::grey) return true;
      if (m == Mark::white && has_cycle(n)) return true;
    }
    mark[q] = Mark::black;
    return false;
  };
  for (State q : t.states()) {
    if (mark[q] == Mark::white && has_cycle(q)) return false;
  }
  return true;
}

/// Per-state sets of terms of height <= depth recognized in each state.
inline std::map<State, std::set<Term>> enumerate_states(const TreeAutomaton& a,
                                                        std::size_t depth,
                                                        Recognition mode = Recognition::full) {
  const TreeAutomaton e = mode == Recognition::full ? eliminate_epsilon(a) : a;
  std::map<State, std::set<Term>> level;
  for (std::size_t h = 0; h <= depth; ++h) {
    std::map<State, std::set<Term>> next = level;
    for (const auto& [lhs, targets] : e.delta()) {
      if (h == 0 && !lhs.args.empty()) continue;
      std::vector<const std::set<Term>*> pools;
      bool empty = false;
      for (State q : lhs.args) {
        auto it = level.find(q);
        if (it == level.end() || it->second.empty()) {
          empty = true;
          break;
        }
        pools.push_back(&it->second);
      }
      if (empty) continue;
      std::vector<Term> args;
      std::function<void(std::size_t)> build = [&](std::size_t i) {
        if (i == pools.size()) {
          Term t = Term::app(lhs.symbol, args);
          for (State q : targets) next[q].insert(t);
          return;
        }
        for (const Term& c : *pools[i]) {
          args.push_back(c);
          build(i + 1);
          args.pop_back();
        }
      };
      build(0);
    }
    level = std::move(next);
  }
  return level;
}

/// { t in L(a) | height(t) <= depth }, in canonical term order.
inline std::set<Term> enumerate(const TreeAutomaton& a, std::size_t depth) {
  const TreeAutomaton t = trim(a);
  auto level = enumerate_states(t, depth, Recognition::eps_free);
  std::set<Term> out;
  for (State q : t.finals()) {
    auto it = level.find(q);
    if (it != level.end()) out.insert(it->second.begin(), it->second.end());
  }
  return out;
}

/// Replaces every state q by alpha(q). alpha must be total on the states.
inline TreeAutomaton rename_states(const TreeAutomaton& a, const std::map<State, State>& alpha) {
  auto map = [&](State q) {
    auto it = alpha.find(q);
    if (it == alpha.end())
      throw Error("renaming is not defined on state " + a.state_label(q));
    return it->second;
  };
  TreeAutomaton out(a.signature());
  for (State q : a.states()) out.add_state(map(q));
  for (State q : a.finals()) out.add_final(map(q));
  for (const auto& [q, name] : a.state_names()) {
    State r = map(q);
    if (r == q || !out.state_names().contains(r)) out.set_state_name(r, name);
  }
  for (const auto& [lhs, targets] : a.delta()) {
    Configuration c{lhs.symbol, {}};
    for (State q : lhs.args) c.args.push_back(map(q));
    for (State q : targets) out.add_transition(Transition{c, map(q)});
  }
  for (const Epsilon& e : a.epsilons()) out.add_epsilon(map(e.from), map(e.to));
  out.advance_counter(a.next_state_id());
  return out;
}

/// Subset construction: an equivalent deterministic and complete automaton
/// without epsilon transitions. Each subset state is final iff `final_subset`
/// holds for it.
inline TreeAutomaton determinize(const TreeAutomaton& a,
                                 const std::function<bool(const std::set<State>&)>& final_subset) {
  const TreeAutomaton e = eliminate_epsilon(a);
  std::vector<std::set<State>> subsets;
  std::map<std::set<State>, std::uint32_t> index;
  std::map<Configuration, std::uint32_t> moves;
  auto intern = [&](std::set<State> s) {
    auto [it, inserted] = index.emplace(s, static_cast<std::uint32_t>(subsets.size()));
    if (inserted) subsets.push_back(std::move(s));
    return it->second;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (const Symbol& sym : e.signature().symbols()) {
      auto [lo, hi] = e.transitions_for(sym.name);
      std::vector<std::uint32_t> tuple(sym.arity, 0);
      const std::size_t known = subsets.size();
      if (sym.arity > 0 && known == 0) continue;
      std::function<void(std::size_t)> visit = [&](std::size_t i) {
        if (i < sym.arity) {
          for (std::uint32_t k = 0; k < known; ++k) {
            tuple[i] = k;
            visit(i + 1);
          }
          return;
        }
        Configuration key{sym.name, {}};
        for (auto k : tuple) key.args.push_back(State{k});
        if (moves.contains(key)) return;
        std::set<State> target;
        for (auto it = lo; it != hi; ++it) {
          bool ok = true;
          for (std::size_t j = 0; ok && j < sym.arity; ++j)
            ok = subsets[tuple[j]].contains(it->first.args[j]);
          if (ok) target.insert(it->second.begin(), it->second.end());
        }
        moves.emplace(std::move(key), intern(std::move(target)));
        changed = true;
      };
      visit(0);
    }
  }

  TreeAutomaton out(a.signature());
  for (std::uint32_t k = 0; k < subsets.size(); ++k) {
    out.add_state(State{k});
    if (final_subset(subsets[k])) out.add_final(State{k});
  }
  for (const auto& [lhs, target] : moves) out.add_transition(Transition{lhs, State{target}});
  return out;
}

/// Automaton for T(F) \ L(a): deterministic, complete, epsilon-free.
inline TreeAutomaton complement(const TreeAutomaton& a) {
  TreeAutomaton det = determinize(a, [&](const std::set<State>& s) {
    return std::none_of(s.begin(), s.end(), [&](State q) { return a.is_final(q); });
  });
  return trim_unreachable(det);
}

/// Equivalent deterministic complete automaton.
inline TreeAutomaton determinize(const TreeAutomaton& a) {
  return determinize(a, [&](const std::set<State>& s) {
    return std::any_of(s.begin(), s.end(), [&](State q) { return a.is_final(q); });
  });
}

/// Product automaton; L(result) = L(a) ∩ L(b). Only reachable pairs are built.
inline TreeAutomaton intersection(const TreeAutomaton& a, const TreeAutomaton& b) {
  if (!a.signature().same_alphabet(b.signature()))
    throw Error("intersection of automata over different signatures");
  const TreeAutomaton ea = eliminate_epsilon(a), eb = eliminate_epsilon(b);
  std::map<std::pair<State, State>, State> pairs;
  TreeAutomaton out(a.signature());
  auto intern = [&](std::pair<State, State> p) {
    auto it = pairs.find(p);
    if (it != pairs.end()) return std::pair{it->second, false};
    State q = out.new_state();
    pairs.emplace(p, q);
    if (ea.is_final(p.first) && eb.is_final(p.second)) out.add_final(q);
    return std::pair{q, true};
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Symbol& sym : a.signature().symbols()) {
      auto [alo, ahi] = ea.transitions_for(sym.name);
      auto [blo, bhi] = eb.transitions_for(sym.name);
      for (auto ia = alo; ia != ahi; ++ia) {
        for (auto ib = blo; ib != bhi; ++ib) {
          Configuration lhs{sym.name, {}};
          bool ok = true;
          for (std::size_t i = 0; ok && i < sym.arity; ++i) {
            auto it = pairs.find({ia->first.args[i], ib->first.args[i]});
            ok = it != pairs.end();
            if (ok) lhs.args.push_back(it->second);
          }
          if (!ok) continue;
          for (State qa : ia->second) {
            for (State qb : ib->second) {
              auto [q, fresh] = intern({qa, qb});
              changed |= fresh;
              changed |= out.add_transition(Transition{lhs, q});
            }
          }
        }
      }
    }
  }
  return out;
}

/// L(a) = L(b), via emptiness of both differences.
inline bool language_equal(const TreeAutomaton& a, const TreeAutomaton& b) {
  if (!a.signature().same_alphabet(b.signature()))
    throw Error("comparison of automata over different signatures");
  return is_empty(intersection(a, complement(b))) && is_empty(intersection(b, complement(a)));
}

/// L(a) ⊆ L(b).
inline bool language_included(const TreeAutomaton& a, const TreeAutomaton& b) {
  return is_empty(intersection(a, complement(b)));
}

/// Number of states whose epsilon-free language contains a term built from
/// `symbols` only.
inline std::size_t count_states_recognizing(const TreeAutomaton& a,
                                            const std::set<std::string>& symbols) {
  std::set<State> reach;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [lhs, targets] : a.delta()) {
      if (!symbols.contains(lhs.symbol)) continue;
      if (!std::all_of(lhs.args.begin(), lhs.args.end(),
                       [&](State q) { return reach.contains(q); }))
        continue;
      for (State q : targets) changed |= reach.insert(q).second;
    }
  }
  return reach.size();
}

}  // namespace tac
