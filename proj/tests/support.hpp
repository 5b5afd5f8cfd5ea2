#pragma once

// Test-only oracles and generators. Nothing here calls into the library's
// recognition, matching or rewriting code; they are written from the
// definitions so they can be compared against it.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tac/tac.hpp"

namespace tac::testing {

inline std::string spec_path(const std::string& name) { return std::string(TAC_SPECS_DIR) + "/" + name; }

inline SpecFile load(const std::string& name) { return read_spec_file(spec_path(name)); }

inline const char* reverse_ops =
    "Sorts T list\n"
    "Ops append:2 : list list -> list  rev:1 : list -> list  nil:0 : list\n"
    "    cons:2 : T list -> list  a:0 : T  b:0 : T\n";

/// First automaton of `text`.
inline TreeAutomaton parse_automaton(const std::string& text) {
  return parse_spec(text).automata.at(0).value;
}

// ---------------------------------------------------------------------------
// Transition-set isomorphism

struct RawTransitions {
  std::set<Transition> normal;
  std::set<Epsilon> eps;
};

inline RawTransitions raw(const TreeAutomaton& a) {
  RawTransitions r;
  for (const auto& t : a.transitions()) r.normal.insert(t);
  r.eps = a.epsilons();
  return r;
}

inline std::set<State> states_of(const RawTransitions& r) {
  std::set<State> out;
  for (const auto& t : r.normal) {
    out.insert(t.target);
    out.insert(t.lhs.args.begin(), t.lhs.args.end());
  }
  for (const auto& e : r.eps) {
    out.insert(e.from);
    out.insert(e.to);
  }
  return out;
}

/// Searches a bijection between the states occurring in `a` and in `b` that
/// maps a onto b exactly, extending `fixed`. Plain backtracking; fine for the
/// handful of states the golden tests use.
inline bool isomorphic(const RawTransitions& a, const RawTransitions& b,
                       std::map<State, State> fixed = {},
                       const std::set<State>& a_finals = {}, const std::set<State>& b_finals = {}) {
  if (a.normal.size() != b.normal.size() || a.eps.size() != b.eps.size()) return false;
  const auto sa = states_of(a), sb = states_of(b);
  if (sa.size() != sb.size()) return false;
  std::vector<State> order(sa.begin(), sa.end());
  std::map<State, State> fwd = fixed;
  std::set<State> used;
  for (const auto& [x, y] : fixed) used.insert(y);

  auto check = [&]() {
    for (const auto& t : a.normal) {
      Transition m{t.lhs, fwd.at(t.target)};
      for (auto& q : m.lhs.args) q = fwd.at(q);
      if (!b.normal.contains(m)) return false;
    }
    for (const auto& e : a.eps)
      if (!b.eps.contains(Epsilon{fwd.at(e.from), fwd.at(e.to)})) return false;
    for (State q : sa)
      if (a_finals.contains(q) != b_finals.contains(fwd.at(q))) return false;
    return true;
  };
  std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
    if (i == order.size()) return check();
    State q = order[i];
    if (fwd.contains(q)) return go(i + 1);
    for (State r : sb) {
      if (used.contains(r)) continue;
      fwd[q] = r;
      used.insert(r);
      if (go(i + 1)) return true;
      fwd.erase(q);
      used.erase(r);
    }
    return false;
  };
  return go(0);
}

inline bool isomorphic(const TreeAutomaton& a, const TreeAutomaton& b) {
  return isomorphic(raw(a), raw(b), {}, a.finals(), b.finals());
}

// ---------------------------------------------------------------------------
// Reference recognizer, from the definition of ->*_Delta

class ReferenceRecognizer {
 public:
  ReferenceRecognizer(const TreeAutomaton& a, bool use_eps) : a_(a), use_eps_(use_eps) {}

  std::set<State> run(const Term& t) const {
    if (t.is_state()) return close({t.state()});
    std::vector<std::set<State>> args;
    for (const Term& c : t.args()) args.push_back(run(c));
    std::set<State> out;
    for (const Transition& tr : a_.transitions()) {
      if (tr.lhs.symbol != t.name() || tr.lhs.args.size() != t.arity()) continue;
      bool ok = true;
      for (std::size_t i = 0; i < args.size() && ok; ++i) ok = args[i].contains(tr.lhs.args[i]);
      if (ok) out.insert(tr.target);
    }
    return close(out);
  }

  bool accepts(const Term& t) const {
    auto r = run(t);
    return std::any_of(r.begin(), r.end(), [&](State q) { return a_.is_final(q); });
  }

 private:
  std::set<State> close(std::set<State> s) const {
    if (!use_eps_) return s;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const Epsilon& e : a_.epsilons())
        if (s.contains(e.from)) changed |= s.insert(e.to).second;
    }
    return s;
  }

  const TreeAutomaton& a_;
  bool use_eps_;
};

// ---------------------------------------------------------------------------
// Reference rewriting

inline bool ref_match(const Term& p, const Term& s, std::map<std::string, Term>& sigma) {
  if (p.is_variable()) {
    auto [it, fresh] = sigma.emplace(p.name(), s);
    return fresh || it->second == s;
  }
  if (!s.is_application() || s.name() != p.name() || s.arity() != p.arity()) return false;
  for (std::size_t i = 0; i < p.arity(); ++i)
    if (!ref_match(p.arg(i), s.arg(i), sigma)) return false;
  return true;
}

inline bool ref_has_redex(const std::vector<Rule>& rules, const Term& t) {
  for (const Rule& r : rules) {
    std::map<std::string, Term> s;
    if (ref_match(r.lhs, t, s)) return true;
  }
  for (const Term& c : t.args())
    if (ref_has_redex(rules, c)) return true;
  return false;
}

/// All terms over `sig` with height <= h, built level by level.
inline std::vector<Term> all_terms(const Signature& sig, std::size_t h) {
  std::set<Term> cur;
  for (std::size_t k = 0; k <= h; ++k) {
    std::vector<Term> pool(cur.begin(), cur.end());
    std::set<Term> next = cur;
    for (const Symbol& s : sig.symbols()) {
      std::vector<Term> args;
      std::function<void(std::size_t)> go = [&](std::size_t i) {
        if (i == s.arity) {
          next.insert(Term::app(s.name, args));
          return;
        }
        for (const Term& t : pool) {
          args.push_back(t);
          go(i + 1);
          args.pop_back();
        }
      };
      go(0);
    }
    cur = std::move(next);
  }
  return {cur.begin(), cur.end()};
}

// ---------------------------------------------------------------------------
// Random generators

inline Term random_term(const Signature& sig, std::mt19937& rng, std::size_t max_height) {
  std::vector<const Symbol*> consts, funs;
  for (const Symbol& s : sig.symbols()) (s.arity == 0 ? consts : funs).push_back(&s);
  std::function<Term(std::size_t)> go = [&](std::size_t h) -> Term {
    bool leaf = h == 0 || funs.empty() || std::uniform_int_distribution<int>(0, 2)(rng) == 0;
    const auto& pool = leaf ? consts : funs;
    const Symbol* s = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    std::vector<Term> args;
    for (std::size_t i = 0; i < s->arity; ++i) args.push_back(go(h - 1));
    return Term::app(s->name, std::move(args));
  };
  return go(max_height);
}

/// Random normalized automaton with `n` states (ids 0..n-1), some epsilons
/// when `eps` is set, and random finals.
inline TreeAutomaton random_automaton(const Signature& sig, std::mt19937& rng, std::size_t n,
                                      std::size_t transitions, bool eps = false) {
  TreeAutomaton a(sig);
  for (std::size_t i = 0; i < n; ++i) a.new_state();
  auto pick = [&]() { return State{std::uniform_int_distribution<std::uint32_t>(0, n - 1)(rng)}; };
  std::vector<const Symbol*> consts;
  for (const Symbol& s : sig.symbols())
    if (s.arity == 0) consts.push_back(&s);
  for (std::size_t i = 0; i < transitions; ++i) {
    const Symbol& s = sig.symbols()[std::uniform_int_distribution<std::size_t>(0, sig.size() - 1)(rng)];
    std::vector<State> args;
    for (std::size_t k = 0; k < s.arity; ++k) args.push_back(pick());
    a.add_transition(s.name, args, pick());
  }
  if (!consts.empty()) a.add_transition(consts.front()->name, {}, pick());
  if (eps) {
    for (std::size_t i = 0; i < n / 2; ++i) a.add_epsilon(pick(), pick());
  }
  for (std::size_t i = 0; i < n; ++i)
    if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) a.add_final(State{static_cast<std::uint32_t>(i)});
  return a;
}

inline Signature small_signature() { return Signature{{"f", 2}, {"g", 1}, {"a", 0}, {"b", 0}}; }

}  // namespace tac::testing
