#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tac/algebra.hpp"
#include "tac/completion.hpp"
#include "tac/rewriting.hpp"

namespace tac {

/// All ground terms over `sig` of height <= height. Sets above `limit`
/// elements stop growing and report truncation.
inline std::set<Term> ground_terms(const Signature& sig, std::size_t height,
                                   std::size_t limit = 1'000'000, bool* truncated = nullptr) {
  std::set<Term> level;
  for (std::size_t h = 0; h <= height; ++h) {
    std::set<Term> next = level;
    std::vector<Term> pool(level.begin(), level.end());
    for (const Symbol& s : sig.symbols()) {
      if (s.arity == 0) {
        next.insert(constant(s.name));
        continue;
      }
      if (h == 0 || pool.empty()) continue;
      std::vector<Term> args;
      std::function<bool(std::size_t)> build = [&](std::size_t i) {
        if (i == s.arity) {
          if (next.size() >= limit) {
            if (truncated) *truncated = true;
            return false;
          }
          next.insert(Term::app(s.name, args));
          return true;
        }
        for (const Term& t : pool) {
          args.push_back(t);
          bool go = build(i + 1);
          args.pop_back();
          if (!go) return false;
        }
        return true;
      };
      build(0);
    }
    level = std::move(next);
  }
  return level;
}

/// Ground terms of height <= height that are well-sorted (all terms when
/// the signature is unsorted).
inline std::set<Term> well_sorted_ground_terms(const Signature& sig, std::size_t height) {
  auto all = ground_terms(sig, height);
  if (!sig.is_sorted()) return all;
  std::set<Term> out;
  for (const Term& t : all)
    if (check_sorts(sig, t).ok) out.insert(t);
  return out;
}

struct OracleBudget {
  std::size_t steps = 6;
  std::size_t max_term_size = 40;
  std::size_t max_set_size = 100000;
};

/// Bounded exploration result; `truncated` is set whenever a budget cut the
/// exploration short, so absence of a term is then inconclusive.
struct ReachSet {
  std::set<Term> terms;
  std::size_t generations = 0;
  bool truncated = false;

  bool contains(const Term& t) const { return terms.contains(t); }
};

/// Terms reachable from `seeds` in at most budget.steps rewrite steps.
inline ReachSet descendants_bounded(const Trs& trs, const std::set<Term>& seeds,
                                    OracleBudget budget = {}) {
  ReachSet out;
  out.terms = seeds;
  std::vector<Term> frontier(seeds.begin(), seeds.end());
  for (std::size_t g = 0; g < budget.steps && !frontier.empty(); ++g) {
    std::vector<Term> next;
    for (const Term& t : frontier) {
      for (const Term& s : rewrite_one(trs, t)) {
        if (s.size() > budget.max_term_size) {
          out.truncated = true;
          continue;
        }
        if (out.terms.size() >= budget.max_set_size) {
          out.truncated = true;
          return out;
        }
        if (out.terms.insert(s).second) next.push_back(s);
      }
    }
    frontier = std::move(next);
    out.generations = g + 1;
  }
  // frontier can still rewrite further; that is the step budget, not a cut
  return out;
}

inline ReachSet descendants_bounded(const Trs& trs, const std::set<Term>& seeds,
                                    std::size_t steps) {
  OracleBudget b;
  b.steps = steps;
  return descendants_bounded(trs, seeds, b);
}

namespace detail {

/// One equation application u -> v at some position of t, instantiating
/// variables of v that u does not bind with ground terms from `pool`.
inline void apply_oriented(const Term& u, const Term& v, const Term& t,
                           const std::vector<Term>& pool, std::size_t height_cap,
                           std::set<Term>& out) {
  std::vector<std::string> free_vars;
  const auto bound = variables(u);
  for (const auto& x : variables_in_order(v))
    if (!bound.contains(x)) free_vars.push_back(x);
  for (const Position& p : positions(t)) {
    const Term& sub = subterm_at(t, p);
    auto theta = u.is_variable() ? std::optional{Substitution{{u.name(), sub}}} : match_term(u, sub);
    if (!theta) continue;
    std::function<void(std::size_t)> inst = [&](std::size_t i) {
      if (i == free_vars.size()) {
        Term s = replace_at(t, p, tac::apply(v, *theta));
        if (s.height() <= height_cap) out.insert(s);
        return;
      }
      for (const Term& g : pool) {
        if (g.height() + p.size() > height_cap) continue;
        theta->insert_or_assign(free_vars[i], g);
        inst(i + 1);
      }
      theta->erase(free_vars[i]);
    };
    inst(0);
  }
}

}  // namespace detail

struct ClosureResult {
  std::set<Term> terms;
  bool truncated = false;
};

/// Terms reachable from t by applying equations in either direction at any
/// position, restricted to height <= height_cap, up to a fixpoint.
inline ClosureResult e_closure_bounded(const EquationSet& eqs, const Signature& sig,
                                       const Term& t, std::size_t height_cap,
                                       std::size_t max_set_size = 100000) {
  ClosureResult out;
  out.terms.insert(t);
  bool needs_pool = false;
  for (const Equation& e : eqs) {
    auto lv = variables(e.lhs), rv = variables(e.rhs);
    needs_pool |= lv != rv;
  }
  std::vector<Term> pool;
  if (needs_pool) {
    bool cut = false;
    auto terms = ground_terms(sig, height_cap, max_set_size, &cut);
    pool.assign(terms.begin(), terms.end());
    out.truncated |= cut;
  }
  std::vector<Term> frontier{t};
  while (!frontier.empty()) {
    std::vector<Term> next;
    for (const Term& s : frontier) {
      std::set<Term> found;
      for (const Equation& e : eqs) {
        detail::apply_oriented(e.lhs, e.rhs, s, pool, height_cap, found);
        detail::apply_oriented(e.rhs, e.lhs, s, pool, height_cap, found);
      }
      for (const Term& n : found) {
        if (out.terms.size() >= max_set_size) {
          out.truncated = true;
          return out;
        }
        if (out.terms.insert(n).second) next.push_back(n);
      }
    }
    frontier = std::move(next);
  }
  return out;
}

/// Bounded rewriting modulo E: `steps` rounds of (E-closure, one rewrite),
/// followed by a final E-closure.
inline ReachSet re_descendants_bounded(const Trs& trs, const EquationSet& eqs,
                                       const std::set<Term>& seeds, std::size_t steps,
                                       std::size_t height_cap,
                                       std::size_t max_set_size = 100000) {
  ReachSet out;
  auto close = [&](const std::set<Term>& in) {
    std::set<Term> res;
    for (const Term& t : in) {
      if (res.contains(t)) continue;  // same class as an earlier seed
      auto c = e_closure_bounded(eqs, trs.signature(), t, height_cap, max_set_size);
      out.truncated |= c.truncated;
      res.insert(c.terms.begin(), c.terms.end());
      if (res.size() >= max_set_size) {
        out.truncated = true;
        break;
      }
    }
    return res;
  };
  std::set<Term> cur = close(seeds);
  out.terms = cur;
  for (std::size_t r = 0; r < steps; ++r) {
    std::set<Term> rewritten;
    for (const Term& t : cur) {
      for (const Term& s : rewrite_one(trs, t)) {
        if (s.height() > height_cap) {
          out.truncated = true;
          continue;
        }
        if (!out.terms.contains(s)) rewritten.insert(s);
      }
    }
    if (rewritten.empty()) break;
    std::set<Term> closed = close(rewritten);
    cur.clear();
    for (const Term& t : closed)
      if (out.terms.insert(t).second) cur.insert(t);
    out.generations = r + 1;
    if (out.terms.size() >= max_set_size) {
      out.truncated = true;
      break;
    }
  }
  return out;
}

struct LowerBoundVerdict {
  bool pass = true;
  std::vector<Term> witnesses;  // reachable terms the automaton rejects
  std::size_t checked = 0;
  bool truncated = false;
};

/// Every term reachable in <= steps rewrites from a member of L(a0) of
/// height <= seed_depth must be accepted by the completed automaton.
inline LowerBoundVerdict verify_lower_bound(const TreeAutomaton& completed, const Trs& trs,
                                            const TreeAutomaton& a0, std::size_t seed_depth,
                                            std::size_t steps) {
  LowerBoundVerdict v;
  OracleBudget budget;
  budget.steps = steps;
  auto reach = descendants_bounded(trs, enumerate(a0, seed_depth), budget);
  v.truncated = reach.truncated;
  for (const Term& t : reach.terms) {
    ++v.checked;
    if (!accepts(completed, t)) {
      v.pass = false;
      if (v.witnesses.size() < 10) v.witnesses.push_back(t);
    }
  }
  return v;
}

inline LowerBoundVerdict verify_lower_bound(const CompletionResult& result, const Trs& trs,
                                            const TreeAutomaton& a0, std::size_t seed_depth,
                                            std::size_t steps) {
  return verify_lower_bound(result.automaton, trs, a0, seed_depth, steps);
}

/// Necessary condition for the upper bound, checked on small samples: each
/// member of L(A^i) up to `depth` should be found among the bounded
/// rewriting-modulo-E descendants of L(a0). The oracle is incomplete, so
/// misses are returned as warnings rather than treated as failures.
inline std::vector<std::string> upper_bound_warnings(const std::vector<TreeAutomaton>& history,
                                                     const Trs& trs, const EquationSet& eqs,
                                                     const TreeAutomaton& a0,
                                                     std::size_t depth = 3,
                                                     std::size_t steps = 4) {
  std::vector<std::string> out;
  auto reach = re_descendants_bounded(trs, eqs, enumerate(a0, depth), steps, depth + 2);
  for (std::size_t i = 0; i < history.size(); ++i) {
    for (const Term& t : enumerate(history[i], depth)) {
      if (!reach.contains(t)) {
        out.push_back("A^" + std::to_string(i) + " accepts " + to_string(t) +
                      " not found by the bounded R/E oracle" +
                      (reach.truncated ? " (oracle truncated)" : ""));
      }
    }
  }
  return out;
}

}  // namespace tac
