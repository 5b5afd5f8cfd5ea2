#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tac/term.hpp"

namespace tac {

struct Rule {
  Term lhs;
  Term rhs;

  friend bool operator==(const Rule&, const Rule&) = default;
};

inline std::string to_string(const Rule& r) {
  return to_string(r.lhs) + "->" + to_string(r.rhs);
}

/// Throws unless lhs is not a variable and Var(rhs) is a subset of Var(lhs).
inline void validate_rule(const Rule& r) {
  if (r.lhs.is_variable()) throw Error("rule lhs is a variable: " + to_string(r));
  if (r.lhs.has_states() || r.rhs.has_states())
    throw Error("rule mentions automaton states: " + to_string(r));
  auto lv = variables(r.lhs);
  for (const auto& v : variables(r.rhs)) {
    if (!lv.contains(v))
      throw Error("variable " + v + " of rhs not bound by lhs: " + to_string(r));
  }
}

/// Term rewriting system. Rule order is stable and defines iteration order.
class Trs {
 public:
  Trs() = default;
  Trs(Signature signature, std::vector<Rule> rules)
      : signature_(std::move(signature)), rules_(std::move(rules)) {
    for (const Rule& r : rules_) {
      validate_rule(r);
      signature_.validate(r.lhs);
      signature_.validate(r.rhs);
    }
  }

  const Signature& signature() const noexcept { return signature_; }
  Signature& signature() noexcept { return signature_; }
  const std::vector<Rule>& rules() const noexcept { return rules_; }
  std::size_t size() const noexcept { return rules_.size(); }
  bool empty() const noexcept { return rules_.empty(); }

 private:
  Signature signature_;
  std::vector<Rule> rules_;
};

enum class EquationRole { reflexivity, contracting, r_equation, user };

struct Equation {
  Term lhs;
  Term rhs;
  EquationRole role = EquationRole::user;
};

inline std::string to_string(const Equation& e) {
  return to_string(e.lhs) + "=" + to_string(e.rhs);
}

struct EquationSet {
  std::vector<Equation> equations;

  std::size_t size() const noexcept { return equations.size(); }
  bool empty() const noexcept { return equations.empty(); }
  auto begin() const noexcept { return equations.begin(); }
  auto end() const noexcept { return equations.end(); }
  void add(Equation e) { equations.push_back(std::move(e)); }
  void append(const EquationSet& other) {
    equations.insert(equations.end(), other.begin(), other.end());
  }
};

/// Key identifying an equation modulo variable renaming and orientation.
inline std::pair<Term, Term> equation_key(const Equation& e) {
  const Term lr[] = {e.lhs, e.rhs};
  const Term rl[] = {e.rhs, e.lhs};
  auto a = canonical_variables(lr);
  auto b = canonical_variables(rl);
  std::pair<Term, Term> ka{a[0], a[1]}, kb{b[0], b[1]};
  return std::min(ka, kb);
}

/// Equations of `required` that have no counterpart in `set`, comparing
/// modulo variable renaming and orientation.
inline std::vector<Equation> missing_equations(const EquationSet& set,
                                               const EquationSet& required) {
  std::set<std::pair<Term, Term>> have;
  for (const Equation& e : set) have.insert(equation_key(e));
  std::vector<Equation> out;
  for (const Equation& e : required) {
    if (!have.contains(equation_key(e))) out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rewriting

/// All distinct one-step successors of t, over every position, rule and match.
inline std::set<Term> rewrite_one(const Trs& trs, const Term& t) {
  std::set<Term> out;
  for (const Position& p : positions(t)) {
    const Term& sub = subterm_at(t, p);
    if (!sub.is_application()) continue;
    for (const Rule& r : trs.rules()) {
      if (auto sigma = match_term(r.lhs, sub)) {
        out.insert(replace_at(t, p, tac::apply(r.rhs, *sigma)));
      }
    }
  }
  return out;
}

/// True iff no rule applies anywhere in t.
inline bool is_irreducible(const Trs& trs, const Term& t) {
  if (!t.is_application()) return true;
  for (const Rule& r : trs.rules()) {
    if (match_term(r.lhs, t)) return false;
  }
  return std::all_of(t.args().begin(), t.args().end(),
                     [&](const Term& a) { return is_irreducible(trs, a); });
}

struct ConstructorSplit {
  std::set<std::string> constructors;
  std::set<std::string> defined;
};

/// D = root symbols of left-hand sides, C = the rest of the signature.
inline ConstructorSplit split_constructors(const Trs& trs) {
  ConstructorSplit split;
  for (const Rule& r : trs.rules()) split.defined.insert(r.lhs.name());
  for (const Symbol& s : trs.signature().symbols()) {
    if (!split.defined.contains(s.name)) split.constructors.insert(s.name);
  }
  return split;
}

/// Copy of the TRS whose signature records its constructor split.
inline Trs with_constructor_split(Trs trs) {
  trs.signature().set_defined(split_constructors(trs).defined);
  return trs;
}

struct LinearityReport {
  bool left_linear = true;
  std::vector<std::size_t> offenders;  // rule indices
};

inline LinearityReport check_left_linear(const Trs& trs) {
  LinearityReport report;
  for (std::size_t i = 0; i < trs.rules().size(); ++i) {
    if (!is_linear(trs.rules()[i].lhs)) {
      report.left_linear = false;
      report.offenders.push_back(i);
    }
  }
  return report;
}

inline void require_left_linear(const Trs& trs) {
  auto report = check_left_linear(trs);
  if (!report.left_linear) {
    throw Error("TRS is not left-linear: rule " +
                to_string(trs.rules()[report.offenders.front()]));
  }
}

// ---------------------------------------------------------------------------
// Sorts

struct SortVerdict {
  bool ok = true;
  /// Sort of the checked object; empty for unsorted signatures or a bare
  /// variable whose sort is not constrained.
  std::optional<std::string> sort;
  std::string detail;
};

namespace detail {

using SortEnv = std::map<std::string, std::string>;

/// Infers the sort of t, binding variable sorts in env. `expected` is the
/// sort demanded by the context, if any.
inline SortVerdict sort_of(const Signature& sig, const Term& t,
                           const std::optional<std::string>& expected, SortEnv& env,
                           Position& at) {
  auto clash = [&](const std::string& found) {
    return SortVerdict{false, std::nullopt,
                       "ill-sorted at position " + to_string(at) + ": expected " +
                           *expected + ", found " + found + " in " + to_string(t)};
  };
  if (t.is_variable()) {
    auto it = env.find(t.name());
    if (it == env.end()) {
      if (expected) env.emplace(t.name(), *expected);
      return {true, expected, {}};
    }
    if (expected && *expected != it->second) return clash(it->second);
    return {true, it->second, {}};
  }
  if (t.is_state()) return {true, expected, {}};
  const Symbol* s = sig.find(t.name());
  if (!s) return {false, std::nullopt, "undeclared symbol '" + t.name() + "'"};
  if (!s->profile) {
    return {false, std::nullopt, "symbol '" + t.name() + "' has no profile"};
  }
  if (expected && *expected != s->profile->result) return clash(s->profile->result);
  for (std::size_t i = 0; i < t.arity(); ++i) {
    at.push_back(i + 1);
    auto v = sort_of(sig, t.arg(i), s->profile->arguments[i], env, at);
    if (!v.ok) return v;
    at.pop_back();
  }
  return {true, s->profile->result, {}};
}

inline SortVerdict sort_pair(const Signature& sig, const Term& l, const Term& r,
                             const std::string& what) {
  if (!sig.is_sorted()) return {};
  SortEnv env;
  Position at;
  auto vl = sort_of(sig, l, std::nullopt, env, at);
  if (!vl.ok) return {false, {}, what + " lhs " + vl.detail};
  at.clear();
  auto vr = sort_of(sig, r, vl.sort, env, at);
  if (!vr.ok) return {false, {}, what + " rhs " + vr.detail};
  if (!vl.sort && vr.sort) {
    // lhs was a bare variable first seen unconstrained
    at.clear();
    vl = sort_of(sig, l, vr.sort, env, at);
    if (!vl.ok) return {false, {}, what + " lhs " + vl.detail};
  }
  return {true, vl.sort ? vl.sort : vr.sort, {}};
}

}  // namespace detail

/// Well-sortedness of a term. Always succeeds on unsorted signatures.
inline SortVerdict check_sorts(const Signature& sig, const Term& t) {
  if (!sig.is_sorted()) return {};
  detail::SortEnv env;
  Position at;
  return detail::sort_of(sig, t, std::nullopt, env, at);
}

/// Every rule has well-sorted sides of equal sort.
inline SortVerdict check_sorts(const Trs& trs) {
  for (std::size_t i = 0; i < trs.rules().size(); ++i) {
    const Rule& r = trs.rules()[i];
    auto v = detail::sort_pair(trs.signature(), r.lhs, r.rhs,
                               "rule #" + std::to_string(i + 1) + " (" + to_string(r) + ")");
    if (!v.ok) return v;
  }
  return {};
}

/// Every equation has well-sorted sides of equal sort.
inline SortVerdict check_sorts(const Signature& sig, const EquationSet& eqs) {
  for (std::size_t i = 0; i < eqs.size(); ++i) {
    const Equation& e = eqs.equations[i];
    auto v = detail::sort_pair(sig, e.lhs, e.rhs,
                               "equation #" + std::to_string(i + 1) + " (" + to_string(e) + ")");
    if (!v.ok) return v;
  }
  return {};
}

}  // namespace tac
