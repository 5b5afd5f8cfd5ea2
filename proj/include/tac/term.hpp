#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tac/error.hpp"

namespace tac {

/// Automaton state. States are a value kind of their own, so they can never
/// be confused with signature symbols or variables.
struct State {
  std::uint32_t id = 0;

  friend auto operator<=>(const State&, const State&) = default;
};

inline std::string default_state_label(State q) {
  return "q" + std::to_string(q.id);
}

using StateLabeler = std::function<std::string(State)>;

/// Immutable first-order term over symbols, variables and states.
///
/// Nodes are shared, so copies are cheap. Ordering is total: kind first
/// (application < state < variable), then root name, then arguments
/// lexicographically.
class Term {
 public:
  enum class Kind : std::uint8_t { application, state, variable };

  static Term variable(std::string name) {
    return Term(Kind::variable, std::move(name), State{}, {});
  }
  static Term app(std::string symbol, std::vector<Term> args = {}) {
    return Term(Kind::application, std::move(symbol), State{}, std::move(args));
  }
  static Term of_state(State q) { return Term(Kind::state, {}, q, {}); }

  Kind kind() const noexcept { return node_->kind; }
  bool is_variable() const noexcept { return kind() == Kind::variable; }
  bool is_state() const noexcept { return kind() == Kind::state; }
  bool is_application() const noexcept { return kind() == Kind::application; }

  /// Symbol name for applications, variable name for variables.
  const std::string& name() const noexcept { return node_->name; }
  State state() const noexcept { return node_->state; }
  std::span<const Term> args() const noexcept { return node_->args; }
  const Term& arg(std::size_t i) const { return node_->args.at(i); }
  std::size_t arity() const noexcept { return node_->args.size(); }

  /// Number of nodes.
  std::size_t size() const noexcept { return node_->size; }
  /// Height; leaves have height 0.
  std::size_t height() const noexcept { return node_->height; }
  /// No variables (states are allowed).
  bool is_ground() const noexcept { return node_->ground; }
  bool has_states() const noexcept { return node_->has_states; }
  std::size_t hash() const noexcept { return node_->hash; }

  friend bool operator==(const Term& a, const Term& b) {
    if (a.node_ == b.node_) return true;
    if (a.hash() != b.hash()) return false;
    return compare(a, b) == std::strong_ordering::equal;
  }
  friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
    return compare(a, b);
  }

 private:
  struct Node {
    Kind kind;
    std::string name;
    State state;
    std::vector<Term> args;
    std::size_t size = 1;
    std::size_t height = 0;
    std::size_t hash = 0;
    bool ground = true;
    bool has_states = false;
  };

  Term(Kind kind, std::string name, State q, std::vector<Term> args) {
    auto node = std::make_shared<Node>();
    node->kind = kind;
    node->name = std::move(name);
    node->state = q;
    node->args = std::move(args);
    std::size_t h = std::hash<std::string>{}(node->name) ^
                    (static_cast<std::size_t>(kind) * 0x9e3779b97f4a7c15ULL) ^
                    (static_cast<std::size_t>(q.id) << 7);
    node->ground = kind != Kind::variable;
    node->has_states = kind == Kind::state;
    for (const Term& a : node->args) {
      node->size += a.size();
      node->height = std::max(node->height, a.height() + 1);
      node->ground = node->ground && a.is_ground();
      node->has_states = node->has_states || a.has_states();
      h = h * 31 + a.hash() + 0x7f4a7c15;
    }
    node->hash = h;
    node_ = std::move(node);
  }

  static std::strong_ordering compare(const Term& a, const Term& b) {
    if (a.node_ == b.node_) return std::strong_ordering::equal;
    if (auto c = a.kind() <=> b.kind(); c != 0) return c;
    if (a.is_state()) return a.state() <=> b.state();
    if (auto c = a.name() <=> b.name(); c != 0) return c;
    if (auto c = a.arity() <=> b.arity(); c != 0) return c;
    for (std::size_t i = 0; i < a.arity(); ++i) {
      if (auto c = compare(a.node_->args[i], b.node_->args[i]); c != 0) return c;
    }
    return std::strong_ordering::equal;
  }

  std::shared_ptr<const Node> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept { return t.hash(); }
};

inline std::string to_string(const Term& t,
                             const StateLabeler& label = default_state_label) {
  switch (t.kind()) {
    case Term::Kind::variable:
      return t.name();
    case Term::Kind::state:
      return label(t.state());
    case Term::Kind::application:
      break;
  }
  std::string out = t.name();
  if (t.arity() == 0) return out;
  out += '(';
  for (std::size_t i = 0; i < t.arity(); ++i) {
    if (i) out += ',';
    out += to_string(t.arg(i), label);
  }
  out += ')';
  return out;
}

inline Term constant(std::string name) { return Term::app(std::move(name)); }

// ---------------------------------------------------------------------------
// Positions

/// Sequence of 1-based argument indices; the empty position is the root.
using Position = std::vector<std::size_t>;

inline std::string to_string(const Position& p) {
  if (p.empty()) return "lambda";
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(p[i]);
  }
  return out;
}

/// All positions of t, in pre-order.
inline std::vector<Position> positions(const Term& t) {
  std::vector<Position> out;
  Position cur;
  std::function<void(const Term&)> walk = [&](const Term& s) {
    out.push_back(cur);
    for (std::size_t i = 0; i < s.arity(); ++i) {
      cur.push_back(i + 1);
      walk(s.arg(i));
      cur.pop_back();
    }
  };
  walk(t);
  return out;
}

inline const Term& subterm_at(const Term& t, const Position& p) {
  const Term* cur = &t;
  for (std::size_t i : p) {
    if (i == 0 || i > cur->arity()) {
      throw Error("position " + to_string(p) + " not in term " + to_string(t));
    }
    cur = &cur->arg(i - 1);
  }
  return *cur;
}

inline Term replace_at(const Term& t, const Position& p, const Term& s,
                       std::size_t depth = 0) {
  if (depth == p.size()) return s;
  const std::size_t i = p[depth];
  if (i == 0 || i > t.arity() || !t.is_application()) {
    throw Error("position " + to_string(p) + " not in term " + to_string(t));
  }
  std::vector<Term> args(t.args().begin(), t.args().end());
  args[i - 1] = replace_at(t.arg(i - 1), p, s, depth + 1);
  return Term::app(t.name(), std::move(args));
}

inline void collect_variables(const Term& t, std::set<std::string>& out) {
  if (t.is_variable()) {
    out.insert(t.name());
    return;
  }
  for (const Term& a : t.args()) collect_variables(a, out);
}

inline std::set<std::string> variables(const Term& t) {
  std::set<std::string> out;
  collect_variables(t, out);
  return out;
}

/// Variables in left-to-right order of first occurrence.
inline std::vector<std::string> variables_in_order(const Term& t) {
  std::vector<std::string> out;
  std::function<void(const Term&)> walk = [&](const Term& s) {
    if (s.is_variable()) {
      if (std::find(out.begin(), out.end(), s.name()) == out.end())
        out.push_back(s.name());
      return;
    }
    for (const Term& a : s.args()) walk(a);
  };
  walk(t);
  return out;
}

/// Each variable occurs at most once.
inline bool is_linear(const Term& t) {
  std::set<std::string> seen;
  bool ok = true;
  std::function<void(const Term&)> walk = [&](const Term& s) {
    if (!ok) return;
    if (s.is_variable()) {
      ok = seen.insert(s.name()).second;
      return;
    }
    for (const Term& a : s.args()) walk(a);
  };
  walk(t);
  return ok;
}

/// True when only symbols from `symbols` occur (variables and states ignored).
inline bool uses_only(const Term& t, const std::set<std::string>& symbols) {
  if (!t.is_application()) return true;
  if (!symbols.contains(t.name())) return false;
  return std::all_of(t.args().begin(), t.args().end(),
                     [&](const Term& a) { return uses_only(a, symbols); });
}

// ---------------------------------------------------------------------------
// Signatures

struct Profile {
  std::vector<std::string> arguments;
  std::string result;

  friend bool operator==(const Profile&, const Profile&) = default;
};

struct Symbol {
  std::string name;
  std::size_t arity = 0;
  std::optional<Profile> profile;
};

/// Ranked alphabet, optionally many-sorted, optionally split into
/// constructors and defined symbols.
///
/// A signature with no profiles is treated as single-sorted; every sort check
/// against it succeeds.
class Signature {
 public:
  Signature() = default;
  Signature(std::initializer_list<std::pair<std::string, std::size_t>> ranked) {
    for (const auto& [name, arity] : ranked) add(Symbol{name, arity, {}});
  }

  void declare_sort(const std::string& sort) {
    if (std::find(sorts_.begin(), sorts_.end(), sort) == sorts_.end())
      sorts_.push_back(sort);
  }

  void add(Symbol s) {
    if (index_.contains(s.name)) throw Error("duplicate symbol '" + s.name + "'");
    if (s.profile) {
      if (s.profile->arguments.size() != s.arity) {
        throw Error("profile of '" + s.name + "' has " +
                    std::to_string(s.profile->arguments.size()) +
                    " argument sorts, arity is " + std::to_string(s.arity));
      }
      for (const auto& sort : s.profile->arguments) require_sort(sort, s.name);
      require_sort(s.profile->result, s.name);
    }
    index_.emplace(s.name, symbols_.size());
    symbols_.push_back(std::move(s));
  }

  void add(const std::string& name, std::size_t arity) { add(Symbol{name, arity, {}}); }

  const std::vector<Symbol>& symbols() const noexcept { return symbols_; }
  const std::vector<std::string>& sorts() const noexcept { return sorts_; }
  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }

  const Symbol* find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &symbols_[it->second];
  }
  bool contains(const std::string& name) const { return index_.contains(name); }

  std::size_t arity(const std::string& name) const {
    const Symbol* s = find(name);
    if (!s) throw Error("unknown symbol '" + name + "'");
    return s->arity;
  }

  /// True when at least one symbol carries a profile.
  bool is_sorted() const {
    return std::any_of(symbols_.begin(), symbols_.end(),
                       [](const Symbol& s) { return s.profile.has_value(); });
  }
  /// True when every symbol carries a profile.
  bool fully_sorted() const {
    return !symbols_.empty() &&
           std::all_of(symbols_.begin(), symbols_.end(),
                       [](const Symbol& s) { return s.profile.has_value(); });
  }

  /// The unique constant of `sort`, when the sort has exactly one.
  std::optional<std::string> unique_constant(const std::string& sort) const {
    std::optional<std::string> found;
    for (const Symbol& s : symbols_) {
      if (s.arity != 0 || !s.profile || s.profile->result != sort) continue;
      if (found) return std::nullopt;
      found = s.name;
    }
    return found;
  }

  void set_defined(const std::set<std::string>& defined) {
    for (const auto& d : defined) {
      if (!contains(d)) throw Error("unknown defined symbol '" + d + "'");
    }
    defined_ = defined;
  }
  bool has_split() const noexcept { return defined_.has_value(); }
  bool is_defined(const std::string& name) const {
    return defined_ && defined_->contains(name);
  }
  bool is_constructor(const std::string& name) const {
    return defined_ && contains(name) && !defined_->contains(name);
  }
  std::set<std::string> defined() const { return defined_.value_or(std::set<std::string>{}); }
  std::set<std::string> constructors() const {
    std::set<std::string> out;
    for (const Symbol& s : symbols_)
      if (!is_defined(s.name)) out.insert(s.name);
    return out;
  }
  std::set<std::string> names() const {
    std::set<std::string> out;
    for (const Symbol& s : symbols_) out.insert(s.name);
    return out;
  }

  /// Throws unless every application in t uses a declared symbol at its arity.
  void validate(const Term& t) const {
    if (!t.is_application()) return;
    const Symbol* s = find(t.name());
    if (!s) throw Error("undeclared symbol '" + t.name() + "'");
    if (s->arity != t.arity()) {
      throw Error("symbol '" + t.name() + "' has arity " + std::to_string(s->arity) +
                  ", used with " + std::to_string(t.arity()) + " arguments");
    }
    for (const Term& a : t.args()) validate(a);
  }

  /// Same symbols with the same arities; sorts and splits are not compared.
  bool same_alphabet(const Signature& other) const {
    if (size() != other.size()) return false;
    return std::all_of(symbols_.begin(), symbols_.end(), [&](const Symbol& s) {
      const Symbol* o = other.find(s.name);
      return o && o->arity == s.arity;
    });
  }

 private:
  void require_sort(const std::string& sort, const std::string& symbol) const {
    if (std::find(sorts_.begin(), sorts_.end(), sort) == sorts_.end())
      throw Error("symbol '" + symbol + "' uses undeclared sort '" + sort + "'");
  }

  std::vector<Symbol> symbols_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> sorts_;
  std::optional<std::set<std::string>> defined_;
};

// ---------------------------------------------------------------------------
// Substitutions and matching

using Substitution = std::map<std::string, Term>;

inline Term apply(const Term& t, const Substitution& sigma) {
  if (t.is_variable()) {
    auto it = sigma.find(t.name());
    return it == sigma.end() ? t : it->second;
  }
  if (t.arity() == 0) return t;
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const Term& a : t.args()) args.push_back(tac::apply(a, sigma));
  return Term::app(t.name(), std::move(args));
}

namespace detail {
inline bool match_into(const Term& pattern, const Term& subject, Substitution& sigma) {
  if (pattern.is_variable()) {
    auto [it, inserted] = sigma.emplace(pattern.name(), subject);
    return inserted || it->second == subject;
  }
  if (pattern.is_state()) return subject.is_state() && subject.state() == pattern.state();
  if (!subject.is_application() || subject.name() != pattern.name() ||
      subject.arity() != pattern.arity())
    return false;
  for (std::size_t i = 0; i < pattern.arity(); ++i) {
    if (!match_into(pattern.arg(i), subject.arg(i), sigma)) return false;
  }
  return true;
}
}  // namespace detail

/// Syntactic matching: sigma with pattern·sigma = subject. Repeated variables
/// must bind equal subterms. States in the subject behave as constants.
inline std::optional<Substitution> match_term(const Term& pattern, const Term& subject) {
  Substitution sigma;
  if (!detail::match_into(pattern, subject, sigma)) return std::nullopt;
  return sigma;
}

/// Renames variables to _1, _2, ... in order of first occurrence across
/// `terms`, so that alpha-equivalent tuples compare equal.
inline std::vector<Term> canonical_variables(std::span<const Term> terms) {
  Substitution renaming;
  std::size_t next = 0;
  for (const Term& t : terms) {
    for (const auto& v : variables_in_order(t)) {
      if (!renaming.contains(v))
        renaming.emplace(v, Term::variable("_" + std::to_string(++next)));
    }
  }
  std::vector<Term> out;
  for (const Term& t : terms) out.push_back(tac::apply(t, renaming));
  return out;
}

}  // namespace tac
