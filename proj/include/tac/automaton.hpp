#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tac/term.hpp"

namespace tac {

/// Left-hand side f(q1,...,qn) of a normalized transition.
struct Configuration {
  std::string symbol;
  std::vector<State> args;

  friend auto operator<=>(const Configuration&, const Configuration&) = default;
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Normalized transition f(q1,...,qn) -> q.
struct Transition {
  Configuration lhs;
  State target;

  friend auto operator<=>(const Transition&, const Transition&) = default;
  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Epsilon transition q -> q'.
struct Epsilon {
  State from;
  State to;

  friend auto operator<=>(const Epsilon&, const Epsilon&) = default;
  friend bool operator==(const Epsilon&, const Epsilon&) = default;
};

inline std::string to_string(const Transition& t,
                             const StateLabeler& label = default_state_label) {
  std::string out = t.lhs.symbol;
  if (!t.lhs.args.empty()) {
    out += '(';
    for (std::size_t i = 0; i < t.lhs.args.size(); ++i) {
      if (i) out += ',';
      out += label(t.lhs.args[i]);
    }
    out += ')';
  }
  return out + "->" + label(t.target);
}

inline std::string to_string(const Epsilon& e,
                             const StateLabeler& label = default_state_label) {
  return label(e.from) + "->" + label(e.to);
}

/// Which transitions a recognition may use.
enum class Recognition {
  full,      ///< normalized and epsilon transitions
  eps_free,  ///< normalized transitions only
};

/// Bottom-up nondeterministic tree automaton with epsilon transitions.
///
/// States are allocated from a monotone counter and never reused. The
/// epsilon closure is computed lazily and dropped on every mutation.
class TreeAutomaton {
 public:
  using Delta = std::map<Configuration, std::set<State>>;

  TreeAutomaton() = default;
  explicit TreeAutomaton(Signature signature) : signature_(std::move(signature)) {}

  const Signature& signature() const noexcept { return signature_; }
  Signature& signature() noexcept { return signature_; }

  State new_state() {
    State q{next_id_++};
    states_.insert(q);
    invalidate();
    return q;
  }

  /// Adds a state with an explicit index; the counter moves past it.
  void add_state(State q) {
    states_.insert(q);
    next_id_ = std::max(next_id_, q.id + 1);
    invalidate();
  }

  /// Future fresh states get indices >= next.
  void advance_counter(std::uint32_t next) { next_id_ = std::max(next_id_, next); }

  void add_final(State q) {
    require_state(q);
    finals_.insert(q);
  }

  bool add_transition(const Transition& t) {
    const Symbol* s = signature_.find(t.lhs.symbol);
    if (!s) throw Error("symbol '" + t.lhs.symbol + "' not in signature");
    if (s->arity != t.lhs.args.size()) {
      throw Error("transition " + to_string(t) + " does not match arity " +
                  std::to_string(s->arity));
    }
    for (State q : t.lhs.args) require_state(q);
    require_state(t.target);
    return delta_[t.lhs].insert(t.target).second;
  }

  bool add_transition(std::string symbol, std::vector<State> args, State target) {
    return add_transition(Transition{Configuration{std::move(symbol), std::move(args)}, target});
  }

  bool add_epsilon(State from, State to) {
    require_state(from);
    require_state(to);
    if (from == to) return false;
    bool inserted = eps_.insert(Epsilon{from, to}).second;
    if (inserted) invalidate();
    return inserted;
  }

  bool remove_transition(const Transition& t) {
    auto it = delta_.find(t.lhs);
    if (it == delta_.end() || !it->second.erase(t.target)) return false;
    if (it->second.empty()) delta_.erase(it);
    return true;
  }

  bool remove_epsilon(const Epsilon& e) {
    bool removed = eps_.erase(e) > 0;
    if (removed) invalidate();
    return removed;
  }

  const std::set<State>& states() const noexcept { return states_; }
  const std::set<State>& finals() const noexcept { return finals_; }
  bool has_state(State q) const { return states_.contains(q); }
  bool is_final(State q) const { return finals_.contains(q); }
  const Delta& delta() const noexcept { return delta_; }
  const std::set<Epsilon>& epsilons() const noexcept { return eps_; }
  std::uint32_t next_state_id() const noexcept { return next_id_; }

  /// Flattened normalized transitions, in (lhs, target) order.
  std::vector<Transition> transitions() const {
    std::vector<Transition> out;
    for (const auto& [lhs, targets] : delta_)
      for (State q : targets) out.push_back(Transition{lhs, q});
    return out;
  }

  std::size_t normalized_count() const {
    std::size_t n = 0;
    for (const auto& [lhs, targets] : delta_) n += targets.size();
    return n;
  }
  std::size_t transition_count() const { return normalized_count() + eps_.size(); }

  /// Targets of f(q1,...,qn), or nullptr when there are none.
  const std::set<State>* targets(const Configuration& lhs) const {
    auto it = delta_.find(lhs);
    return it == delta_.end() ? nullptr : &it->second;
  }

  /// Range of delta entries whose symbol is `symbol`.
  std::pair<Delta::const_iterator, Delta::const_iterator> transitions_for(
      const std::string& symbol) const {
    auto lo = delta_.lower_bound(Configuration{symbol, {}});
    auto hi = lo;
    while (hi != delta_.end() && hi->first.symbol == symbol) ++hi;
    return {lo, hi};
  }

  /// States reachable from q by zero or more epsilon transitions.
  const std::set<State>& epsilon_closure(State q) const {
    const auto& closure = closure_map();
    auto it = closure.find(q);
    if (it == closure.end()) throw Error("unknown state " + default_state_label(q));
    return it->second;
  }

  /// No two normalized transitions share a left-hand side.
  bool is_eps_free_deterministic() const {
    return std::all_of(delta_.begin(), delta_.end(),
                       [](const auto& entry) { return entry.second.size() <= 1; });
  }

  void set_state_name(State q, std::string name) { names_[q] = std::move(name); }
  const std::map<State, std::string>& state_names() const noexcept { return names_; }
  std::string state_label(State q) const {
    auto it = names_.find(q);
    return it == names_.end() ? default_state_label(q) : it->second;
  }
  StateLabeler labeler() const {
    return [this](State q) { return state_label(q); };
  }

 private:
  using ClosureMap = std::map<State, std::set<State>>;

  void require_state(State q) const {
    if (!states_.contains(q)) throw Error("unknown state " + state_label(q));
  }

  void invalidate() {
    std::lock_guard lock(cache_.mutex);
    cache_.closure.reset();
  }

  const ClosureMap& closure_map() const {
    std::lock_guard lock(cache_.mutex);
    if (!cache_.closure) {
      auto closure = std::make_shared<ClosureMap>();
      std::map<State, std::vector<State>> succ;
      for (const Epsilon& e : eps_) succ[e.from].push_back(e.to);
      for (State q : states_) {
        std::set<State>& reach = (*closure)[q];
        std::vector<State> stack{q};
        reach.insert(q);
        while (!stack.empty()) {
          State cur = stack.back();
          stack.pop_back();
          auto it = succ.find(cur);
          if (it == succ.end()) continue;
          for (State n : it->second)
            if (reach.insert(n).second) stack.push_back(n);
        }
      }
      cache_.closure = std::move(closure);
    }
    return *cache_.closure;
  }

  // Copies and moves start with an empty cache.
  struct Cache {
    Cache() = default;
    Cache(const Cache&) {}
    Cache& operator=(const Cache&) {
      std::lock_guard lock(mutex);
      closure.reset();
      return *this;
    }
    std::mutex mutex;
    std::shared_ptr<const ClosureMap> closure;
  };

  Signature signature_;
  std::set<State> states_;
  std::set<State> finals_;
  Delta delta_;
  std::set<Epsilon> eps_;
  std::uint32_t next_id_ = 0;
  std::map<State, std::string> names_;
  mutable Cache cache_;
};

// ---------------------------------------------------------------------------
// Recognition

/// States q with t ->* q (full) or t ->(no eps)* q (eps_free), computed
/// bottom-up. t may contain states as leaves but no variables.
inline std::set<State> reachable_states(const TreeAutomaton& a, const Term& t,
                                        Recognition mode = Recognition::full) {
  auto close = [&](std::set<State> s) {
    if (mode == Recognition::eps_free) return s;
    std::set<State> out;
    for (State q : s) {
      const auto& c = a.epsilon_closure(q);
      out.insert(c.begin(), c.end());
    }
    return out;
  };
  switch (t.kind()) {
    case Term::Kind::variable:
      throw Error("cannot recognize a term with variable " + t.name());
    case Term::Kind::state:
      if (!a.has_state(t.state()))
        throw Error("unknown state " + a.state_label(t.state()));
      return close({t.state()});
    case Term::Kind::application:
      break;
  }
  const Symbol* s = a.signature().find(t.name());
  if (!s || s->arity != t.arity())
    throw Error("symbol '" + t.name() + "' not in signature at this arity");
  std::vector<std::set<State>> child;
  child.reserve(t.arity());
  for (const Term& c : t.args()) {
    child.push_back(reachable_states(a, c, mode));
    if (child.back().empty()) return {};
  }
  std::set<State> out;
  auto [lo, hi] = a.transitions_for(t.name());
  for (auto it = lo; it != hi; ++it) {
    const auto& args = it->first.args;
    bool ok = true;
    for (std::size_t i = 0; ok && i < args.size(); ++i) ok = child[i].contains(args[i]);
    if (ok) out.insert(it->second.begin(), it->second.end());
  }
  return close(std::move(out));
}

inline bool recognizes(const TreeAutomaton& a, const Term& t, State q,
                       Recognition mode = Recognition::full) {
  if (!a.has_state(q)) throw Error("unknown state " + a.state_label(q));
  return reachable_states(a, t, mode).contains(q);
}

/// t is in L(A): some final state is reachable using all transitions.
inline bool accepts(const TreeAutomaton& a, const Term& t) {
  auto reach = reachable_states(a, t, Recognition::full);
  return std::any_of(reach.begin(), reach.end(), [&](State q) { return a.is_final(q); });
}

}  // namespace tac
