#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tac/automaton.hpp"
#include "tac/error.hpp"
#include "tac/rewriting.hpp"

namespace tac {

template <class T>
struct Named {
  std::string name;
  T value;
};

/// Parsed specification: one signature shared by every section.
struct SpecFile {
  Signature signature;
  std::vector<std::string> variables;
  std::vector<Named<Trs>> trs;
  std::vector<Named<TreeAutomaton>> automata;
  std::vector<Named<EquationSet>> equations;

  const Trs* find_trs(const std::string& name) const { return find(trs, name); }
  const TreeAutomaton* find_automaton(const std::string& name) const { return find(automata, name); }
  const EquationSet* find_equations(const std::string& name) const { return find(equations, name); }

 private:
  template <class T>
  static const T* find(const std::vector<Named<T>>& v, const std::string& name) {
    for (const auto& n : v)
      if (n.name == name) return &n.value;
    return nullptr;
  }
};

namespace detail {

struct Token {
  enum Kind { ident, lparen, rparen, comma, arrow, equals, colon, end } kind;
  std::string text;
  std::size_t line = 1, column = 1;
};

inline std::string describe(const Token& t) {
  return t.kind == Token::end ? "end of input" : "'" + t.text + "'";
}

inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token t{Token::end, {}, line, col};
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      t.kind = Token::arrow;
      t.text = "->";
      advance(2);
    } else if (ident_char(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      t.kind = Token::ident;
      t.text = std::string(text.substr(i, j - i));
      advance(j - i);
    } else {
      switch (c) {
        case '(': t.kind = Token::lparen; break;
        case ')': t.kind = Token::rparen; break;
        case ',': t.kind = Token::comma; break;
        case '=': t.kind = Token::equals; break;
        case ':': t.kind = Token::colon; break;
        default:
          throw ParseError(std::string("unexpected character '") + c + "'", line, col);
      }
      t.text = std::string(1, c);
      advance(1);
    }
    out.push_back(std::move(t));
  }
  out.push_back(Token{Token::end, {}, line, col});
  return out;
}

inline bool is_keyword(const std::string& s) {
  static const std::set<std::string> k{"Ops", "Vars", "TRS", "Automaton", "States",
                                        "Final", "Transitions", "Equations", "Rules", "Sorts"};
  return k.contains(s);
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

  SpecFile parse() {
    while (!at_end()) {
      const Token& t = peek();
      if (t.kind != Token::ident || !is_keyword(t.text)) fail(t, "expected a section keyword");
      if (t.text == "Sorts") {
        if (seen_ops_) fail(t, "Sorts must precede Ops");
        next();
        parse_sorts();
      } else if (t.text == "Ops") {
        next();
        seen_ops_ = true;
        parse_ops();
      } else if (t.text == "Vars") {
        next();
        parse_vars();
      } else if (t.text == "TRS") {
        next();
        parse_trs();
      } else if (t.text == "Automaton") {
        next();
        parse_automaton();
      } else if (t.text == "Equations") {
        next();
        parse_equations();
      } else {
        fail(t, "unexpected keyword");
      }
    }
    return std::move(spec_);
  }

  Term parse_single_term() {
    Term t = term(nullptr);
    if (!at_end()) fail(peek(), "trailing input after term");
    return t;
  }

  void use_context(const SpecFile& spec) {
    spec_.signature = spec.signature;
    spec_.variables = spec.variables;
    vars_ = {spec.variables.begin(), spec.variables.end()};
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Token::end; }
  bool at_section_end() const {
    return at_end() || (peek().kind == Token::ident && is_keyword(peek().text));
  }

  [[noreturn]] static void fail(const Token& t, const std::string& msg) {
    throw ParseError(msg + " at " + describe(t), t.line, t.column);
  }

  const Token& expect(Token::Kind k, const std::string& what) {
    if (peek().kind != k) fail(peek(), "expected " + what);
    return next();
  }

  std::string name_token(const std::string& what) {
    const Token& t = expect(Token::ident, what);
    if (is_keyword(t.text)) fail(t, "keyword used as " + what);
    return t.text;
  }

  void parse_sorts() {
    while (!at_section_end()) spec_.signature.declare_sort(name_token("sort name"));
  }

  void parse_ops() {
    while (!at_section_end()) {
      const Token nt = peek();
      const std::string name = name_token("symbol name");
      if (vars_.contains(name)) fail(nt, "symbol clashes with a variable");
      expect(Token::colon, "':' after symbol name");
      const Token& at = expect(Token::ident, "arity");
      std::size_t arity = 0;
      auto [p, ec] = std::from_chars(at.text.data(), at.text.data() + at.text.size(), arity);
      if (ec != std::errc{} || p != at.text.data() + at.text.size()) fail(at, "expected arity");
      Symbol s{name, arity, std::nullopt};
      if (peek().kind == Token::colon) {
        next();
        Profile prof;
        std::vector<std::string> sorts;
        while (peek().kind == Token::ident && !is_keyword(peek().text) &&
               peek(1).kind != Token::colon)
          sorts.push_back(next().text);
        if (peek().kind == Token::arrow) {
          next();
          prof.arguments = std::move(sorts);
          prof.result = name_token("result sort");
        } else if (sorts.size() == 1 && arity == 0) {
          prof.result = sorts.front();
        } else {
          fail(peek(), "expected '->' in profile of '" + name + "'");
        }
        s.profile = std::move(prof);
      }
      try {
        spec_.signature.add(std::move(s));
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        fail(nt, e.what());
      }
    }
  }

  void parse_vars() {
    while (!at_section_end()) {
      const Token t = peek();
      std::string v = name_token("variable name");
      if (spec_.signature.contains(v)) fail(t, "variable clashes with a symbol");
      if (vars_.insert(v).second) spec_.variables.push_back(v);
    }
  }

  Term term(const std::map<std::string, State>* states) {
    const Token t = peek();
    std::string name = name_token("term");
    if (peek().kind == Token::lparen) {
      next();
      std::vector<Term> args;
      if (peek().kind != Token::rparen) {
        args.push_back(term(states));
        while (peek().kind == Token::comma) {
          next();
          args.push_back(term(states));
        }
      }
      expect(Token::rparen, "')' or ','");
      check_symbol(t, name, args.size());
      return Term::app(std::move(name), std::move(args));
    }
    if (states) {
      if (auto it = states->find(name); it != states->end()) return Term::of_state(it->second);
    } else if (vars_.contains(name)) {
      return Term::variable(std::move(name));
    }
    check_symbol(t, name, 0);
    return constant(std::move(name));
  }

  void check_symbol(const Token& t, const std::string& name, std::size_t n) const {
    const Symbol* s = spec_.signature.find(name);
    if (!s) fail(t, "undeclared symbol or state");
    if (s->arity != n) {
      fail(t, "arity mismatch: '" + name + "' has arity " + std::to_string(s->arity) + ", given " +
                  std::to_string(n) + " arguments");
    }
  }

  std::string section_name(const std::string& section) {
    const Token t = peek();
    std::string name = name_token(section + " name");
    if (spec_.find_trs(name) || spec_.find_automaton(name) || spec_.find_equations(name))
      fail(t, "duplicate section name");
    return name;
  }

  void parse_trs() {
    std::string name = section_name("TRS");
    std::vector<Rule> rules;
    while (!at_section_end()) {
      const Token t = peek();
      Term l = term(nullptr);
      expect(Token::arrow, "'->' in rule");
      Term r = term(nullptr);
      try {
        validate_rule(Rule{l, r});
      } catch (const Error& e) {
        fail(t, e.what());
      }
      rules.push_back(Rule{std::move(l), std::move(r)});
    }
    spec_.trs.push_back({std::move(name), Trs(spec_.signature, std::move(rules))});
  }

  void parse_equations() {
    std::string name = section_name("Equations");
    const Token& kw = expect(Token::ident, "'Rules'");
    if (kw.text != "Rules") fail(kw, "expected 'Rules'");
    EquationSet eqs;
    while (!at_section_end()) {
      const Token t = peek();
      Term l = term(nullptr);
      expect(Token::equals, "'=' in equation");
      Term r = term(nullptr);
      eqs.add(Equation{std::move(l), std::move(r), EquationRole::user});
    }
    spec_.equations.push_back({std::move(name), std::move(eqs)});
  }

  void keyword(const std::string& k) {
    const Token& t = expect(Token::ident, "'" + k + "'");
    if (t.text != k) fail(t, "expected '" + k + "'");
  }

  static std::optional<std::uint32_t> numbered(const std::string& s) {
    if (s.size() < 2 || s[0] != 'q') return std::nullopt;
    std::uint32_t v = 0;
    auto [p, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    if (s.size() > 2 && s[1] == '0') return std::nullopt;
    return v;
  }

  void parse_automaton() {
    std::string name = section_name("Automaton");
    keyword("States");
    std::vector<std::pair<Token, std::string>> declared;
    while (!at_section_end()) {
      const Token t = peek();
      declared.emplace_back(t, name_token("state name"));
    }
    // q<digits> keeps its number when free; other names are numbered after
    std::map<std::string, State> states;
    std::set<std::uint32_t> used;
    for (const auto& [t, s] : declared) {
      if (states.contains(s)) fail(t, "duplicate state");
      if (spec_.signature.contains(s)) fail(t, "state name clashes with a symbol");
      if (auto n = numbered(s); n && !used.contains(*n)) {
        states.emplace(s, State{*n});
        used.insert(*n);
      } else {
        states.emplace(s, State{0xffffffffu});
      }
    }
    std::uint32_t fresh = used.empty() ? 0 : *used.rbegin() + 1;
    TreeAutomaton a(spec_.signature);
    for (const auto& [t, s] : declared) {
      State& q = states[s];
      if (q.id == 0xffffffffu) q = State{fresh++};
      a.add_state(q);
      if (s != default_state_label(q)) a.set_state_name(q, s);
    }
    auto state_ref = [&](const std::string& what) {
      const Token t = peek();
      std::string s = name_token(what);
      auto it = states.find(s);
      if (it == states.end()) fail(t, "undeclared state");
      return it->second;
    };
    keyword("Final");
    keyword("States");
    while (!at_section_end()) a.add_final(state_ref("final state"));
    keyword("Transitions");
    while (!at_section_end()) {
      const Token t = peek();
      if (t.kind == Token::ident && states.contains(t.text) && peek(1).kind == Token::arrow) {
        State from = state_ref("state");
        next();
        a.add_epsilon(from, state_ref("target state"));
        continue;
      }
      Term lhs = term(&states);
      expect(Token::arrow, "'->' in transition");
      State target = state_ref("target state");
      if (!lhs.is_application()) fail(t, "transition lhs must be a configuration");
      std::vector<State> args;
      for (const Term& c : lhs.args()) {
        if (!c.is_state()) fail(t, "transitions must be normalized: arguments must be states");
        args.push_back(c.state());
      }
      a.add_transition(lhs.name(), std::move(args), target);
    }
    spec_.automata.push_back({std::move(name), std::move(a)});
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  bool seen_ops_ = false;
  std::set<std::string> vars_;
  SpecFile spec_;
};

}  // namespace detail

/// Parses a specification. Throws ParseError with the offending location.
inline SpecFile parse_spec(std::string_view text) { return detail::Parser(text).parse(); }

/// Reads and parses a file; parse errors are prefixed with the path.
inline SpecFile read_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_spec(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(e.message(), e.line(), e.column(), path);
  }
}

/// Parses one term against the signature and variables of `context`.
inline Term parse_term(const SpecFile& context, std::string_view text) {
  detail::Parser p(text);
  p.use_context(context);
  return p.parse_single_term();
}

/// Renaming to q0, q1, ... in a fixed traversal: rounds of transitions whose
/// arguments are already named, ordered by symbol and argument names, then
/// epsilon successors; unreachable states last. Depends only on structure,
/// with old ids as the final tie-break, so printing is idempotent.
inline std::map<State, State> canonical_state_order(const TreeAutomaton& a) {
  std::map<State, State> rename;
  std::uint32_t next = 0;
  auto name = [&](State q) {
    if (rename.emplace(q, State{next}).second) ++next;
  };
  bool progress = true;
  while (progress) {
    progress = false;
    using Key = std::tuple<std::string, std::vector<std::uint32_t>, std::uint32_t>;
    std::vector<Key> ready;
    for (const auto& [cfg, targets] : a.delta()) {
      std::vector<std::uint32_t> args;
      bool ok = true;
      for (State q : cfg.args) {
        auto it = rename.find(q);
        if (it == rename.end()) {
          ok = false;
          break;
        }
        args.push_back(it->second.id);
      }
      if (!ok) continue;
      for (State t : targets)
        if (!rename.contains(t)) ready.emplace_back(cfg.symbol, args, t.id);
    }
    std::sort(ready.begin(), ready.end());
    for (const auto& k : ready) name(State{std::get<2>(k)});
    std::vector<std::pair<std::uint32_t, std::uint32_t>> eps;
    for (const Epsilon& e : a.epsilons()) {
      auto it = rename.find(e.from);
      if (it != rename.end() && !rename.contains(e.to)) eps.emplace_back(it->second.id, e.to.id);
    }
    std::sort(eps.begin(), eps.end());
    for (const auto& [f, t] : eps) name(State{t});
    progress = !ready.empty() || !eps.empty();
  }
  for (State q : a.states()) name(q);
  return rename;
}

/// Automaton block in the file grammar with canonical state names.
inline std::string print_automaton(const TreeAutomaton& a, const std::string& name = "A") {
  const auto rename = canonical_state_order(a);
  std::ostringstream os;
  os << "Automaton " << name << "\nStates";
  std::vector<State> ordered;
  for (const auto& [old, q] : rename) ordered.push_back(q);
  std::sort(ordered.begin(), ordered.end());
  for (State q : ordered) os << ' ' << default_state_label(q);
  os << "\nFinal States";
  std::vector<State> finals;
  for (State q : a.finals()) finals.push_back(rename.at(q));
  std::sort(finals.begin(), finals.end());
  for (State q : finals) os << ' ' << default_state_label(q);
  os << "\nTransitions\n";
  using Row = std::tuple<std::uint32_t, std::string, std::vector<std::uint32_t>>;
  std::vector<Row> rows;
  for (const auto& [cfg, targets] : a.delta()) {
    std::vector<std::uint32_t> args;
    for (State q : cfg.args) args.push_back(rename.at(q).id);
    for (State t : targets) rows.emplace_back(rename.at(t).id, cfg.symbol, args);
  }
  std::sort(rows.begin(), rows.end());
  for (const auto& [t, sym, args] : rows) {
    os << sym;
    if (!args.empty()) {
      os << '(';
      for (std::size_t i = 0; i < args.size(); ++i)
        os << (i ? "," : "") << default_state_label(State{args[i]});
      os << ')';
    }
    os << "->" << default_state_label(State{t}) << "\n";
  }
  std::vector<std::pair<State, State>> eps;
  for (const Epsilon& e : a.epsilons()) eps.emplace_back(rename.at(e.from), rename.at(e.to));
  std::sort(eps.begin(), eps.end());
  for (const auto& [f, t] : eps) os << default_state_label(f) << "->" << default_state_label(t) << "\n";
  return os.str();
}

/// Sorts and Ops blocks.
inline std::string print_ops(const Signature& sig) {
  std::ostringstream os;
  if (!sig.sorts().empty()) {
    os << "Sorts";
    for (const auto& s : sig.sorts()) os << ' ' << s;
    os << "\n";
  }
  os << "Ops\n";
  for (const Symbol& s : sig.symbols()) {
    os << "  " << s.name << ':' << s.arity;
    if (s.profile) {
      os << " :";
      for (const auto& a : s.profile->arguments) os << ' ' << a;
      if (!s.profile->arguments.empty()) os << " ->";
      os << ' ' << s.profile->result;
    }
    os << "\n";
  }
  return os.str();
}

/// Whole specification, in section order Sorts, Ops, Vars, TRS, Automaton,
/// Equations.
inline std::string print_spec(const SpecFile& spec) {
  std::ostringstream os;
  os << print_ops(spec.signature);
  if (!spec.variables.empty()) {
    os << "Vars";
    for (const auto& v : spec.variables) os << ' ' << v;
    os << "\n";
  }
  for (const auto& [name, trs] : spec.trs) {
    os << "TRS " << name << "\n";
    for (const Rule& r : trs.rules()) os << "  " << to_string(r) << "\n";
  }
  for (const auto& [name, a] : spec.automata) os << print_automaton(a, name);
  for (const auto& [name, eqs] : spec.equations) {
    os << "Equations " << name << "\nRules\n";
    for (const Equation& e : eqs) os << "  " << to_string(e) << "\n";
  }
  return os.str();
}

}  // namespace tac
