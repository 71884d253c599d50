#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fc_model.hpp"
#include "lare.hpp"

namespace fcgrow {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + msg),
        line(line),
        column(column),
        detail(msg) {}
  int line;
  int column;
  std::string detail;
};

namespace detail {

enum class Tok {
  Var,
  Int,
  Word,
  Assign,  // :=
  Weak,    // <=
  Plus,
  Star,
  Bar,
  Hash,
  LParen,
  RParen,
  LBrack,
  RBrack,
  LBrace,
  RBrace,
  Semi,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

inline std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + t.text + "'";
}

// Shared lexer for the expression and loop languages. `hash_comments`
// selects whether '#' starts a comment (loop language) or is a token.
inline std::vector<Token> lex(const std::string& src, bool hash_comments) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t k) {
    for (std::size_t m = 0; m < k; ++m, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' && hash_comments) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    int l = line, cl = col;
    auto single = [&](Tok k) {
      out.push_back({k, std::string(1, c), l, cl});
      advance(1);
    };
    if (c == ':' && i + 1 < src.size() && src[i + 1] == '=') {
      out.push_back({Tok::Assign, ":=", l, cl});
      advance(2);
    } else if (c == '<' && i + 1 < src.size() && src[i + 1] == '=') {
      out.push_back({Tok::Weak, "<=", l, cl});
      advance(2);
    } else if (c == '+') {
      single(Tok::Plus);
    } else if (c == '*') {
      single(Tok::Star);
    } else if (c == '|') {
      single(Tok::Bar);
    } else if (c == '#') {
      single(Tok::Hash);
    } else if (c == '(') {
      single(Tok::LParen);
    } else if (c == ')') {
      single(Tok::RParen);
    } else if (c == '[') {
      single(Tok::LBrack);
    } else if (c == ']') {
      single(Tok::RBrack);
    } else if (c == '{') {
      single(Tok::LBrace);
    } else if (c == '}') {
      single(Tok::RBrace);
    } else if (c == ';') {
      single(Tok::Semi);
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      std::string w = src.substr(i, j - i);
      Tok k = Tok::Word;
      bool digits_after_x = w.size() > 1 && (w[0] == 'x' || w[0] == 'X');
      for (std::size_t m = 1; digits_after_x && m < w.size(); ++m)
        if (!std::isdigit(static_cast<unsigned char>(w[m]))) digits_after_x = false;
      bool all_digits = true;
      for (char ch : w)
        if (!std::isdigit(static_cast<unsigned char>(ch))) all_digits = false;
      if (digits_after_x)
        k = Tok::Var;
      else if (all_digits)
        k = Tok::Int;
      out.push_back({k, w, l, cl});
      advance(j - i);
    } else {
      throw ParseError(l, cl, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

inline int to_index(const Token& t) {
  std::string digits = t.kind == Tok::Var ? t.text.substr(1) : t.text;
  if (digits.size() > 6) throw ParseError(t.line, t.col, "index too large");
  int v = std::stoi(digits);
  if (v < 1) throw ParseError(t.line, t.col, "variable indices start at 1");
  return v;
}

class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(Tok k, std::size_t ahead = 0) const { return peek(ahead).kind == k; }
  bool at_word(const char* w) const { return peek().kind == Tok::Word && peek().text == w; }
  Token take() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  Token expect(Tok k, const char* what) {
    if (!at(k)) fail(what);
    return take();
  }
  void expect_word(const char* w) {
    if (!at_word(w)) fail((std::string("'") + w + "'").c_str());
    take();
  }
  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    throw ParseError(t.line, t.col, "expected " + expected + ", found " + describe(t));
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// RHS of an assignment, shared by both languages. `star_lookahead` enables the
// rule that `*` only means multiplication when the next variable does not
// start another assignment.
inline Instr parse_rhs(TokenStream& ts, VarIdx r, bool weak, bool star_lookahead) {
  if (ts.at(Tok::Star) && ts.at(Tok::Star, 1)) {
    if (weak) ts.fail("a variable (weak assignment of ** is not allowed)");
    ts.take();
    ts.take();
    return Instr::huge(r);
  }
  VarIdx s = to_index(ts.expect(Tok::Var, "a variable"));
  if (ts.at(Tok::Plus)) {
    ts.take();
    VarIdx t = to_index(ts.expect(Tok::Var, "a variable after '+'"));
    return weak ? Instr::wadd(r, s, t) : Instr::add(r, s, t);
  }
  if (ts.at(Tok::Star) && ts.at(Tok::Var, 1)) {
    bool product = !star_lookahead || !(ts.at(Tok::Assign, 2) || ts.at(Tok::Weak, 2));
    if (product) {
      ts.take();
      VarIdx t = to_index(ts.take());
      return weak ? Instr::wmul(r, s, t) : Instr::mul(r, s, t);
    }
  }
  return weak ? Instr::wcopy(r, s) : Instr::copy(r, s);
}

class LareParser {
 public:
  explicit LareParser(const std::string& src) : ts_(lex(src, false)) {}

  Lare parse() {
    Lare e = alt();
    if (!ts_.at(Tok::End)) ts_.fail("an expression, '|' or end of input");
    return e;
  }

  std::pair<Lare, std::optional<int>> parse_program() {
    std::optional<int> vars;
    if (ts_.at_word("vars")) {
      ts_.take();
      vars = std::stoi(ts_.expect(Tok::Int, "a variable count").text);
    }
    return {parse(), vars};
  }

 private:
  bool starts_primary() const {
    switch (ts_.peek().kind) {
      case Tok::LParen:
      case Tok::LBrack:
      case Tok::Var:
      case Tok::Hash: return true;
      case Tok::Word: return ts_.at_word("skip") || ts_.at_word("eps");
      default: return false;
    }
  }
  Lare alt() {
    Lare e = cat();
    while (ts_.at(Tok::Bar)) {
      ts_.take();
      e = lare::alt(e, cat());
    }
    return e;
  }
  Lare cat() {
    if (!starts_primary()) ts_.fail("an expression");
    Lare e = postfix();
    while (starts_primary()) e = lare::cat(e, postfix());
    return e;
  }
  Lare postfix() {
    Lare e = primary();
    while (ts_.at(Tok::Star)) {
      ts_.take();
      e = lare::star(e);
    }
    return e;
  }
  Lare primary() {
    if (ts_.at(Tok::LParen)) {
      ts_.take();
      Lare e = alt();
      ts_.expect(Tok::RParen, "')'");
      return e;
    }
    if (ts_.at(Tok::LBrack)) {
      ts_.take();
      VarIdx l = to_index(ts_.expect(Tok::Var, "a bracket variable"));
      Lare e = alt();
      ts_.expect(Tok::RBrack, "']'");
      return lare::bracket(l, e);
    }
    if (ts_.at(Tok::Hash)) {
      ts_.take();
      return lare::check();
    }
    if (ts_.at_word("skip")) {
      ts_.take();
      return lare::atom(Instr::skip());
    }
    if (ts_.at_word("eps")) {
      ts_.take();
      return lare::eps();
    }
    VarIdx r = to_index(ts_.expect(Tok::Var, "an expression"));
    bool weak = ts_.at(Tok::Weak);
    if (!weak && !ts_.at(Tok::Assign)) ts_.fail("':=' or '<='");
    ts_.take();
    return lare::atom(parse_rhs(ts_, r, weak, true));
  }

  TokenStream ts_;
};

class LoopParser {
 public:
  explicit LoopParser(const std::string& src) : ts_(lex(src, true)) {}

  std::pair<Cmd, std::optional<int>> parse() {
    std::optional<int> vars;
    if (ts_.at_word("vars")) {
      ts_.take();
      Token t = ts_.expect(Tok::Int, "a variable count");
      vars = std::stoi(t.text);
    }
    Cmd c = seq();
    if (!ts_.at(Tok::End)) ts_.fail("';' or end of input");
    return {c, vars};
  }

 private:
  Cmd seq() {
    Cmd c = simple();
    while (ts_.at(Tok::Semi)) {
      ts_.take();
      c = cmd::seq(c, simple());
    }
    return c;
  }
  Cmd simple() {
    if (ts_.at_word("skip")) {
      ts_.take();
      return cmd::skip();
    }
    if (ts_.at_word("loop")) {
      ts_.take();
      VarIdx l = to_index(ts_.expect(Tok::Var, "a loop variable"));
      ts_.expect(Tok::LBrace, "'{'");
      Cmd body = seq();
      ts_.expect(Tok::RBrace, "'}'");
      return cmd::loop(l, body);
    }
    if (ts_.at_word("choose")) {
      ts_.take();
      Cmd a = simple();
      ts_.expect_word("or");
      Cmd b = simple();
      return cmd::choose(a, b);
    }
    if (ts_.at(Tok::LBrace)) {
      ts_.take();
      Cmd c = seq();
      ts_.expect(Tok::RBrace, "'}'");
      return c;
    }
    VarIdx r = to_index(ts_.expect(Tok::Var, "a command"));
    bool weak = ts_.at(Tok::Weak);
    if (!weak && !ts_.at(Tok::Assign)) ts_.fail("':=' or '<='");
    ts_.take();
    return cmd::assign(parse_rhs(ts_, r, weak, false));
  }

  TokenStream ts_;
};

}  // namespace detail

inline Lare parse_lare(const std::string& text) { return detail::LareParser(text).parse(); }

inline Cmd parse_loop(const std::string& text) { return detail::LoopParser(text).parse().first; }

struct LareProgram {
  Lare expr;
  int n = 0;
};

// An expression optionally preceded by `vars N`.
inline LareProgram parse_lare_program(const std::string& text) {
  auto [e, vars] = detail::LareParser(text).parse_program();
  int used = lare_max_var(e);
  if (vars && *vars < used)
    throw ParseError(1, 1, "expression uses x" + std::to_string(used) + " but declares vars " +
                               std::to_string(*vars));
  return {e, vars ? *vars : std::max(used, 1)};
}

struct LoopProgram {
  Cmd cmd;
  int n = 0;
};

inline LoopProgram parse_loop_program(const std::string& text) {
  auto [c, vars] = detail::LoopParser(text).parse();
  int used = cmd_max_var(c);
  if (vars && *vars < used)
    throw ParseError(1, 1, "program uses x" + std::to_string(used) + " but declares vars " +
                               std::to_string(*vars));
  return {c, vars ? *vars : std::max(used, 1)};
}

// ---------------------------------------------------------------------------
// Flowchart language: one declaration per line, '#' comments.

namespace detail {

struct Word {
  std::string text;
  int col;
};

inline std::vector<Word> split_words(const std::string& line) {
  std::vector<Word> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '#') break;
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) && line[j] != '#')
      ++j;
    out.push_back({line.substr(i, j - i), static_cast<int>(i) + 1});
    i = j;
  }
  return out;
}

inline bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '.'))
      return false;
  return true;
}

}  // namespace detail

inline FlowchartProgram parse_fc(const std::string& text) {
  using detail::Word;
  struct PendingLoop {
    std::string id;
    Word parent;
    VarIdx bound;
    std::vector<Word> cut, arcs;
    int line;
  };
  FlowchartProgram p;
  std::optional<int> vars;
  std::vector<PendingLoop> loops;
  std::vector<std::pair<int, int>> arc_pos;  // (line, col) per arc, for operand errors
  std::set<std::string> arc_ids;
  std::vector<std::string> entries, exits;
  std::vector<std::pair<int, int>> entry_pos, exit_pos;

  std::istringstream in(text);
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    auto w = detail::split_words(line);
    if (w.empty()) continue;
    auto fail = [&](std::size_t k, const std::string& msg) -> void {
      int col = k < w.size() ? w[k].col : static_cast<int>(line.size()) + 1;
      throw ParseError(ln, col, msg);
    };
    auto var_at = [&](std::size_t k) -> VarIdx {
      if (k >= w.size()) fail(k, "expected a variable, found end of line");
      std::string s = w[k].text;
      std::string digits = (s.size() > 1 && (s[0] == 'x' || s[0] == 'X')) ? s.substr(1) : s;
      bool ok = !digits.empty() && digits.size() <= 6;
      for (char c : digits)
        if (!std::isdigit(static_cast<unsigned char>(c))) ok = false;
      if (!ok || std::stoi(digits) < 1) fail(k, "expected a variable, found '" + s + "'");
      return std::stoi(digits);
    };
    auto name_at = [&](std::size_t k, const char* what) -> std::string {
      if (k >= w.size()) fail(k, std::string("expected ") + what + ", found end of line");
      if (!detail::valid_name(w[k].text))
        fail(k, std::string("expected ") + what + ", found '" + w[k].text + "'");
      return w[k].text;
    };
    const std::string& kw = w[0].text;
    if (kw == "vars") {
      if (vars) fail(0, "duplicate vars declaration");
      if (w.size() != 2) fail(w.size() < 2 ? 1 : 2, "expected exactly one variable count");
      bool ok = w[1].text.size() <= 4;
      for (char c : w[1].text)
        if (!std::isdigit(static_cast<unsigned char>(c))) ok = false;
      if (!ok || std::stoi(w[1].text) < 1) fail(1, "expected a positive variable count");
      vars = std::stoi(w[1].text);
    } else if (kw == "entry" || kw == "exit") {
      if (w.size() < 2) fail(1, "expected at least one node name");
      for (std::size_t k = 1; k < w.size(); ++k) {
        auto nm = name_at(k, "a node name");
        (kw == "entry" ? entries : exits).push_back(nm);
        (kw == "entry" ? entry_pos : exit_pos).push_back({ln, w[k].col});
      }
    } else if (kw == "arc") {
      auto id = name_at(1, "an arc id");
      if (!arc_ids.insert(id).second) fail(1, "duplicate arc id '" + id + "'");
      auto src = name_at(2, "a source node");
      auto dst = name_at(3, "a target node");
      if (w.size() < 5) fail(4, "expected an instruction, found end of line");
      const std::string& op = w[4].text;
      std::size_t expect_len = 0;
      Instr ins;
      if (op == "skip") {
        ins = Instr::skip();
        expect_len = 5;
      } else if (op == "check") {
        ins = Instr::check();
        expect_len = 5;
      } else if (op == "huge") {
        ins = Instr::huge(var_at(5));
        expect_len = 6;
      } else if (op == "copy" || op == "wcopy") {
        VarIdx r = var_at(5), s = var_at(6);
        ins = op == "copy" ? Instr::copy(r, s) : Instr::wcopy(r, s);
        expect_len = 7;
      } else if (op == "add" || op == "wadd" || op == "mul" || op == "wmul") {
        VarIdx r = var_at(5), s = var_at(6), t = var_at(7);
        if (op == "add") ins = Instr::add(r, s, t);
        if (op == "wadd") ins = Instr::wadd(r, s, t);
        if (op == "mul") ins = Instr::mul(r, s, t);
        if (op == "wmul") ins = Instr::wmul(r, s, t);
        expect_len = 8;
      } else {
        fail(4, "expected an instruction (skip, copy, add, mul, huge, wcopy, wadd, wmul, check), found '" +
                    op + "'");
      }
      if (w.size() > expect_len) fail(expect_len, "unexpected '" + w[expect_len].text + "'");
      p.add_arc(id, src, dst, ins);
      arc_pos.push_back({ln, w[4].col});
    } else if (kw == "loop") {
      PendingLoop l;
      l.line = ln;
      l.id = name_at(1, "a loop id");
      if (l.id == "root") fail(1, "'root' cannot be declared");
      for (auto& q : loops)
        if (q.id == l.id) fail(1, "duplicate loop id '" + l.id + "'");
      std::size_t k = 2;
      auto keyword = [&](const char* kwd) {
        if (k >= w.size() || w[k].text != kwd)
          fail(k, std::string("expected '") + kwd + "'" +
                      (k < w.size() ? ", found '" + w[k].text + "'" : ", found end of line"));
        ++k;
      };
      keyword("parent");
      name_at(k, "a parent loop id or 'root'");
      l.parent = w[k++];
      keyword("bound");
      l.bound = var_at(k++);
      keyword("cut");
      while (k < w.size() && w[k].text != "arcs") {
        name_at(k, "an arc id");
        l.cut.push_back(w[k++]);
      }
      keyword("arcs");
      while (k < w.size()) {
        name_at(k, "an arc id");
        l.arcs.push_back(w[k++]);
      }
      loops.push_back(std::move(l));
    } else {
      fail(0, "expected 'vars', 'entry', 'exit', 'arc' or 'loop', found '" + kw + "'");
    }
  }

  if (entries.empty()) throw ParseError(ln + 1, 1, "expected an 'entry' declaration");
  if (exits.empty()) throw ParseError(ln + 1, 1, "expected an 'exit' declaration");
  for (auto& e : entries) p.entries.push_back(p.node(e));
  for (auto& e : exits) p.exits.push_back(p.node(e));
  auto dedupe = [](std::vector<NodeIdx>& v) {
    std::vector<NodeIdx> out;
    for (auto x : v)
      if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
    v = out;
  };
  dedupe(p.entries);
  dedupe(p.exits);

  int used = 0;
  for (auto& a : p.arcs) used = std::max(used, a.instr.max_var());
  for (auto& l : loops) used = std::max(used, l.bound);
  if (vars) {
    for (std::size_t i = 0; i < p.arcs.size(); ++i)
      if (p.arcs[i].instr.max_var() > *vars)
        throw ParseError(arc_pos[i].first, arc_pos[i].second,
                         "operand exceeds declared vars " + std::to_string(*vars));
    for (auto& l : loops)
      if (l.bound > *vars)
        throw ParseError(l.line, 1, "loop bound exceeds declared vars " + std::to_string(*vars));
    p.n = *vars;
  } else {
    p.n = std::max(used, 1);
  }

  for (auto& l : loops) p.loops.push_back({l.id, kRoot, l.bound, {}, {}});
  for (std::size_t i = 0; i < loops.size(); ++i) {
    auto& l = loops[i];
    if (l.parent.text != "root") {
      auto q = p.find_loop(l.parent.text);
      if (!q) throw ParseError(l.line, l.parent.col, "unknown parent loop '" + l.parent.text + "'");
      if (*q == static_cast<LoopIdx>(i))
        throw ParseError(l.line, l.parent.col, "a loop cannot be its own parent");
      p.loops[i].parent = *q;
    }
    auto resolve = [&](const Word& wd) {
      auto a = p.find_arc(wd.text);
      if (!a) throw ParseError(l.line, wd.col, "unknown arc '" + wd.text + "'");
      return *a;
    };
    for (auto& wd : l.cut) p.loops[i].cutset.push_back(resolve(wd));
    for (auto& wd : l.arcs) p.loops[i].arcs.push_back(resolve(wd));
  }
  return p;
}

inline std::string print_fc(const FlowchartProgram& p) {
  std::string out = "vars " + std::to_string(p.n) + "\n";
  out += "entry";
  for (auto v : p.entries) out += " " + p.nodes[v];
  out += "\nexit";
  for (auto v : p.exits) out += " " + p.nodes[v];
  out += "\n";
  for (auto& a : p.arcs)
    out += "arc " + a.id + " " + p.nodes[a.src] + " " + p.nodes[a.dst] + " " +
           to_fc_string(a.instr) + "\n";
  for (auto& l : p.loops) {
    out += "loop " + l.id + " parent " + p.loop_name(l.parent) + " bound x" +
           std::to_string(l.bound) + " cut";
    for (auto a : l.cutset) out += " " + p.arcs[a].id;
    out += " arcs";
    for (auto a : l.arcs) out += " " + p.arcs[a].id;
    out += "\n";
  }
  return out;
}

// Equality by names, independent of internal node numbering.
inline bool fc_equal(const FlowchartProgram& x, const FlowchartProgram& y) {
  if (x.n != y.n || x.arcs.size() != y.arcs.size() || x.loops.size() != y.loops.size())
    return false;
  auto names = [](const FlowchartProgram& p, const std::vector<NodeIdx>& v) {
    std::vector<std::string> out;
    for (auto i : v) out.push_back(p.nodes[i]);
    return out;
  };
  if (names(x, x.entries) != names(y, y.entries) || names(x, x.exits) != names(y, y.exits))
    return false;
  for (std::size_t i = 0; i < x.arcs.size(); ++i) {
    auto &a = x.arcs[i], &b = y.arcs[i];
    if (a.id != b.id || a.instr != b.instr || x.nodes[a.src] != y.nodes[b.src] ||
        x.nodes[a.dst] != y.nodes[b.dst])
      return false;
  }
  auto arc_names = [](const FlowchartProgram& p, const std::vector<ArcIdx>& v) {
    std::vector<std::string> out;
    for (auto i : v) out.push_back(p.arcs[i].id);
    return out;
  };
  for (std::size_t i = 0; i < x.loops.size(); ++i) {
    auto &a = x.loops[i], &b = y.loops[i];
    if (a.id != b.id || a.bound != b.bound || x.loop_name(a.parent) != y.loop_name(b.parent) ||
        arc_names(x, a.arcs) != arc_names(y, b.arcs) ||
        arc_names(x, a.cutset) != arc_names(y, b.cutset))
      return false;
  }
  return true;
}

}  // namespace fcgrow
