#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "instr.hpp"

namespace fcgrow {

enum class LareKind : std::uint8_t { Atom, Check, Eps, Cat, Alt, Star, Bracket };

struct LareNode;
using Lare = std::shared_ptr<const LareNode>;

struct LareNode {
  LareKind kind = LareKind::Eps;
  Instr instr;        // Atom only
  VarIdx bound = 0;   // Bracket only
  Lare left, right;   // Cat/Alt use both; Star/Bracket use left
  std::size_t size = 1;  // tree size, saturating
};

namespace lare {

namespace detail {
inline std::size_t add_sizes(std::size_t a, std::size_t b) {
  auto m = std::numeric_limits<std::size_t>::max();
  return a > m - b - 1 ? m : a + b + 1;
}
inline Lare make(LareKind k, Instr i, VarIdx b, Lare l, Lare r) {
  auto n = std::make_shared<LareNode>();
  n->kind = k;
  n->instr = i;
  n->bound = b;
  std::size_t ls = l ? l->size : 0, rs = r ? r->size : 0;
  n->size = add_sizes(ls, rs);
  n->left = std::move(l);
  n->right = std::move(r);
  return n;
}
}  // namespace detail

inline Lare check() { return detail::make(LareKind::Check, Instr::check(), 0, nullptr, nullptr); }
inline Lare eps() { return detail::make(LareKind::Eps, {}, 0, nullptr, nullptr); }
inline Lare atom(Instr i) {
  if (i.is_check()) return check();
  return detail::make(LareKind::Atom, i, 0, nullptr, nullptr);
}
inline Lare cat(Lare a, Lare b) { return detail::make(LareKind::Cat, {}, 0, std::move(a), std::move(b)); }
inline Lare alt(Lare a, Lare b) { return detail::make(LareKind::Alt, {}, 0, std::move(a), std::move(b)); }
inline Lare star(Lare a) { return detail::make(LareKind::Star, {}, 0, std::move(a), nullptr); }
inline Lare bracket(VarIdx l, Lare a) {
  return detail::make(LareKind::Bracket, {}, l, std::move(a), nullptr);
}

// Left-associated folds of a non-empty list.
inline Lare cat_all(const std::vector<Lare>& xs) {
  if (xs.empty()) return eps();
  Lare r = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) r = cat(r, xs[i]);
  return r;
}
inline Lare alt_all(const std::vector<Lare>& xs) {
  if (xs.empty()) throw std::invalid_argument("empty alternation");
  Lare r = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) r = alt(r, xs[i]);
  return r;
}

}  // namespace lare

inline bool lare_equal(const Lare& a, const Lare& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case LareKind::Atom: return a->instr == b->instr;
    case LareKind::Check:
    case LareKind::Eps: return true;
    case LareKind::Bracket:
      return a->bound == b->bound && lare_equal(a->left, b->left);
    case LareKind::Star: return lare_equal(a->left, b->left);
    default: return lare_equal(a->left, b->left) && lare_equal(a->right, b->right);
  }
}

inline void lare_collect_assigned(const Lare& e, std::set<VarIdx>& out) {
  switch (e->kind) {
    case LareKind::Atom:
      if (auto t = e->instr.target()) out.insert(*t);
      return;
    case LareKind::Check:
    case LareKind::Eps: return;
    case LareKind::Star:
    case LareKind::Bracket: lare_collect_assigned(e->left, out); return;
    default:
      lare_collect_assigned(e->left, out);
      lare_collect_assigned(e->right, out);
  }
}

inline std::set<VarIdx> assigned_vars(const Lare& e) {
  std::set<VarIdx> out;
  lare_collect_assigned(e, out);
  return out;
}

// Largest variable index mentioned, including bracket bounds.
inline VarIdx lare_max_var(const Lare& e) {
  switch (e->kind) {
    case LareKind::Atom: return e->instr.max_var();
    case LareKind::Check:
    case LareKind::Eps: return 0;
    case LareKind::Star: return lare_max_var(e->left);
    case LareKind::Bracket: return std::max(e->bound, lare_max_var(e->left));
    default: return std::max(lare_max_var(e->left), lare_max_var(e->right));
  }
}

inline bool lare_has_huge(const Lare& e) {
  switch (e->kind) {
    case LareKind::Atom: return e->instr.op == Op::Huge;
    case LareKind::Check:
    case LareKind::Eps: return false;
    case LareKind::Star:
    case LareKind::Bracket: return lare_has_huge(e->left);
    default: return lare_has_huge(e->left) || lare_has_huge(e->right);
  }
}

// True iff e generates some string with no top-level check; checks inside a
// nested bracket are erased by that bracket and so do not count.
inline bool can_skip_check(const Lare& e) {
  switch (e->kind) {
    case LareKind::Atom: return true;
    case LareKind::Check: return false;
    case LareKind::Eps: return true;
    case LareKind::Alt: return can_skip_check(e->left) || can_skip_check(e->right);
    case LareKind::Cat: return can_skip_check(e->left) && can_skip_check(e->right);
    case LareKind::Star: return true;
    case LareKind::Bracket: return true;
  }
  return true;
}

// Canonical printer. parse_lare(print_lare(e)) rebuilds e exactly.
namespace detail {
inline void print_lare_into(const Lare& e, int ctx, std::string& out) {
  // precedence: 0 alternation, 1 concatenation, 2 postfix star, 3 primary
  int prec = 3;
  switch (e->kind) {
    case LareKind::Alt: prec = 0; break;
    case LareKind::Cat: prec = 1; break;
    case LareKind::Star: prec = 2; break;
    default: break;
  }
  bool paren = prec < ctx;
  if (paren) out += '(';
  switch (e->kind) {
    case LareKind::Atom: out += to_string(e->instr); break;
    case LareKind::Check: out += '#'; break;
    case LareKind::Eps: out += "eps"; break;
    case LareKind::Alt:
      print_lare_into(e->left, 0, out);
      out += " | ";
      print_lare_into(e->right, 1, out);
      break;
    case LareKind::Cat:
      print_lare_into(e->left, 1, out);
      out += ' ';
      print_lare_into(e->right, 2, out);
      break;
    case LareKind::Star:
      // Atoms are parenthesised too, so `x1:=x2*` never reads as a product.
      if (e->left->kind == LareKind::Check || e->left->kind == LareKind::Eps ||
          e->left->kind == LareKind::Bracket) {
        print_lare_into(e->left, 3, out);
      } else {
        out += '(';
        print_lare_into(e->left, 0, out);
        out += ')';
      }
      out += '*';
      break;
    case LareKind::Bracket:
      out += "[x" + std::to_string(e->bound) + ' ';
      print_lare_into(e->left, 0, out);
      out += ']';
      break;
  }
  if (paren) out += ')';
}
}  // namespace detail

inline std::string print_lare(const Lare& e) {
  std::string out;
  detail::print_lare_into(e, 0, out);
  return out;
}

enum class WfKind { StarOutsideBracket, StarBodyCheckFree, BracketBoundAssigned };

inline const char* to_string(WfKind k) {
  switch (k) {
    case WfKind::StarOutsideBracket: return "StarOutsideBracket";
    case WfKind::StarBodyCheckFree: return "StarBodyCheckFree";
    case WfKind::BracketBoundAssigned: return "BracketBoundAssigned";
  }
  return "?";
}

struct WfViolation {
  WfKind kind;
  std::string where;  // the offending subexpression, printed

  auto operator<=>(const WfViolation&) const = default;
};

namespace detail {
inline void wf_walk(const Lare& e, int n, bool in_bracket, std::vector<WfViolation>& out) {
  switch (e->kind) {
    case LareKind::Atom: check_operands(e->instr, n); return;
    case LareKind::Check:
    case LareKind::Eps: return;
    case LareKind::Cat:
    case LareKind::Alt:
      wf_walk(e->left, n, in_bracket, out);
      wf_walk(e->right, n, in_bracket, out);
      return;
    case LareKind::Star:
      if (!in_bracket) out.push_back({WfKind::StarOutsideBracket, print_lare(e)});
      if (can_skip_check(e->left)) out.push_back({WfKind::StarBodyCheckFree, print_lare(e)});
      wf_walk(e->left, n, in_bracket, out);
      return;
    case LareKind::Bracket:
      if (e->bound < 1 || e->bound > n)
        throw std::out_of_range("bracket variable x" + std::to_string(e->bound) +
                                " outside 1.." + std::to_string(n));
      if (assigned_vars(e->left).count(e->bound))
        out.push_back({WfKind::BracketBoundAssigned, print_lare(e)});
      wf_walk(e->left, n, true, out);
      return;
  }
}
}  // namespace detail

inline std::vector<WfViolation> wf_check(const Lare& e, int n) {
  std::vector<WfViolation> out;
  detail::wf_walk(e, n, false, out);
  return out;
}

class IllFormedLare : public std::runtime_error {
 public:
  explicit IllFormedLare(std::vector<WfViolation> v)
      : std::runtime_error(describe(v)), violations(std::move(v)) {}
  std::vector<WfViolation> violations;

 private:
  static std::string describe(const std::vector<WfViolation>& v) {
    std::string s = "ill-formed expression:";
    for (auto& x : v) s += std::string(" [") + to_string(x.kind) + "] " + x.where + ";";
    return s;
  }
};

inline void require_wf(const Lare& e, int n) {
  auto v = wf_check(e, n);
  if (!v.empty()) throw IllFormedLare(std::move(v));
}

// ---------------------------------------------------------------------------
// Structured loop language.

enum class CmdKind : std::uint8_t { Skip, Assign, Seq, Loop, Choose };

struct CmdNode;
using Cmd = std::shared_ptr<const CmdNode>;

struct CmdNode {
  CmdKind kind = CmdKind::Skip;
  Instr instr;       // Assign
  VarIdx bound = 0;  // Loop
  Cmd first, second; // Seq/Choose use both; Loop uses first
};

namespace cmd {
inline Cmd make(CmdKind k, Instr i, VarIdx b, Cmd x, Cmd y) {
  auto n = std::make_shared<CmdNode>();
  n->kind = k;
  n->instr = i;
  n->bound = b;
  n->first = std::move(x);
  n->second = std::move(y);
  return n;
}
inline Cmd skip() { return make(CmdKind::Skip, {}, 0, nullptr, nullptr); }
inline Cmd assign(Instr i) {
  if (!i.target()) throw std::invalid_argument("assignment expected");
  return make(CmdKind::Assign, i, 0, nullptr, nullptr);
}
inline Cmd seq(Cmd a, Cmd b) { return make(CmdKind::Seq, {}, 0, std::move(a), std::move(b)); }
inline Cmd loop(VarIdx l, Cmd body) { return make(CmdKind::Loop, {}, l, std::move(body), nullptr); }
inline Cmd choose(Cmd a, Cmd b) { return make(CmdKind::Choose, {}, 0, std::move(a), std::move(b)); }
}  // namespace cmd

inline bool cmd_equal(const Cmd& a, const Cmd& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case CmdKind::Skip: return true;
    case CmdKind::Assign: return a->instr == b->instr;
    case CmdKind::Loop: return a->bound == b->bound && cmd_equal(a->first, b->first);
    default: return cmd_equal(a->first, b->first) && cmd_equal(a->second, b->second);
  }
}

inline VarIdx cmd_max_var(const Cmd& c) {
  switch (c->kind) {
    case CmdKind::Skip: return 0;
    case CmdKind::Assign: return c->instr.max_var();
    case CmdKind::Loop: return std::max(c->bound, cmd_max_var(c->first));
    default: return std::max(cmd_max_var(c->first), cmd_max_var(c->second));
  }
}

inline Lare embed_structured(const Cmd& c) {
  switch (c->kind) {
    case CmdKind::Skip: return lare::atom(Instr::skip());
    case CmdKind::Assign: return lare::atom(c->instr);
    case CmdKind::Seq: return lare::cat(embed_structured(c->first), embed_structured(c->second));
    case CmdKind::Choose:
      return lare::alt(embed_structured(c->first), embed_structured(c->second));
    case CmdKind::Loop:
      return lare::bracket(c->bound,
                           lare::star(lare::cat(lare::check(), embed_structured(c->first))));
  }
  throw std::logic_error("bad command");
}

namespace detail {
inline std::string instr_loop_syntax(const Instr& i) {
  std::string s = to_string(i);
  auto p = s.find(":=");
  if (p != std::string::npos) return s.substr(0, p) + " := " + s.substr(p + 2);
  p = s.find("<=");
  if (p != std::string::npos) return s.substr(0, p) + " <= " + s.substr(p + 2);
  return s;
}
inline void print_cmd_into(const Cmd& c, bool braced_seq, std::string& out) {
  switch (c->kind) {
    case CmdKind::Skip: out += "skip"; return;
    case CmdKind::Assign: out += instr_loop_syntax(c->instr); return;
    case CmdKind::Seq:
      if (braced_seq) out += "{ ";
      print_cmd_into(c->first, false, out);
      out += "; ";
      print_cmd_into(c->second, true, out);
      if (braced_seq) out += " }";
      return;
    case CmdKind::Loop:
      out += "loop x" + std::to_string(c->bound) + " { ";
      print_cmd_into(c->first, false, out);
      out += " }";
      return;
    case CmdKind::Choose:
      out += "choose { ";
      print_cmd_into(c->first, false, out);
      out += " } or { ";
      print_cmd_into(c->second, false, out);
      out += " }";
      return;
  }
}
}  // namespace detail

inline std::string print_cmd(const Cmd& c) {
  std::string out;
  detail::print_cmd_into(c, false, out);
  return out;
}

}  // namespace fcgrow
