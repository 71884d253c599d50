#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace fcgrow {

// 1-based program variable index. Index n+1 is reserved inside the analyzer
// for the iteration counter and never appears in user input.
using VarIdx = int;

enum class Op : std::uint8_t {
  Skip,
  Copy,
  Add,
  Mul,
  Huge,
  WeakCopy,
  WeakAdd,
  WeakMul,
  Check,
};

struct Instr {
  Op op = Op::Skip;
  VarIdx r = 0;
  VarIdx s = 0;
  VarIdx t = 0;

  static Instr skip() { return {}; }
  static Instr check() { return {Op::Check, 0, 0, 0}; }
  static Instr copy(VarIdx r, VarIdx s) { return {Op::Copy, r, s, 0}; }
  static Instr add(VarIdx r, VarIdx s, VarIdx t) { return {Op::Add, r, s, t}; }
  static Instr mul(VarIdx r, VarIdx s, VarIdx t) { return {Op::Mul, r, s, t}; }
  static Instr huge(VarIdx r) { return {Op::Huge, r, 0, 0}; }
  static Instr wcopy(VarIdx r, VarIdx s) { return {Op::WeakCopy, r, s, 0}; }
  static Instr wadd(VarIdx r, VarIdx s, VarIdx t) { return {Op::WeakAdd, r, s, t}; }
  static Instr wmul(VarIdx r, VarIdx s, VarIdx t) { return {Op::WeakMul, r, s, t}; }

  bool is_check() const { return op == Op::Check; }
  bool is_weak() const {
    return op == Op::WeakCopy || op == Op::WeakAdd || op == Op::WeakMul;
  }

  // The deterministic counterpart of a weak assignment.
  Instr strong() const {
    switch (op) {
      case Op::WeakCopy: return {Op::Copy, r, s, 0};
      case Op::WeakAdd: return {Op::Add, r, s, t};
      case Op::WeakMul: return {Op::Mul, r, s, t};
      default: return *this;
    }
  }

  std::optional<VarIdx> target() const {
    if (op == Op::Skip || op == Op::Check) return std::nullopt;
    return r;
  }

  int operand_count() const {
    switch (op) {
      case Op::Skip:
      case Op::Check: return 0;
      case Op::Huge: return 1;
      case Op::Copy:
      case Op::WeakCopy: return 2;
      default: return 3;
    }
  }

  VarIdx max_var() const {
    VarIdx m = 0;
    int k = operand_count();
    if (k >= 1) m = r;
    if (k >= 2 && s > m) m = s;
    if (k >= 3 && t > m) m = t;
    return m;
  }

  auto operator<=>(const Instr&) const = default;
};

inline void check_operands(const Instr& i, int n) {
  int k = i.operand_count();
  const VarIdx ops[3] = {i.r, i.s, i.t};
  for (int a = 0; a < k; ++a) {
    if (ops[a] < 1 || ops[a] > n)
      throw std::out_of_range("variable x" + std::to_string(ops[a]) +
                              " outside 1.." + std::to_string(n));
  }
}

// Assignment notation used by the LARE and loop languages.
inline std::string to_string(const Instr& i) {
  auto x = [](VarIdx v) { return "x" + std::to_string(v); };
  switch (i.op) {
    case Op::Skip: return "skip";
    case Op::Check: return "#";
    case Op::Copy: return x(i.r) + ":=" + x(i.s);
    case Op::Add: return x(i.r) + ":=" + x(i.s) + "+" + x(i.t);
    case Op::Mul: return x(i.r) + ":=" + x(i.s) + "*" + x(i.t);
    case Op::Huge: return x(i.r) + ":=**";
    case Op::WeakCopy: return x(i.r) + "<=" + x(i.s);
    case Op::WeakAdd: return x(i.r) + "<=" + x(i.s) + "+" + x(i.t);
    case Op::WeakMul: return x(i.r) + "<=" + x(i.s) + "*" + x(i.t);
  }
  return "?";
}

// Flowchart DSL notation (`add 3 1 2`).
inline std::string to_fc_string(const Instr& i) {
  auto v = [](VarIdx x) { return " x" + std::to_string(x); };
  switch (i.op) {
    case Op::Skip: return "skip";
    case Op::Check: return "check";
    case Op::Copy: return "copy" + v(i.r) + v(i.s);
    case Op::Add: return "add" + v(i.r) + v(i.s) + v(i.t);
    case Op::Mul: return "mul" + v(i.r) + v(i.s) + v(i.t);
    case Op::Huge: return "huge" + v(i.r);
    case Op::WeakCopy: return "wcopy" + v(i.r) + v(i.s);
    case Op::WeakAdd: return "wadd" + v(i.r) + v(i.s) + v(i.t);
    case Op::WeakMul: return "wmul" + v(i.r) + v(i.s) + v(i.t);
  }
  return "?";
}

}  // namespace fcgrow
