#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "instr.hpp"
#include "lare.hpp"

namespace fcgrow {

enum class DepType : std::uint8_t { One = 0, OnePlus = 1, Two = 2, Three = 3 };

inline DepType join(DepType a, DepType b) { return a < b ? b : a; }
inline bool one_like(DepType t) { return t <= DepType::OnePlus; }

inline const char* to_string(DepType t) {
  switch (t) {
    case DepType::One: return "1";
    case DepType::OnePlus: return "1p";
    case DepType::Two: return "2";
    case DepType::Three: return "3";
  }
  return "?";
}

// A unary dependency i -t-> j or a binary one (a,b) -> (c,d), packed into one
// word so that sets sort as: unaries by (src, dst, type), then binaries.
class Dep {
 public:
  static constexpr int kMaxIndex = 127;

  static Dep unary(int src, DepType t, int dst) {
    check_index(src);
    check_index(dst);
    return Dep((std::uint32_t(src) << 16) | (std::uint32_t(dst) << 8) | std::uint32_t(t));
  }
  static Dep binary(int a, int b, int c, int d) {
    check_index(a);
    check_index(b);
    check_index(c);
    check_index(d);
    if (a == b && c == d) throw std::invalid_argument("binary dependency needs a != b or c != d");
    return Dep((1u << 31) | (std::uint32_t(a) << 21) | (std::uint32_t(b) << 14) |
               (std::uint32_t(c) << 7) | std::uint32_t(d));
  }

  bool is_unary() const { return (key_ >> 31) == 0; }
  bool is_binary() const { return !is_unary(); }

  // unary accessors
  int src() const { return int((key_ >> 16) & 0xff); }
  int dst() const { return int((key_ >> 8) & 0xff); }
  DepType type() const { return DepType(key_ & 0x3); }

  // binary accessors: (a,b) -> (c,d)
  int a() const { return int((key_ >> 21) & 0x7f); }
  int b() const { return int((key_ >> 14) & 0x7f); }
  int c() const { return int((key_ >> 7) & 0x7f); }
  int d() const { return int(key_ & 0x7f); }

  Dep swapped() const { return is_unary() ? *this : binary(b(), a(), d(), c()); }

  std::uint32_t key() const { return key_; }
  auto operator<=>(const Dep&) const = default;

 private:
  explicit Dep(std::uint32_t k) : key_(k) {}
  static void check_index(int i) {
    if (i < 1 || i > kMaxIndex) throw std::out_of_range("dependency index out of range");
  }
  std::uint32_t key_;
};

inline std::string to_string(const Dep& d) {
  if (d.is_unary())
    return std::to_string(d.src()) + " -" + to_string(d.type()) + "-> " + std::to_string(d.dst());
  return "(" + std::to_string(d.a()) + "," + std::to_string(d.b()) + ") -> (" +
         std::to_string(d.c()) + "," + std::to_string(d.d()) + ")";
}

// A dependency set over variables 1..n plus the iteration index n+1.
class DepSet {
 public:
  DepSet() = default;
  explicit DepSet(int n) : n_(n) {}
  DepSet(int n, std::vector<Dep> deps) : n_(n), deps_(std::move(deps)) { normalize(); }

  int n() const { return n_; }
  int iter() const { return n_ + 1; }
  const std::vector<Dep>& deps() const { return deps_; }
  std::size_t size() const { return deps_.size(); }
  bool empty() const { return deps_.empty(); }
  auto begin() const { return deps_.begin(); }
  auto end() const { return deps_.end(); }

  bool contains(Dep d) const { return std::binary_search(deps_.begin(), deps_.end(), d); }
  bool contains_unary(int i, DepType t, int j) const { return contains(Dep::unary(i, t, j)); }
  bool contains_binary(int a, int b, int c, int d) const {
    return contains(Dep::binary(a, b, c, d));
  }
  bool is_subset_of(const DepSet& o) const {
    return std::includes(o.deps_.begin(), o.deps_.end(), deps_.begin(), deps_.end());
  }

  std::vector<Dep> unaries() const {
    std::vector<Dep> out;
    for (auto d : deps_)
      if (d.is_unary()) out.push_back(d);
    return out;
  }
  std::vector<Dep> binaries() const {
    std::vector<Dep> out;
    for (auto d : deps_)
      if (d.is_binary()) out.push_back(d);
    return out;
  }

  bool operator==(const DepSet& o) const { return n_ == o.n_ && deps_ == o.deps_; }

 private:
  void normalize() {
    std::sort(deps_.begin(), deps_.end());
    deps_.erase(std::unique(deps_.begin(), deps_.end()), deps_.end());
  }
  int n_ = 0;
  std::vector<Dep> deps_;
};

inline std::string to_string(const DepSet& s) {
  std::string out;
  for (auto d : s) out += to_string(d) + "\n";
  return out;
}

inline std::size_t universe_size(int n) {
  std::size_t m = std::size_t(n) + 1;
  return m * m * 4 + m * m * m * m;
}

inline void require_same_n(const DepSet& a, const DepSet& b) {
  if (a.n() != b.n()) throw std::invalid_argument("dependency sets over different universes");
}

inline DepSet set_union(const DepSet& a, const DepSet& b) {
  require_same_n(a, b);
  std::vector<Dep> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return DepSet(a.n(), std::move(out));
}

inline DepSet set_difference(const DepSet& a, const DepSet& b) {
  require_same_n(a, b);
  std::vector<Dep> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return DepSet(a.n(), std::move(out));
}

// Binary (i,j,k,l) requires one-like unaries i->k and j->l.
inline bool satisfies_proviso(const DepSet& s) {
  auto has_one_like = [&](int i, int k) {
    return s.contains_unary(i, DepType::One, k) || s.contains_unary(i, DepType::OnePlus, k);
  };
  for (auto d : s)
    if (d.is_binary() && !(has_one_like(d.a(), d.c()) && has_one_like(d.b(), d.d())))
      return false;
  return true;
}

inline bool swap_closed(const DepSet& s) {
  for (auto d : s)
    if (d.is_binary() && !s.contains(d.swapped())) return false;
  return true;
}

inline DepSet addbdeps(const DepSet& s) {
  std::vector<Dep> ones;
  for (auto d : s)
    if (d.is_unary() && one_like(d.type())) ones.push_back(d);
  std::vector<Dep> out(s.begin(), s.end());
  for (auto x : ones)
    for (auto y : ones)
      if (x.src() != y.src() || x.dst() != y.dst())
        out.push_back(Dep::binary(x.src(), y.src(), x.dst(), y.dst()));
  return DepSet(s.n(), std::move(out));
}

inline DepSet identity_set(int n) {
  if (n < 1) throw std::invalid_argument("identity_set needs n >= 1");
  std::vector<Dep> u;
  for (int i = 1; i <= n + 1; ++i) u.push_back(Dep::unary(i, DepType::One, i));
  return addbdeps(DepSet(n, std::move(u)));
}

inline std::optional<Dep> compose(Dep x, Dep y) {
  if (x.is_unary() && y.is_unary()) {
    if (x.dst() != y.src()) return std::nullopt;
    return Dep::unary(x.src(), join(x.type(), y.type()), y.dst());
  }
  if (x.is_unary()) {
    // U(i,a,j) . B(j,j,k,k')
    if (!(y.a() == x.dst() && y.b() == x.dst() && one_like(x.type()))) return std::nullopt;
    return Dep::binary(x.src(), x.src(), y.c(), y.d());
  }
  if (y.is_unary()) {
    // B(i,i',j,j) . U(j,a,k)
    if (!(x.c() == y.src() && x.d() == y.src() && one_like(y.type()))) return std::nullopt;
    return Dep::binary(x.a(), x.b(), y.dst(), y.dst());
  }
  if (x.c() != y.a() || x.d() != y.b()) return std::nullopt;
  if (x.a() != x.b() || y.c() != y.d()) return Dep::binary(x.a(), x.b(), y.c(), y.d());
  return Dep::unary(x.a(), DepType::Two, y.c());
}

// Right operand of a composition, indexed by source index (unaries) and by
// source pair (binaries).
class ComposeIndex {
 public:
  explicit ComposeIndex(const DepSet& t) : dim_(t.n() + 2) {
    unary_.assign(dim_, {});
    binary_.assign(std::size_t(dim_) * dim_, {});
    for (auto d : t) {
      if (d.is_unary())
        unary_[d.src()].push_back(d);
      else
        binary_[std::size_t(d.a()) * dim_ + d.b()].push_back(d);
    }
  }
  const std::vector<Dep>& unary_from(int i) const { return unary_[i]; }
  const std::vector<Dep>& binary_from(int i, int j) const {
    return binary_[std::size_t(i) * dim_ + j];
  }

 private:
  int dim_;
  std::vector<std::vector<Dep>> unary_;
  std::vector<std::vector<Dep>> binary_;
};

inline void compose_into(const DepSet& s, const ComposeIndex& t, std::vector<Dep>& out) {
  for (auto x : s) {
    if (x.is_unary()) {
      for (auto y : t.unary_from(x.dst()))
        out.push_back(Dep::unary(x.src(), join(x.type(), y.type()), y.dst()));
      if (one_like(x.type()))
        for (auto y : t.binary_from(x.dst(), x.dst()))
          out.push_back(Dep::binary(x.src(), x.src(), y.c(), y.d()));
    } else {
      for (auto y : t.binary_from(x.c(), x.d())) {
        if (x.a() != x.b() || y.c() != y.d())
          out.push_back(Dep::binary(x.a(), x.b(), y.c(), y.d()));
        else
          out.push_back(Dep::unary(x.a(), DepType::Two, y.c()));
      }
      if (x.c() == x.d())
        for (auto y : t.unary_from(x.c()))
          if (one_like(y.type())) out.push_back(Dep::binary(x.a(), x.b(), y.dst(), y.dst()));
    }
  }
}

inline DepSet compose_sets(const DepSet& s, const DepSet& t) {
  require_same_n(s, t);
  ComposeIndex idx(t);
  std::vector<Dep> out;
  compose_into(s, idx, out);
  return DepSet(s.n(), std::move(out));
}

// Least fixpoint of X -> Id u X u X.s, computed semi-naively.
inline DepSet lfp(const DepSet& s) {
  const std::size_t cap = universe_size(s.n());
  ComposeIndex idx(s);
  DepSet x = identity_set(s.n());
  DepSet delta = x;
  std::size_t rounds = 0;
  while (!delta.empty()) {
    if (++rounds > cap) throw std::logic_error("lfp iteration exceeded the universe size");
    std::vector<Dep> raw;
    compose_into(delta, idx, raw);
    DepSet fresh = set_difference(DepSet(s.n(), std::move(raw)), x);
    x = set_union(x, fresh);
    delta = std::move(fresh);
  }
  if (x.size() > cap) throw std::logic_error("dependency set exceeds the universe size");
  return x;
}

inline DepSet loop_correct(const DepSet& s) {
  std::vector<Dep> out(s.begin(), s.end());
  const int it = s.iter();
  for (auto d : s) {
    if (!d.is_unary() || d.src() != d.dst() || d.src() > s.n()) continue;
    if (d.type() == DepType::OnePlus) out.push_back(Dep::unary(it, DepType::Two, d.src()));
    if (d.type() == DepType::Two) out.push_back(Dep::unary(it, DepType::Three, d.src()));
  }
  return DepSet(s.n(), std::move(out));
}

inline DepSet star_abs(const DepSet& s) {
  DepSet f = lfp(s);
  return compose_sets(loop_correct(f), f);
}

inline DepSet bracket_subst(const DepSet& s, VarIdx l) {
  if (l < 1 || l > s.n()) throw std::out_of_range("bracket variable outside 1..n");
  const int it = s.iter();
  std::vector<Dep> out;
  out.reserve(s.size());
  for (auto d : s) {
    if (d.is_unary() && d.src() == it && d.dst() <= s.n())
      out.push_back(Dep::unary(l, d.type(), d.dst()));
    else
      out.push_back(d);
  }
  return DepSet(s.n(), std::move(out));
}

// The analysis universe: user variables, an optional HUGE variable right after
// them, and the iteration index above everything.
struct Universe {
  int n_user = 1;
  bool has_huge = false;

  int n() const { return n_user + (has_huge ? 1 : 0); }
  std::optional<VarIdx> huge() const {
    return has_huge ? std::optional<VarIdx>(n_user + 1) : std::nullopt;
  }
  bool operator==(const Universe&) const = default;
};

inline DepSet atomic_deps(const Instr& instr, int n, std::optional<VarIdx> huge = std::nullopt) {
  Instr i = instr.strong();
  if (i.op == Op::Huge) {
    if (!huge) throw std::invalid_argument("huge assignment without a HUGE variable");
    i = Instr::copy(i.r, *huge);
  }
  check_operands(i, n);
  if (i.op == Op::Skip || i.op == Op::Check) return identity_set(n);
  std::vector<Dep> u;
  for (int k = 1; k <= n + 1; ++k)
    if (k != i.r) u.push_back(Dep::unary(k, DepType::One, k));
  switch (i.op) {
    case Op::Copy: u.push_back(Dep::unary(i.s, DepType::One, i.r)); break;
    case Op::Add:
      if (i.s != i.t) {
        u.push_back(Dep::unary(i.s, DepType::OnePlus, i.r));
        u.push_back(Dep::unary(i.t, DepType::OnePlus, i.r));
      } else {
        u.push_back(Dep::unary(i.s, DepType::Two, i.r));
      }
      break;
    case Op::Mul:
      u.push_back(Dep::unary(i.s, DepType::Two, i.r));
      u.push_back(Dep::unary(i.t, DepType::Two, i.r));
      break;
    default: throw std::logic_error("unexpected instruction");
  }
  return addbdeps(DepSet(n, std::move(u)));
}

inline DepSet atomic_deps(const Instr& instr, const Universe& u) {
  return atomic_deps(instr, u.n(), u.huge());
}

namespace detail {
struct LareAnalyzer {
  Universe u;
  std::unordered_map<const LareNode*, DepSet> memo;

  const DepSet& run(const Lare& e) {
    if (auto it = memo.find(e.get()); it != memo.end()) return it->second;
    DepSet r;
    switch (e->kind) {
      case LareKind::Atom: r = atomic_deps(e->instr, u); break;
      case LareKind::Check:
      case LareKind::Eps: r = identity_set(u.n()); break;
      case LareKind::Alt: {
        DepSet a = run(e->left);
        r = set_union(a, run(e->right));
        break;
      }
      case LareKind::Cat: {
        DepSet a = run(e->left);
        r = compose_sets(a, run(e->right));
        break;
      }
      case LareKind::Star: r = star_abs(run(e->left)); break;
      case LareKind::Bracket: r = bracket_subst(run(e->left), e->bound); break;
    }
    return memo.emplace(e.get(), std::move(r)).first->second;
  }
};
}  // namespace detail

inline DepSet analyze_lare(const Lare& e, const Universe& u) {
  require_wf(e, u.n_user);
  detail::LareAnalyzer a{u, {}};
  return a.run(e);
}

inline DepSet analyze_lare(const Lare& e, int n_user) {
  return analyze_lare(e, Universe{n_user, lare_has_huge(e)});
}

enum class Growth { Polynomial, Superpolynomial, Unbounded };

inline const char* to_string(Growth g) {
  switch (g) {
    case Growth::Polynomial: return "Polynomial";
    case Growth::Superpolynomial: return "Superpolynomial";
    case Growth::Unbounded: return "Unbounded";
  }
  return "?";
}

struct VarGrowth {
  VarIdx var = 0;
  Growth growth = Growth::Polynomial;
  std::vector<VarIdx> witnesses;  // sources of type-3 or HUGE dependencies

  bool operator==(const VarGrowth&) const = default;
};

struct GrowthReport {
  std::vector<VarGrowth> vars;  // vars[j-1] describes x_j

  const VarGrowth& at(VarIdx j) const { return vars.at(j - 1); }
  bool all_polynomial() const {
    return std::all_of(vars.begin(), vars.end(),
                       [](auto& v) { return v.growth == Growth::Polynomial; });
  }
  bool operator==(const GrowthReport&) const = default;
};

class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline GrowthReport classify(const DepSet& s, int n_user, std::optional<VarIdx> huge = std::nullopt) {
  const int it = s.iter();
  for (auto d : s)
    if (d.is_unary() && d.src() == it && d.dst() != it)
      throw InternalError("iteration index still flows into x" + std::to_string(d.dst()) +
                          " (a star outside every bracket?)");
  GrowthReport r;
  for (int j = 1; j <= n_user; ++j) {
    VarGrowth g{j, Growth::Polynomial, {}};
    std::vector<VarIdx> huge_src, three_src;
    for (auto d : s) {
      if (!d.is_unary() || d.dst() != j) continue;
      if (huge && d.src() == *huge) huge_src.push_back(d.src());
      if (d.type() == DepType::Three) three_src.push_back(d.src());
    }
    if (!huge_src.empty()) {
      g.growth = Growth::Unbounded;
      g.witnesses = huge_src;
    } else if (!three_src.empty()) {
      g.growth = Growth::Superpolynomial;
      g.witnesses = three_src;
    }
    std::sort(g.witnesses.begin(), g.witnesses.end());
    g.witnesses.erase(std::unique(g.witnesses.begin(), g.witnesses.end()), g.witnesses.end());
    r.vars.push_back(std::move(g));
  }
  return r;
}

inline GrowthReport classify(const DepSet& s, const Universe& u) {
  return classify(s, u.n_user, u.huge());
}

// Per-variable worst case of two reports over the same variables.
inline GrowthReport worst_of(const GrowthReport& a, const GrowthReport& b) {
  if (a.vars.empty()) return b;
  if (b.vars.empty()) return a;
  GrowthReport r = a;
  for (std::size_t j = 0; j < r.vars.size(); ++j) {
    auto& x = r.vars[j];
    auto& y = b.vars[j];
    if (y.growth > x.growth) {
      x = y;
    } else if (y.growth == x.growth && x.growth != Growth::Polynomial) {
      x.witnesses.insert(x.witnesses.end(), y.witnesses.begin(), y.witnesses.end());
      std::sort(x.witnesses.begin(), x.witnesses.end());
      x.witnesses.erase(std::unique(x.witnesses.begin(), x.witnesses.end()), x.witnesses.end());
    }
  }
  return r;
}

}  // namespace fcgrow
