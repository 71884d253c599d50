#pragma once

// Dependency matrices: an (n+1)x(n+1) aggregation of unary facts, where entry
// (i,j) is the dependence of x_j on x_i. Diagnostic only; classification never
// reads these.

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "deps.hpp"
#include "lare.hpp"

namespace fcgrow {

// D0 = {0, 1, 1+, 2, 3}, totally ordered with 0 at the bottom.
enum class D0 : std::uint8_t { Zero = 0, One = 1, OnePlus = 2, Two = 3, Three = 4 };

inline D0 to_d0(DepType t) { return D0(std::uint8_t(t) + 1); }
inline DepType to_dep_type(D0 v) {
  if (v == D0::Zero) throw std::invalid_argument("zero entry has no dependency type");
  return DepType(std::uint8_t(v) - 1);
}
inline bool one_like(D0 v) { return v == D0::One || v == D0::OnePlus; }

inline const char* to_string(D0 v) {
  switch (v) {
    case D0::Zero: return "0";
    case D0::One: return "1";
    case D0::OnePlus: return "1+";
    case D0::Two: return "2";
    case D0::Three: return "3";
  }
  return "?";
}

inline D0 plus_type(D0 a, D0 b) {
  if (a == D0::OnePlus && b == D0::OnePlus) return D0::Two;
  return std::max(a, b);
}

inline D0 times_type(D0 a, D0 b) {
  if (a == D0::Zero || b == D0::Zero) return D0::Zero;
  return std::max(a, b);
}

class DepMatrix {
 public:
  // dim = n+1, the last index being the iteration counter.
  explicit DepMatrix(int dim) : dim_(dim), a_(std::size_t(dim) * dim, D0::Zero) {
    if (dim < 1) throw std::invalid_argument("matrix dimension must be positive");
  }

  static DepMatrix identity(int dim) {
    DepMatrix m(dim);
    for (int i = 1; i <= dim; ++i) m.set(i, i, D0::One);
    return m;
  }

  // Rows given top to bottom.
  static DepMatrix from_rows(const std::vector<std::vector<D0>>& rows) {
    DepMatrix m(static_cast<int>(rows.size()));
    for (int i = 1; i <= m.dim(); ++i) {
      if (static_cast<int>(rows[i - 1].size()) != m.dim())
        throw std::invalid_argument("matrix rows must be square");
      for (int j = 1; j <= m.dim(); ++j) m.set(i, j, rows[i - 1][j - 1]);
    }
    return m;
  }

  int dim() const { return dim_; }
  D0 at(int i, int j) const { return a_[idx(i, j)]; }
  void set(int i, int j, D0 v) { a_[idx(i, j)] = v; }

  bool admissible() const {
    if (at(dim_, dim_) != D0::One) return false;
    for (int j = 1; j <= dim_; ++j)
      for (int i = 1; i <= dim_; ++i) {
        if (at(i, j) != D0::One) continue;
        for (int k = 1; k <= dim_; ++k)
          if (k != i && at(k, j) != D0::Zero) return false;
      }
    return true;
  }

  bool operator<=(const DepMatrix& o) const {
    require_same_dim(o);
    for (std::size_t k = 0; k < a_.size(); ++k)
      if (a_[k] > o.a_[k]) return false;
    return true;
  }
  bool operator==(const DepMatrix& o) const = default;
  bool operator<(const DepMatrix& o) const {
    return std::tie(dim_, a_) < std::tie(o.dim_, o.a_);
  }

  void require_same_dim(const DepMatrix& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("matrix dimension mismatch");
  }

 private:
  std::size_t idx(int i, int j) const {
    if (i < 1 || i > dim_ || j < 1 || j > dim_) throw std::out_of_range("matrix index");
    return std::size_t(i - 1) * dim_ + (j - 1);
  }
  int dim_;
  std::vector<D0> a_;
};

inline std::string to_string(const DepMatrix& m) {
  std::string out;
  for (int i = 1; i <= m.dim(); ++i) {
    for (int j = 1; j <= m.dim(); ++j) {
      std::string cell = to_string(m.at(i, j));
      out += std::string(j == 1 ? 0 : 3 - cell.size(), ' ') + cell;
    }
    out += "\n";
  }
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const DepMatrix& m) {
  return os << "\n" << to_string(m);
}

inline DepMatrix mat_mul(const DepMatrix& a, const DepMatrix& b) {
  a.require_same_dim(b);
  DepMatrix c(a.dim());
  for (int i = 1; i <= a.dim(); ++i)
    for (int j = 1; j <= a.dim(); ++j) {
      D0 sum = D0::Zero;
      for (int k = 1; k <= a.dim(); ++k) sum = plus_type(sum, times_type(a.at(i, k), b.at(k, j)));
      c.set(i, j, sum);
    }
  return c;
}

using MatrixSet = std::set<DepMatrix>;

inline MatrixSet mat_mul(const MatrixSet& s, const MatrixSet& t) {
  MatrixSet out;
  for (auto& a : s)
    for (auto& b : t) out.insert(mat_mul(a, b));
  return out;
}

inline MatrixSet set_union(MatrixSet s, const MatrixSet& t) {
  s.insert(t.begin(), t.end());
  return s;
}

// S <= T iff every A in S lies below some B in T.
inline bool set_le(const MatrixSet& s, const MatrixSet& t) {
  for (auto& a : s)
    if (std::none_of(t.begin(), t.end(), [&](const DepMatrix& b) { return a <= b; })) return false;
  return true;
}

constexpr int kMaxSomVars = 4;

namespace detail {

// Maximal cliques over at most 25 vertices, Bron-Kerbosch with pivoting.
inline void bron_kerbosch(const std::vector<std::uint32_t>& adj, std::uint32_t r, std::uint32_t p,
                          std::uint32_t x, std::vector<std::uint32_t>& out) {
  if (!p && !x) {
    out.push_back(r);
    return;
  }
  std::uint32_t px = p | x;
  int pivot = __builtin_ctz(px);
  int best = -1;
  for (std::uint32_t m = px; m; m &= m - 1) {
    int u = __builtin_ctz(m);
    int c = __builtin_popcount(p & adj[u]);
    if (c > best) best = c, pivot = u;
  }
  for (std::uint32_t m = p & ~adj[pivot]; m; m &= m - 1) {
    int v = __builtin_ctz(m);
    std::uint32_t bit = 1u << v;
    bron_kerbosch(adj, r | bit, p & adj[v], x & adj[v], out);
    p &= ~bit;
    x |= bit;
  }
}

}  // namespace detail

// Maxima of the admissible matrices whose entries are unary facts of s and
// whose one-like pairs are backed by binary facts (either orientation).
//
// Per cell only the strongest available type can occur in a maximum: a larger
// type never conflicts with more cells than a smaller one. Each cell is then a
// single vertex, matrices are cliques of the pairwise-compatibility graph, and
// the maxima are exactly the maximal cliques through the (n+1,n+1) cell.
inline MatrixSet som(const DepSet& s) {
  const int n = s.n();
  if (n > kMaxSomVars)
    throw std::invalid_argument("som enumerates matrices only for n <= " +
                                std::to_string(kMaxSomVars) + ", got " + std::to_string(n));
  const int dim = n + 1;
  if (!s.contains_unary(dim, DepType::One, dim)) return {};

  struct Cell {
    int i, j;
    D0 v;
  };
  std::vector<Cell> cells;
  for (int i = 1; i <= dim; ++i)
    for (int j = 1; j <= dim; ++j) {
      if (i == dim && j == dim) {
        cells.push_back({i, j, D0::One});
        continue;
      }
      D0 best = D0::Zero;
      for (DepType t : {DepType::One, DepType::OnePlus, DepType::Two, DepType::Three})
        if (s.contains_unary(i, t, j)) best = std::max(best, to_d0(t));
      if (best != D0::Zero) cells.push_back({i, j, best});
    }

  auto compatible = [&](const Cell& x, const Cell& y) {
    if (x.j == y.j && (x.v == D0::One || y.v == D0::One)) return false;
    if (one_like(x.v) && one_like(y.v))
      return s.contains_binary(x.i, y.i, x.j, y.j) || s.contains_binary(y.i, x.i, y.j, x.j);
    return true;
  };
  const int m = static_cast<int>(cells.size());
  std::vector<std::uint32_t> adj(m, 0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      if (a != b && compatible(cells[a], cells[b])) adj[a] |= 1u << b;

  int corner = -1;
  for (int a = 0; a < m; ++a)
    if (cells[a].i == dim && cells[a].j == dim) corner = a;
  std::vector<std::uint32_t> cliques;
  detail::bron_kerbosch(adj, 1u << corner, adj[corner], 0, cliques);

  MatrixSet out;
  for (auto c : cliques) {
    DepMatrix a(dim);
    for (std::uint32_t k = c; k; k &= k - 1) {
      const Cell& cell = cells[__builtin_ctz(k)];
      a.set(cell.i, cell.j, cell.v);
    }
    if (!a.admissible()) throw InternalError("som produced an inadmissible matrix");
    out.insert(std::move(a));
  }
  return out;
}

struct LemmaViolation {
  std::string law;
  std::string detail;
};

struct CheckReport {
  std::vector<LemmaViolation> violations;
  int checked = 0;
  bool ok() const { return violations.empty(); }
};

constexpr int kMaxLemmaVars = 3;

namespace detail {

inline std::string describe(const MatrixSet& s) {
  std::string out;
  for (auto& a : s) out += to_string(a) + "\n";
  return out;
}

}  // namespace detail

// Checks the lattice laws relating som of composite expressions to som of
// their parts: choice, sequence, and the two star laws for e1* and e2*. The
// expressions need not be well formed; stars are analysed as unbracketed.
inline CheckReport lemma11_check(const Lare& e1, const Lare& e2, int n) {
  if (n > kMaxLemmaVars)
    throw std::invalid_argument("lemma check supports n <= " + std::to_string(kMaxLemmaVars));
  Universe u{n, lare_has_huge(e1) || lare_has_huge(e2)};
  if (u.n() > kMaxSomVars) throw std::invalid_argument("too many variables with HUGE");
  // The analyzer memoises by node address, so every expression it sees must
  // outlive it.
  const Lare alt = lare::alt(e1, e2), cat = lare::cat(e1, e2);
  const Lare star1 = lare::star(e1), star2 = lare::star(e2);
  detail::LareAnalyzer an{u, {}};
  auto som_of = [&](const Lare& e) { return som(an.run(e)); };
  const MatrixSet id{DepMatrix::identity(u.n() + 1)};

  CheckReport r;
  auto expect_ge = [&](const std::string& law, const MatrixSet& big, const MatrixSet& small) {
    ++r.checked;
    if (!set_le(small, big))
      r.violations.push_back({law, "lower side:\n" + detail::describe(small) +
                                       "upper side:\n" + detail::describe(big)});
  };

  MatrixSet s1 = som_of(e1), s2 = som_of(e2);
  for (auto* e : {&e1, &e2}) {
    if ((*e)->kind != LareKind::Atom && (*e)->kind != LareKind::Check) continue;
    ++r.checked;
    MatrixSet s = som_of(*e);
    if (s.size() != 1)
      r.violations.push_back({"atomic", print_lare(*e) + " has " + std::to_string(s.size()) +
                                            " matrices"});
  }
  expect_ge("choice", som_of(alt), set_union(s1, s2));
  expect_ge("sequence", som_of(cat), mat_mul(s1, s2));
  for (auto* e : {&star1, &star2}) {
    MatrixSet st = som_of(*e);
    expect_ge("star-identity", st, id);
    expect_ge("star-unfold", st, mat_mul(st, set_union(st, id)));
  }
  return r;
}

// Size-relation graph: arc i -> j labelled by the strongest unary type.
struct Srg {
  int nodes = 0;
  std::map<std::pair<int, int>, D0> arcs;

  std::string to_dot(const std::string& name = "srg") const {
    std::string out = "digraph " + name + " {\n";
    for (int i = 1; i <= nodes; ++i) out += "  x" + std::to_string(i) + ";\n";
    for (auto& [ij, v] : arcs)
      out += "  x" + std::to_string(ij.first) + " -> x" + std::to_string(ij.second) +
             " [label=\"" + to_string(v) + "\"];\n";
    return out + "}\n";
  }
};

inline Srg build_srg(const DepSet& s) {
  Srg g;
  g.nodes = s.n() + 1;
  for (auto d : s) {
    if (!d.is_unary()) continue;
    D0& v = g.arcs[{d.src(), d.dst()}];
    v = std::max(v, to_d0(d.type()));
  }
  return g;
}

}  // namespace fcgrow
