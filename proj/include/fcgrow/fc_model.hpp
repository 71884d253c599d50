#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "graph_util.hpp"
#include "instr.hpp"

namespace fcgrow {

using NodeIdx = int;
using ArcIdx = int;
using LoopIdx = int;

inline constexpr LoopIdx kRoot = -1;

struct Arc {
  std::string id;
  NodeIdx src = 0;
  NodeIdx dst = 0;
  Instr instr;
};

// `arcs` lists the arcs declared for this loop; the loop's full arc set also
// includes every descendant loop's arcs. Cut arcs are implicitly members.
struct Loop {
  std::string id;
  LoopIdx parent = kRoot;
  VarIdx bound = 0;
  std::vector<ArcIdx> arcs;
  std::vector<ArcIdx> cutset;
};

struct FlowchartProgram {
  int n = 0;
  std::vector<std::string> nodes;
  std::vector<Arc> arcs;
  std::vector<NodeIdx> entries;
  std::vector<NodeIdx> exits;
  std::vector<Loop> loops;

  std::optional<NodeIdx> find_node(const std::string& name) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i] == name) return static_cast<NodeIdx>(i);
    return std::nullopt;
  }
  std::optional<ArcIdx> find_arc(const std::string& id) const {
    for (std::size_t i = 0; i < arcs.size(); ++i)
      if (arcs[i].id == id) return static_cast<ArcIdx>(i);
    return std::nullopt;
  }
  std::optional<LoopIdx> find_loop(const std::string& id) const {
    for (std::size_t i = 0; i < loops.size(); ++i)
      if (loops[i].id == id) return static_cast<LoopIdx>(i);
    return std::nullopt;
  }

  NodeIdx node(const std::string& name) {
    if (auto i = find_node(name)) return *i;
    nodes.push_back(name);
    return static_cast<NodeIdx>(nodes.size() - 1);
  }
  ArcIdx add_arc(const std::string& id, const std::string& src, const std::string& dst,
                 Instr instr) {
    NodeIdx s = node(src), d = node(dst);
    arcs.push_back({id, s, d, instr});
    return static_cast<ArcIdx>(arcs.size() - 1);
  }
  LoopIdx add_loop(const std::string& id, LoopIdx parent, VarIdx bound,
                   const std::vector<std::string>& arc_ids,
                   const std::vector<std::string>& cut_ids) {
    Loop l{id, parent, bound, {}, {}};
    for (auto& a : arc_ids) l.arcs.push_back(arc_index(a));
    for (auto& a : cut_ids) l.cutset.push_back(arc_index(a));
    loops.push_back(std::move(l));
    return static_cast<LoopIdx>(loops.size() - 1);
  }
  ArcIdx arc_index(const std::string& id) const {
    auto a = find_arc(id);
    if (!a) throw std::out_of_range("unknown arc " + id);
    return *a;
  }
  std::string loop_name(LoopIdx l) const { return l == kRoot ? "root" : loops[l].id; }
};

// Referential integrity: every index in range, operands within 1..n.
inline void check_structure(const FlowchartProgram& p) {
  auto node_ok = [&](NodeIdx v) { return v >= 0 && v < static_cast<int>(p.nodes.size()); };
  auto arc_ok = [&](ArcIdx a) { return a >= 0 && a < static_cast<int>(p.arcs.size()); };
  if (p.n < 1) throw std::invalid_argument("program needs at least one variable");
  if (p.entries.empty() || p.exits.empty())
    throw std::invalid_argument("program needs entry and exit nodes");
  for (auto v : p.entries)
    if (!node_ok(v)) throw std::invalid_argument("bad entry node index");
  for (auto v : p.exits)
    if (!node_ok(v)) throw std::invalid_argument("bad exit node index");
  std::set<std::string> ids;
  for (auto& a : p.arcs) {
    if (!node_ok(a.src) || !node_ok(a.dst))
      throw std::invalid_argument("arc " + a.id + " has a bad endpoint");
    if (!ids.insert(a.id).second) throw std::invalid_argument("duplicate arc id " + a.id);
    check_operands(a.instr, p.n);
  }
  std::set<std::string> lids;
  for (auto& l : p.loops) {
    if (!lids.insert(l.id).second) throw std::invalid_argument("duplicate loop id " + l.id);
    if (l.id == "root") throw std::invalid_argument("loop id 'root' is reserved");
    if (l.parent != kRoot && (l.parent < 0 || l.parent >= static_cast<int>(p.loops.size())))
      throw std::invalid_argument("loop " + l.id + " has a bad parent");
    if (l.bound < 1 || l.bound > p.n)
      throw std::invalid_argument("loop " + l.id + " bound outside 1..n");
    for (auto a : l.arcs)
      if (!arc_ok(a)) throw std::invalid_argument("loop " + l.id + " lists a bad arc");
    for (auto a : l.cutset)
      if (!arc_ok(a)) throw std::invalid_argument("loop " + l.id + " lists a bad cut arc");
  }
}

enum class ViolationKind {
  NestingOverlap,
  CutArcMutates,
  BoundMutated,
  UncutCycle,
  RootCycle,
  EntryHasPred,
  ExitHasSucc,
};

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::NestingOverlap: return "NestingOverlap";
    case ViolationKind::CutArcMutates: return "CutArcMutates";
    case ViolationKind::BoundMutated: return "BoundMutated";
    case ViolationKind::UncutCycle: return "UncutCycle";
    case ViolationKind::RootCycle: return "RootCycle";
    case ViolationKind::EntryHasPred: return "EntryHasPred";
    case ViolationKind::ExitHasSucc: return "ExitHasSucc";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  std::vector<std::string> ids;
  std::string message;

  auto operator<=>(const Violation&) const = default;
};

// Derived loop-forest facts. Loop index kRoot stands for the whole program.
struct LoopTree {
  std::vector<LoopIdx> owner;                 // per arc: innermost loop
  std::vector<char> is_cut;                   // per arc: in its owner's cutset
  std::vector<std::vector<LoopIdx>> children; // slot 0 is root, slot l+1 is loop l
  std::vector<LoopIdx> parent;
  std::vector<int> depth;                     // root children have depth 1
  std::vector<LoopIdx> postorder;             // non-root loops, children first

  const std::vector<LoopIdx>& kids(LoopIdx l) const { return children[l + 1]; }

  bool is_ancestor(LoopIdx anc, LoopIdx l) const {
    if (anc == kRoot) return true;
    while (l != kRoot) {
      if (l == anc) return true;
      l = parent[l];
    }
    return false;
  }
  // Arc `a` belongs to loop `l` (directly or through a descendant).
  bool contains(LoopIdx l, ArcIdx a) const { return is_ancestor(l, owner[a]); }

  // Loops containing `a`, innermost first, root excluded.
  std::vector<LoopIdx> chain(ArcIdx a) const {
    std::vector<LoopIdx> out;
    for (LoopIdx l = owner[a]; l != kRoot; l = parent[l]) out.push_back(l);
    return out;
  }

  // The child of `l` whose subtree contains loop `d` (d strictly below l).
  LoopIdx child_towards(LoopIdx l, LoopIdx d) const {
    while (d != kRoot && parent[d] != l) d = parent[d];
    return d;
  }
};

namespace detail {

inline LoopTree build_tree(const FlowchartProgram& p, std::vector<Violation>* out) {
  const int nl = static_cast<int>(p.loops.size());
  const int na = static_cast<int>(p.arcs.size());
  LoopTree t;
  t.parent.resize(nl);
  t.depth.assign(nl, 0);
  t.children.assign(nl + 1, {});
  auto report = [&](ViolationKind k, std::vector<std::string> ids, std::string msg) {
    if (out) out->push_back({k, std::move(ids), std::move(msg)});
  };

  // Parent links must not form cycles; a loop caught in one is reattached to root.
  for (int l = 0; l < nl; ++l) t.parent[l] = p.loops[l].parent;
  for (int l = 0; l < nl; ++l) {
    int steps = 0;
    for (LoopIdx q = t.parent[l]; q != kRoot; q = t.parent[q]) {
      if (++steps > nl) {
        report(ViolationKind::NestingOverlap, {p.loops[l].id},
               "loop " + p.loops[l].id + " is part of a parent cycle");
        t.parent[l] = kRoot;
        break;
      }
    }
  }
  for (int l = 0; l < nl; ++l) {
    int d = 1;
    for (LoopIdx q = t.parent[l]; q != kRoot; q = t.parent[q]) ++d;
    t.depth[l] = d;
    t.children[t.parent[l] + 1].push_back(l);
  }
  auto visit = [&](auto&& self, LoopIdx l) -> void {
    for (LoopIdx c : t.kids(l)) self(self, c);
    if (l != kRoot) t.postorder.push_back(l);
  };
  visit(visit, kRoot);

  // Ownership: declaring loops must form a chain; the deepest one owns the arc.
  std::vector<std::vector<LoopIdx>> declared(na);
  for (int l = 0; l < nl; ++l) {
    for (ArcIdx a : p.loops[l].arcs) declared[a].push_back(l);
    for (ArcIdx a : p.loops[l].cutset) declared[a].push_back(l);
  }
  t.owner.assign(na, kRoot);
  for (int a = 0; a < na; ++a) {
    auto& ds = declared[a];
    std::sort(ds.begin(), ds.end());
    ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
    std::sort(ds.begin(), ds.end(), [&](LoopIdx x, LoopIdx y) {
      return std::tie(t.depth[x], p.loops[x].id) < std::tie(t.depth[y], p.loops[y].id);
    });
    bool chain = true;
    for (std::size_t i = 1; i < ds.size(); ++i)
      if (!t.is_ancestor(ds[i - 1], ds[i])) chain = false;
    if (!chain) {
      std::vector<std::string> ids{p.arcs[a].id};
      std::vector<std::string> ls;
      for (auto l : ds) ls.push_back(p.loops[l].id);
      std::sort(ls.begin(), ls.end());
      ids.insert(ids.end(), ls.begin(), ls.end());
      report(ViolationKind::NestingOverlap, ids,
             "arc " + p.arcs[a].id + " is claimed by loops that are not nested");
    }
    if (!ds.empty()) t.owner[a] = ds.back();
  }

  t.is_cut.assign(na, 0);
  for (int l = 0; l < nl; ++l) {
    for (ArcIdx a : p.loops[l].cutset) {
      if (t.owner[a] != l) {
        report(ViolationKind::NestingOverlap, {p.loops[l].id, p.arcs[a].id},
               "cut arc " + p.arcs[a].id + " of loop " + p.loops[l].id +
                   " also belongs to a nested loop");
        continue;
      }
      t.is_cut[a] = 1;
    }
  }
  return t;
}

}  // namespace detail

inline LoopTree loop_tree(const FlowchartProgram& p) {
  check_structure(p);
  return detail::build_tree(p, nullptr);
}

inline std::vector<Violation> validate_program(const FlowchartProgram& p) {
  check_structure(p);
  std::vector<Violation> out;
  LoopTree t = detail::build_tree(p, &out);
  const int nl = static_cast<int>(p.loops.size());
  const int na = static_cast<int>(p.arcs.size());
  const int nn = static_cast<int>(p.nodes.size());

  std::vector<int> indeg(nn, 0), outdeg(nn, 0);
  for (auto& a : p.arcs) {
    ++outdeg[a.src];
    ++indeg[a.dst];
  }
  std::set<NodeIdx> ent(p.entries.begin(), p.entries.end());
  std::set<NodeIdx> ext(p.exits.begin(), p.exits.end());
  for (auto v : ent)
    if (indeg[v])
      out.push_back({ViolationKind::EntryHasPred, {p.nodes[v]},
                     "entry " + p.nodes[v] + " has incoming arcs"});
  for (auto v : ext)
    if (outdeg[v])
      out.push_back({ViolationKind::ExitHasSucc, {p.nodes[v]},
                     "exit " + p.nodes[v] + " has outgoing arcs"});

  for (int l = 0; l < nl; ++l)
    for (ArcIdx a : p.loops[l].cutset)
      if (!p.arcs[a].instr.is_check())
        out.push_back({ViolationKind::CutArcMutates, {p.loops[l].id, p.arcs[a].id},
                       "cut arc " + p.arcs[a].id + " is not a check arc"});

  for (int a = 0; a < na; ++a) {
    auto tgt = p.arcs[a].instr.target();
    if (!tgt) continue;
    for (LoopIdx l : t.chain(a))
      if (p.loops[l].bound == *tgt)
        out.push_back({ViolationKind::BoundMutated, {p.loops[l].id, p.arcs[a].id},
                       "arc " + p.arcs[a].id + " assigns the bound of loop " + p.loops[l].id});
  }

  // Each loop must be a strict subset of its parent.
  std::vector<int> size(nl + 1, 0);
  for (int a = 0; a < na; ++a) {
    for (LoopIdx l : t.chain(a)) ++size[l + 1];
    ++size[0];
  }
  for (int l = 0; l < nl; ++l)
    if (size[l + 1] == size[t.parent[l] + 1] && size[l + 1] > 0)
      out.push_back({ViolationKind::NestingOverlap, {p.loops[l].id, p.loop_name(t.parent[l])},
                     "loop " + p.loops[l].id + " is not a strict subset of its parent"});

  // Cycle-cut condition. For loop L take its arcs minus its cutset. A cycle in
  // that graph is legal only if it stays inside a single child loop.
  for (LoopIdx l = kRoot; l < nl; ++l) {
    std::vector<std::pair<int, int>> edges;
    std::vector<ArcIdx> members;
    for (int a = 0; a < na; ++a) {
      if (!t.contains(l, a)) continue;
      if (t.owner[a] == l && t.is_cut[a]) continue;
      edges.push_back({p.arcs[a].src, p.arcs[a].dst});
      members.push_back(a);
    }
    auto comp = detail::scc_ids(nn, edges);
    std::map<int, std::set<std::string>> direct;
    std::map<int, std::set<LoopIdx>> via_child;
    for (std::size_t e = 0; e < members.size(); ++e) {
      ArcIdx a = members[e];
      int c = comp[edges[e].first];
      if (c != comp[edges[e].second]) continue;
      if (t.owner[a] == l)
        direct[c].insert(p.arcs[a].id);
      else
        via_child[c].insert(t.child_towards(l, t.owner[a]));
    }
    auto kind = l == kRoot ? ViolationKind::RootCycle : ViolationKind::UncutCycle;
    std::string lname = p.loop_name(l);
    for (auto& [c, arcs] : direct) {
      std::vector<std::string> ids{lname};
      ids.insert(ids.end(), arcs.begin(), arcs.end());
      out.push_back({kind, ids, "cycle in " + lname + " avoids its cutset"});
    }
    for (auto& [c, kids] : via_child) {
      if (kids.size() < 2 || direct.count(c)) continue;
      std::vector<std::string> ids{lname};
      std::vector<std::string> names;
      for (auto k : kids) names.push_back(p.loops[k].id);
      std::sort(names.begin(), names.end());
      ids.insert(ids.end(), names.begin(), names.end());
      out.push_back({kind, ids, "cycle in " + lname + " runs through several child loops"});
    }
  }

  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline LoopIdx innermost_loop(const FlowchartProgram& p, ArcIdx a) {
  if (a < 0 || a >= static_cast<int>(p.arcs.size()))
    throw std::out_of_range("unknown arc index " + std::to_string(a));
  return loop_tree(p).owner[a];
}

inline std::string innermost_loop(const FlowchartProgram& p, const std::string& arc_id) {
  auto a = p.find_arc(arc_id);
  if (!a) throw std::out_of_range("unknown arc " + arc_id);
  return p.loop_name(innermost_loop(p, *a));
}

class InvalidProgram : public std::runtime_error {
 public:
  explicit InvalidProgram(std::vector<Violation> v)
      : std::runtime_error(describe(v)), violations(std::move(v)) {}
  std::vector<Violation> violations;

 private:
  static std::string describe(const std::vector<Violation>& v) {
    std::string s = "invalid program:";
    for (auto& x : v) s += std::string(" [") + to_string(x.kind) + "] " + x.message + ";";
    return s;
  }
};

inline void require_valid(const FlowchartProgram& p) {
  auto v = validate_program(p);
  if (!v.empty()) throw InvalidProgram(std::move(v));
}

}  // namespace fcgrow
