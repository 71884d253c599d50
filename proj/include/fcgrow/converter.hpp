#pragma once

#include <algorithm>
#include <concepts>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "deps.hpp"
#include "fc_model.hpp"
#include "graph_util.hpp"
#include "lare.hpp"

namespace fcgrow {

template <class A>
concept LabelAlgebra = requires(A& alg, const typename A::Label& x, Instr i, VarIdx l) {
  { alg.lift(i) } -> std::same_as<typename A::Label>;
  { alg.check() } -> std::same_as<typename A::Label>;
  { alg.eps() } -> std::same_as<typename A::Label>;
  { alg.alt(x, x) } -> std::same_as<typename A::Label>;
  { alg.cat(x, x) } -> std::same_as<typename A::Label>;
  { alg.star(x) } -> std::same_as<typename A::Label>;
  { alg.bracket(l, x) } -> std::same_as<typename A::Label>;
  { alg.describe(x) } -> std::convertible_to<std::string>;
};

class SizeBudgetExceeded : public std::runtime_error {
 public:
  SizeBudgetExceeded(std::size_t size, std::size_t budget)
      : std::runtime_error("explicit expression reached " + std::to_string(size) +
                           " nodes, over the budget of " + std::to_string(budget) +
                           "; the fused analysis avoids building it"),
        size(size),
        budget(budget) {}
  std::size_t size;
  std::size_t budget;
};

class StarAtRoot : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Labels are LARE syntax trees.
struct ExplicitAlgebra {
  using Label = Lare;
  std::size_t budget = 100000;

  Label guard(Label e) const {
    if (e->size > budget) throw SizeBudgetExceeded(e->size, budget);
    return e;
  }
  Label lift(Instr i) const { return lare::atom(i); }
  Label check() const { return lare::check(); }
  Label eps() const { return lare::eps(); }
  Label alt(const Label& a, const Label& b) const { return guard(lare::alt(a, b)); }
  Label cat(const Label& a, const Label& b) const {
    if (a->kind == LareKind::Eps) return b;
    if (b->kind == LareKind::Eps) return a;
    return guard(lare::cat(a, b));
  }
  Label star(const Label& a) const { return guard(lare::star(a)); }
  Label bracket(VarIdx l, const Label& a) const { return guard(lare::bracket(l, a)); }
  std::string describe(const Label& a) const { return print_lare(a); }
};

// Labels are dependency sets: the analysis fused into the conversion.
struct FusedAlgebra {
  using Label = DepSet;
  Universe universe;

  Label lift(Instr i) const { return atomic_deps(i, universe); }
  Label check() const { return identity_set(universe.n()); }
  Label eps() const { return identity_set(universe.n()); }
  Label alt(const Label& a, const Label& b) const { return set_union(a, b); }
  Label cat(const Label& a, const Label& b) const { return compose_sets(a, b); }
  Label star(const Label& a) const { return star_abs(a); }
  Label bracket(VarIdx l, const Label& a) const { return bracket_subst(a, l); }
  std::string describe(const Label& a) const {
    std::string s = std::to_string(a.size()) + " deps";
    for (auto d : a)
      if (d.is_unary() && d.src() != d.dst()) s += "\\n" + to_string(d);
    return s;
  }
};

// A graph whose arcs carry labels. Each arc remembers the loop that owns it so
// that a loop's arcs can be told apart from the surrounding ones.
template <class L>
struct LabeledGraph {
  struct Node {
    std::string name;
    bool alive = true;
  };
  struct Edge {
    int src;
    int dst;
    L label;
    LoopIdx owner = kRoot;
    bool alive = true;
  };

  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<int> entries;
  std::vector<int> exits;

  int add_node(std::string name) {
    nodes.push_back({std::move(name), true});
    in_.emplace_back();
    out_.emplace_back();
    return static_cast<int>(nodes.size() - 1);
  }
  int add_edge(int s, int d, L label, LoopIdx owner = kRoot) {
    edges.push_back({s, d, std::move(label), owner, true});
    int id = static_cast<int>(edges.size() - 1);
    out_[s].push_back(id);
    in_[d].push_back(id);
    return id;
  }
  void kill_edge(int e) { edges[e].alive = false; }
  void kill_node(int v) {
    for (int e : in_[v]) edges[e].alive = false;
    for (int e : out_[v]) edges[e].alive = false;
    nodes[v].alive = false;
    in_[v].clear();
    out_[v].clear();
  }

  std::vector<int> in_edges(int v) const { return live(in_[v]); }
  std::vector<int> out_edges(int v) const { return live(out_[v]); }
  std::vector<int> live_edges() const {
    std::vector<int> out;
    for (std::size_t e = 0; e < edges.size(); ++e)
      if (edges[e].alive) out.push_back(static_cast<int>(e));
    return out;
  }
  std::vector<int> live_nodes() const {
    std::vector<int> out;
    for (std::size_t v = 0; v < nodes.size(); ++v)
      if (nodes[v].alive) out.push_back(static_cast<int>(v));
    return out;
  }
  // The single live arc from s to d, if there is exactly one.
  std::optional<int> find_edge(int s, int d) const {
    std::optional<int> r;
    for (int e : out_[s])
      if (edges[e].alive && edges[e].dst == d) {
        if (r) return std::nullopt;
        r = e;
      }
    return r;
  }
  std::optional<int> find_node(const std::string& name) const {
    for (std::size_t v = 0; v < nodes.size(); ++v)
      if (nodes[v].alive && nodes[v].name == name) return static_cast<int>(v);
    return std::nullopt;
  }

 private:
  std::vector<int> live(const std::vector<int>& ids) const {
    std::vector<int> out;
    for (int e : ids)
      if (edges[e].alive) out.push_back(e);
    return out;
  }
  std::vector<std::vector<int>> in_, out_;
};

// Combine live parallel arcs (same ends, same owner) with alt, in arc order.
template <LabelAlgebra A>
void merge_parallel(LabeledGraph<typename A::Label>& g, A& alg) {
  std::map<std::tuple<int, int, LoopIdx>, std::vector<int>> groups;
  for (int e : g.live_edges()) groups[{g.edges[e].src, g.edges[e].dst, g.edges[e].owner}].push_back(e);
  for (auto& [key, ids] : groups) {
    if (ids.size() < 2) continue;
    auto label = g.edges[ids[0]].label;
    for (std::size_t i = 1; i < ids.size(); ++i) label = alg.alt(label, g.edges[ids[i]].label);
    for (int e : ids) g.kill_edge(e);
    g.add_edge(std::get<0>(key), std::get<1>(key), std::move(label), std::get<2>(key));
  }
}

namespace detail {

template <LabelAlgebra A>
void merge_between(LabeledGraph<typename A::Label>& g, A& alg, int s, int d, LoopIdx owner) {
  std::vector<int> ids;
  for (int e : g.out_edges(s))
    if (g.edges[e].dst == d && g.edges[e].owner == owner) ids.push_back(e);
  if (ids.size() < 2) return;
  auto label = g.edges[ids[0]].label;
  for (std::size_t i = 1; i < ids.size(); ++i) label = alg.alt(label, g.edges[ids[i]].label);
  for (int e : ids) g.kill_edge(e);
  g.add_edge(s, d, std::move(label), owner);
}

// Eliminate v, considering only arcs owned by `scope` (v must have no others).
template <LabelAlgebra A>
void rip_node(LabeledGraph<typename A::Label>& g, int v, A& alg, LoopIdx scope, bool root_phase) {
  using L = typename A::Label;
  std::map<int, std::optional<L>> ins, outs;
  std::optional<L> self;
  auto fold = [&](std::optional<L>& acc, const L& x) { acc = acc ? alg.alt(*acc, x) : x; };
  for (int e : g.in_edges(v)) {
    auto& E = g.edges[e];
    if (E.owner != scope) throw std::logic_error("ripping a node with arcs outside the scope");
    if (E.src == v)
      fold(self, E.label);
    else
      fold(ins[E.src], E.label);
  }
  for (int e : g.out_edges(v)) {
    auto& E = g.edges[e];
    if (E.owner != scope) throw std::logic_error("ripping a node with arcs outside the scope");
    if (E.dst != v) fold(outs[E.dst], E.label);
  }
  if (self && root_phase)
    throw StarAtRoot("cycle at root level through node " + g.nodes[v].name);
  std::optional<L> starred;
  if (self) starred = alg.star(*self);
  g.kill_node(v);
  for (auto& [u, a] : ins)
    for (auto& [w, b] : outs) {
      L label = starred ? alg.cat(*a, alg.cat(*starred, *b)) : alg.cat(*a, *b);
      g.add_edge(u, w, std::move(label), scope);
      merge_between(g, alg, u, w, scope);
    }
}

}  // namespace detail

template <LabelAlgebra A>
void rip_one(LabeledGraph<typename A::Label>& g, int v, A& alg) {
  if (std::find(g.entries.begin(), g.entries.end(), v) != g.entries.end() ||
      std::find(g.exits.begin(), g.exits.end(), v) != g.exits.end())
    throw std::invalid_argument("cannot rip entry or exit node " + g.nodes[v].name);
  if (g.in_edges(v).empty() && g.out_edges(v).empty())
    throw std::invalid_argument("cannot rip isolated node " + g.nodes[v].name);
  merge_parallel(g, alg);
  detail::rip_node(g, v, alg, kRoot, false);
}

// Rip every node that is not an entry or exit, then wrap each remaining arc
// in a bracket for `bound`.
template <LabelAlgebra A>
void contract_simple(LabeledGraph<typename A::Label>& g, VarIdx bound, A& alg) {
  merge_parallel(g, alg);
  for (int v : g.live_nodes()) {
    if (std::find(g.entries.begin(), g.entries.end(), v) != g.entries.end() ||
        std::find(g.exits.begin(), g.exits.end(), v) != g.exits.end())
      continue;
    detail::rip_node(g, v, alg, kRoot, false);
  }
  merge_parallel(g, alg);
  for (int e : g.live_edges()) {
    auto label = alg.bracket(bound, g.edges[e].label);
    g.edges[e].label = std::move(label);
  }
}

struct ConvertOptions {
  // Rip internal nodes in a seeded random order instead of ascending ids.
  std::optional<std::uint64_t> rip_seed;
  // Receives a DOT rendering of the working graph after each stage.
  std::function<void(const std::string& stage, const std::string& dot)> on_stage;
};

struct ConversionStats {
  std::size_t original_nodes = 0;
  std::size_t created_nodes = 0;
  std::size_t boundary_total = 0;  // sum over loops of boundary nodes at contraction
};

template <class L>
struct Conversion {
  std::map<std::pair<std::string, std::string>, L> labels;  // (entry, exit) -> label
  std::vector<std::string> warnings;
  ConversionStats stats;
};

template <class L, class Describe>
std::string graph_to_dot(const LabeledGraph<L>& g, const FlowchartProgram& p, Describe describe) {
  auto esc = [](const std::string& s) {
    std::string o;
    for (char c : s) {
      if (c == '"') o += "\\\"";
      else o += c;
    }
    return o;
  };
  std::ostringstream os;
  os << "digraph G {\n  rankdir=LR;\n";
  for (int v : g.live_nodes()) os << "  n" << v << " [label=\"" << esc(g.nodes[v].name) << "\"];\n";
  for (int e : g.live_edges()) {
    auto& E = g.edges[e];
    os << "  n" << E.src << " -> n" << E.dst << " [label=\"" << esc(describe(E.label));
    if (E.owner != kRoot) os << "\\n(" << esc(p.loops[E.owner].id) << ")";
    os << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

namespace detail {

template <LabelAlgebra A>
class Converter {
 public:
  using L = typename A::Label;

  Converter(const FlowchartProgram& p, A& alg, const ConvertOptions& opt)
      : p_(p), alg_(alg), opt_(opt), tree_(loop_tree(p)) {}

  Conversion<L> run() {
    require_valid(p_);
    warn_unreachable();
    build();
    stage("initial");
    for (LoopIdx l : tree_.postorder) {
      contract_loop(l);
      stage("after loop " + p_.loops[l].id);
    }
    contract_root();
    stage("final");
    std::size_t bound = 4 * out_.stats.boundary_total;
    if (out_.stats.created_nodes > bound)
      throw std::logic_error("node growth exceeded four copies per boundary node");
    return std::move(out_);
  }

 private:
  void stage(const std::string& name) {
    if (opt_.on_stage)
      opt_.on_stage(name, graph_to_dot(g_, p_, [&](const L& x) { return alg_.describe(x); }));
  }

  void warn_unreachable() {
    int nn = static_cast<int>(p_.nodes.size());
    std::vector<std::pair<int, int>> fwd, bwd;
    for (auto& a : p_.arcs) {
      fwd.push_back({a.src, a.dst});
      bwd.push_back({a.dst, a.src});
    }
    auto from_entry = graph_reach(nn, fwd, p_.entries);
    auto to_exit = graph_reach(nn, bwd, p_.exits);
    std::vector<std::string> dead;
    for (auto& a : p_.arcs)
      if (!from_entry[a.src] || !to_exit[a.dst]) dead.push_back(a.id);
    if (!dead.empty()) {
      std::string s = "arcs on no entry-to-exit path:";
      for (auto& d : dead) s += " " + d;
      out_.warnings.push_back(s);
    }
  }
  static std::vector<char> graph_reach(int n, const std::vector<std::pair<int, int>>& e,
                                       const std::vector<int>& src) {
    return reachable(n, e, src);
  }

  void build() {
    out_.stats.original_nodes = p_.nodes.size();
    for (auto& name : p_.nodes) g_.add_node(name);
    for (std::size_t a = 0; a < p_.arcs.size(); ++a) {
      auto& arc = p_.arcs[a];
      g_.add_edge(arc.src, arc.dst, alg_.lift(arc.instr), tree_.owner[a]);
    }
    // Virtual endpoints keep entries and exits distinct from loop-internal nodes.
    for (auto v : p_.entries) {
      int s = g_.add_node(p_.nodes[v] + ".start");
      g_.add_edge(s, v, alg_.eps(), kRoot);
      starts_.push_back({s, v});
    }
    for (auto v : p_.exits) {
      int t = g_.add_node(p_.nodes[v] + ".stop");
      g_.add_edge(v, t, alg_.eps(), kRoot);
      stops_.push_back({t, v});
    }
  }

  int new_node(const std::string& name) {
    ++out_.stats.created_nodes;
    return g_.add_node(name);
  }

  void order_nodes(std::vector<int>& vs) {
    std::sort(vs.begin(), vs.end());
    if (opt_.rip_seed) {
      std::mt19937_64 rng(*opt_.rip_seed + salt_++);
      std::shuffle(vs.begin(), vs.end(), rng);
    }
  }

  struct Split {
    std::optional<int> bar, in, out, loop;
  };

  Split split(int v, LoopIdx l) {
    bool loop_in = false, loop_out = false, other_in = false, other_out = false;
    auto ins = g_.in_edges(v), outs = g_.out_edges(v);
    for (int e : ins) (g_.edges[e].owner == l ? loop_in : other_in) = true;
    for (int e : outs) (g_.edges[e].owner == l ? loop_out : other_out) = true;
    const std::string base = g_.nodes[v].name;
    const std::string& lid = p_.loops[l].id;
    Split s;
    if (other_in && other_out) s.bar = new_node(base + ".not_" + lid);
    if (other_in && loop_out) s.in = new_node(base + ".in_" + lid);
    if (loop_in && other_out) s.out = new_node(base + ".out_" + lid);
    if (loop_in && loop_out) s.loop = new_node(base + ".within_" + lid);

    std::vector<int> incident = ins;
    incident.insert(incident.end(), outs.begin(), outs.end());
    std::sort(incident.begin(), incident.end());
    incident.erase(std::unique(incident.begin(), incident.end()), incident.end());
    for (int e : incident) {
      Edge copy = g_.edges[e];
      bool inside = copy.owner == l;
      std::vector<int> srcs, dsts;
      auto push = [](std::vector<int>& to, std::optional<int> x) {
        if (x) to.push_back(*x);
      };
      if (copy.src == v) {
        if (inside) {
          push(srcs, s.in);
          push(srcs, s.loop);
        } else {
          push(srcs, s.bar);
          push(srcs, s.out);
        }
      } else {
        srcs.push_back(copy.src);
      }
      if (copy.dst == v) {
        if (inside) {
          push(dsts, s.out);
          push(dsts, s.loop);
        } else {
          push(dsts, s.bar);
          push(dsts, s.in);
        }
      } else {
        dsts.push_back(copy.dst);
      }
      g_.kill_edge(e);
      for (int a : srcs)
        for (int b : dsts) g_.add_edge(a, b, copy.label, copy.owner);
    }
    g_.kill_node(v);
    return s;
  }

  void contract_loop(LoopIdx l) {
    std::set<int> touched;
    bool any = false;
    for (int e : g_.live_edges())
      if (g_.edges[e].owner == l) {
        any = true;
        touched.insert(g_.edges[e].src);
        touched.insert(g_.edges[e].dst);
      }
    if (!any) {
      out_.warnings.push_back("loop " + p_.loops[l].id + " has no arcs left and is dropped");
      return;
    }
    std::vector<int> internal, boundary;
    for (int v : touched) {
      bool outside = false;
      for (int e : g_.in_edges(v)) outside |= g_.edges[e].owner != l;
      for (int e : g_.out_edges(v)) outside |= g_.edges[e].owner != l;
      (outside ? boundary : internal).push_back(v);
    }
    out_.stats.boundary_total += boundary.size();

    std::vector<int> rip = internal;
    for (int v : boundary) {
      Split s = split(v, l);
      if (s.loop) rip.push_back(*s.loop);
    }
    order_nodes(rip);
    for (int v : rip) {
      if (!g_.nodes[v].alive) continue;
      detail::rip_node(g_, v, alg_, l, false);
    }
    bool produced = false;
    LoopIdx parent = tree_.parent[l];
    std::set<std::pair<int, int>> ends;
    for (int e : g_.live_edges())
      if (g_.edges[e].owner == l) ends.insert({g_.edges[e].src, g_.edges[e].dst});
    for (auto [a, b] : ends) detail::merge_between(g_, alg_, a, b, l);
    for (int e : g_.live_edges()) {
      auto& E = g_.edges[e];
      if (E.owner != l) continue;
      E.label = alg_.bracket(p_.loops[l].bound, E.label);
      E.owner = parent;
      produced = true;
    }
    if (!produced)
      out_.warnings.push_back("loop " + p_.loops[l].id + " admits no complete run and is dropped");
  }

  void contract_root() {
    std::set<int> keep;
    for (auto [s, v] : starts_) keep.insert(s);
    for (auto [t, v] : stops_) keep.insert(t);
    std::vector<int> rip;
    for (int v : g_.live_nodes())
      if (!keep.count(v)) rip.push_back(v);
    order_nodes(rip);
    for (int v : rip)
      if (g_.nodes[v].alive) detail::rip_node(g_, v, alg_, kRoot, true);
    merge_parallel(g_, alg_);
    for (auto [s, pv] : starts_)
      for (auto [t, qv] : stops_) {
        std::optional<L> label;
        for (int e : g_.out_edges(s))
          if (g_.edges[e].dst == t) label = label ? alg_.alt(*label, g_.edges[e].label) : g_.edges[e].label;
        if (label) out_.labels.emplace(std::make_pair(p_.nodes[pv], p_.nodes[qv]), std::move(*label));
      }
  }

  using Edge = typename LabeledGraph<L>::Edge;

  const FlowchartProgram& p_;
  A& alg_;
  const ConvertOptions& opt_;
  LoopTree tree_;
  LabeledGraph<L> g_;
  std::vector<std::pair<int, NodeIdx>> starts_, stops_;
  Conversion<L> out_;
  std::uint64_t salt_ = 0;
};

}  // namespace detail

template <LabelAlgebra A>
Conversion<typename A::Label> convert_fc(const FlowchartProgram& p, A& alg,
                                         const ConvertOptions& opt = {}) {
  return detail::Converter<A>(p, alg, opt).run();
}

inline Universe universe_of(const FlowchartProgram& p) {
  bool huge = std::any_of(p.arcs.begin(), p.arcs.end(),
                          [](const Arc& a) { return a.instr.op == Op::Huge; });
  return Universe{p.n, huge};
}

inline Conversion<Lare> convert_fc_explicit(const FlowchartProgram& p,
                                            std::size_t budget = 100000,
                                            const ConvertOptions& opt = {}) {
  ExplicitAlgebra alg{budget};
  return convert_fc(p, alg, opt);
}

struct FusedAnalysis {
  Universe universe;
  Conversion<DepSet> conversion;
  std::map<std::pair<std::string, std::string>, GrowthReport> per_pair;
  GrowthReport report;  // worst case over pairs
};

inline FusedAnalysis analyze_fc_fused(const FlowchartProgram& p, const ConvertOptions& opt = {}) {
  FusedAlgebra alg{universe_of(p)};
  FusedAnalysis r{alg.universe, convert_fc(p, alg, opt), {}, {}};
  r.report = classify(identity_set(alg.universe.n()), alg.universe);
  for (auto& [pair, deps] : r.conversion.labels) {
    auto g = classify(deps, alg.universe);
    r.report = worst_of(r.report, g);
    r.per_pair.emplace(pair, std::move(g));
  }
  return r;
}

}  // namespace fcgrow
