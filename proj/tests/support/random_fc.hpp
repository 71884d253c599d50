#pragma once

// Random valid flowcharts: a chain S, v1..vk, T with random forward arcs, and
// up to two loops, each an interval of the chain closed by a check back arc.
// The second loop nests inside the first or sits on a disjoint interval.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fcgrow/fc_model.hpp"
#include "random_lare.hpp"

namespace fcgrow::testing {

struct FcGenOptions {
  int max_internal = 4;  // nodes besides entry and exit
  int max_vars = 4;
  int max_loops = 2;
  double p_forward = 0.35;
  bool mul = true;
};

namespace detail_fc {

struct Interval {
  int lo, hi;
  VarIdx bound;
  bool contains(int v) const { return lo <= v && v <= hi; }
};

}  // namespace detail_fc

// Throws InvalidProgram if the construction is wrong, i.e. on a generator bug.
inline FlowchartProgram random_valid_fc(Rng& rng, const FcGenOptions& o = {}) {
  using detail_fc::Interval;
  const int n = uniform(rng, 1, o.max_vars);
  const int k = uniform(rng, 1, o.max_internal);
  const int loops = uniform(rng, 0, std::min(o.max_loops, 2));

  // Node 0 is S, 1..k internal, k+1 is T.
  std::vector<Interval> iv;
  int parent_of_second = -1;
  if (loops >= 1) {
    int lo = uniform(rng, 1, k), hi = uniform(rng, lo, k);
    iv.push_back({lo, hi, uniform(rng, 1, n)});
  }
  if (loops == 2) {
    const Interval& a = iv[0];
    if (coin(rng, 0.5)) {
      int lo = uniform(rng, a.lo, a.hi), hi = uniform(rng, lo, a.hi);
      iv.push_back({lo, hi, uniform(rng, 1, n)});
      parent_of_second = 0;
    } else {
      std::vector<std::pair<int, int>> free;
      for (int lo = 1; lo <= k; ++lo)
        for (int hi = lo; hi <= k; ++hi)
          if (hi < a.lo || lo > a.hi) free.push_back({lo, hi});
      if (!free.empty()) {
        auto [lo, hi] = free[uniform(rng, 0, static_cast<int>(free.size()) - 1)];
        iv.push_back({lo, hi, uniform(rng, 1, n)});
      }
    }
  }

  auto name = [&](int v) {
    return v == 0 ? std::string("S") : v == k + 1 ? std::string("T") : "v" + std::to_string(v);
  };
  // Loops whose interval holds both endpoints of an arc, innermost last.
  auto enclosing = [&](int u, int w) {
    std::vector<int> out;
    for (int l = 0; l < static_cast<int>(iv.size()); ++l)
      if (iv[l].contains(u) && iv[l].contains(w)) out.push_back(l);
    return out;
  };
  auto frozen_for = [&](const std::vector<int>& ls) {
    std::set<VarIdx> f;
    for (int l : ls) f.insert(iv[l].bound);
    return f;
  };

  FlowchartProgram p;
  p.n = n;
  p.node("S");
  for (int v = 1; v <= k; ++v) p.node(name(v));
  p.node("T");
  p.entries = {0};
  p.exits = {k + 1};
  std::vector<std::vector<std::string>> members(iv.size()), cuts(iv.size());
  int next = 0;
  GenOptions g;
  g.mul = o.mul;
  // Forward arcs go to the innermost enclosing loop; ancestors inherit them.
  // Back arcs are cut arcs of the loop that adds them.
  auto add = [&](int u, int w, std::optional<Instr> fixed, int cut_of) {
    auto ls = enclosing(u, w);
    Instr ins = fixed ? *fixed : random_instr(rng, n, frozen_for(ls), g);
    if (!fixed && coin(rng, 0.1)) ins = Instr::check();
    std::string id = "a" + std::to_string(next++);
    p.add_arc(id, name(u), name(w), ins);
    if (cut_of >= 0) {
      members[cut_of].push_back(id);
      cuts[cut_of].push_back(id);
    } else if (!ls.empty()) {
      members[ls.back()].push_back(id);
    }
  };

  // Spine keeps every node on an entry-exit path.
  for (int v = 0; v <= k; ++v) add(v, v + 1, std::nullopt, -1);
  for (int u = 0; u <= k; ++u)
    for (int w = u + 1; w <= k + 1; ++w)
      if (w != u + 1 && coin(rng, o.p_forward)) add(u, w, std::nullopt, -1);
  for (int l = 0; l < static_cast<int>(iv.size()); ++l) {
    add(iv[l].hi, iv[l].lo, Instr::check(), l);
    if (iv[l].hi > iv[l].lo && coin(rng, 0.3)) {
      int a = uniform(rng, iv[l].lo + 1, iv[l].hi);
      add(a, uniform(rng, iv[l].lo, a - 1), Instr::check(), l);
    }
  }
  for (int l = 0; l < static_cast<int>(iv.size()); ++l) {
    LoopIdx parent = (l == 1 && parent_of_second == 0) ? 0 : kRoot;
    p.add_loop("L" + std::to_string(l + 1), parent, iv[l].bound, members[l], cuts[l]);
  }
  require_valid(p);
  return p;
}

}  // namespace fcgrow::testing
