#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "fc_model.hpp"
#include "lare.hpp"
#include "magnitude.hpp"

namespace fcgrow {

using BigInt = boost::multiprecision::cpp_int;
using State = std::vector<BigInt>;  // x1..xn at positions 0..n-1

inline State uniform_state(int n, std::uint64_t v) { return State(n, BigInt(v)); }

inline std::string to_string(const State& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += s[i].str();
  }
  return out + ")";
}

inline Magnitude to_magnitude(const BigInt& v) {
  if (v < BigInt(Magnitude::kExactLimit)) return Magnitude::of(v.convert_to<std::uint64_t>());
  auto msb = static_cast<long>(boost::multiprecision::msb(v));
  BigInt top = v >> (msb - 52);
  return Magnitude::from_log2(std::log2(top.convert_to<double>()) + double(msb - 52));
}

struct EnumCaps {
  std::size_t max_len = 64;       // steps per trace
  std::size_t max_branch = 64;    // values tried per weak assignment
  std::uint64_t huge = 8;         // value assigned by `**`
  std::size_t budget = 1000000;   // total steps explored
  std::size_t max_rounds = 4096;  // star unrollings in the magnitude evaluator
  std::optional<std::uint64_t> seed;  // sample weak choices instead of spacing them
};

// Outcomes of one instruction: either the base state, or the base state with
// x_target set to each value in lo..hi.
struct StepSet {
  State base;
  std::optional<VarIdx> target;
  BigInt lo, hi;

  BigInt size() const { return target ? BigInt(hi - lo + 1) : BigInt(1); }
  State at(const BigInt& k) const {
    State s = base;
    if (target) s[*target - 1] = lo + k;
    return s;
  }
  std::vector<State> all() const {
    std::vector<State> out;
    for (BigInt k = 0; k < size(); ++k) out.push_back(at(k));
    return out;
  }
};

inline StepSet step(const State& s, const Instr& i, std::uint64_t huge_value = 8) {
  check_operands(i, static_cast<int>(s.size()));
  StepSet r{s, std::nullopt, 0, 0};
  auto x = [&](VarIdx v) -> const BigInt& { return s[v - 1]; };
  BigInt v;
  switch (i.op) {
    case Op::Skip:
    case Op::Check: return r;
    case Op::Copy:
    case Op::WeakCopy: v = x(i.s); break;
    case Op::Add:
    case Op::WeakAdd: v = x(i.s) + x(i.t); break;
    case Op::Mul:
    case Op::WeakMul: v = x(i.s) * x(i.t); break;
    case Op::Huge: v = huge_value; break;
  }
  r.target = i.r;
  r.hi = v;
  r.lo = i.is_weak() ? BigInt(0) : v;
  return r;
}

struct TraceStep {
  Instr instr;
  State after;
};

struct Trace {
  State init;
  std::vector<TraceStep> steps;
  std::size_t checks = 0;
  std::vector<NodeIdx> path;  // flowchart traces only
  std::vector<ArcIdx> arcs;   // flowchart traces only

  const State& final_state() const { return steps.empty() ? init : steps.back().after; }
  const State& before(std::size_t k) const { return k == 0 ? init : steps[k - 1].after; }
};

// The instruction string with ✓ removed.
inline std::string erased_word(const Trace& t) {
  std::string w;
  for (auto& s : t.steps) {
    if (s.instr.is_check()) continue;
    if (!w.empty()) w += " ";
    w += to_string(s.instr);
  }
  return w;
}

inline std::string to_string(const Trace& t) {
  std::string out = to_string(t.init);
  for (auto& s : t.steps) out += " -[" + to_string(s.instr) + "]-> " + to_string(s.after);
  return out;
}

struct EnumStats {
  std::size_t emitted = 0;
  std::size_t explored = 0;
  bool truncated = false;
};

// Returning false from the visitor stops the enumeration.
using TraceVisitor = std::function<bool(const Trace&)>;

namespace detail {

class BranchPicker {
 public:
  BranchPicker(const EnumCaps& caps) : caps_(caps) {
    if (caps.seed) rng_.emplace(*caps.seed);
  }

  // Indices into a StepSet to explore; sets `cut` if some were skipped.
  std::vector<BigInt> pick(const StepSet& set, bool& cut) {
    BigInt n = set.size();
    std::size_t m = std::max<std::size_t>(caps_.max_branch, 1);
    std::vector<BigInt> out;
    if (n <= m) {
      for (BigInt k = n - 1; k >= 0; --k) out.push_back(k);  // largest first
      return out;
    }
    cut = true;
    out.push_back(n - 1);
    if (m == 1) return out;
    out.push_back(0);
    if (rng_) {
      std::uniform_int_distribution<std::uint64_t> d(0, std::numeric_limits<std::uint64_t>::max());
      while (out.size() < m) out.push_back(BigInt(d(*rng_)) % n);
    } else {
      for (std::size_t k = 1; out.size() < m; ++k) out.push_back((n - 1) * k / (m - 1));
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  const EnumCaps& caps_;
  std::optional<std::mt19937_64> rng_;
};

class FcEnumerator {
 public:
  FcEnumerator(const FlowchartProgram& p, const EnumCaps& caps, const TraceVisitor& visit)
      : p_(p), caps_(caps), visit_(visit), tree_(loop_tree(p)), picker_(caps) {
    out_.resize(p.nodes.size());
    for (std::size_t a = 0; a < p.arcs.size(); ++a) out_[p.arcs[a].src].push_back(static_cast<ArcIdx>(a));
    root_used_.assign(p.arcs.size(), 0);
  }

  EnumStats run(const State& init) {
    for (NodeIdx e : p_.entries) {
      trace_ = Trace{init, {}, 0, {e}, {}};
      runs_.clear();
      if (!dfs(e)) break;
    }
    return stats_;
  }

 private:
  struct Run {
    LoopIdx loop;
    BigInt left;
  };

  bool dfs(NodeIdx v) {
    if (std::find(p_.exits.begin(), p_.exits.end(), v) != p_.exits.end()) {
      ++stats_.emitted;
      if (!visit_(trace_)) return false;
    }
    for (ArcIdx a : out_[v]) {
      if (trace_.steps.size() >= caps_.max_len) {
        stats_.truncated = true;
        return true;
      }
      if (!take(a)) return false;
    }
    return true;
  }

  bool take(ArcIdx a) {
    const Arc& arc = p_.arcs[a];
    const State& cur = trace_.final_state();

    // Align the run stack with the loops containing `a`, outermost first.
    auto chain = tree_.chain(a);
    std::reverse(chain.begin(), chain.end());
    std::vector<Run> saved = runs_;
    std::size_t keep = 0;
    while (keep < runs_.size() && keep < chain.size() && runs_[keep].loop == chain[keep]) ++keep;
    runs_.resize(keep);
    for (std::size_t k = keep; k < chain.size(); ++k)
      runs_.push_back({chain[k], cur[p_.loops[chain[k]].bound - 1]});

    LoopIdx owner = tree_.owner[a];
    bool ok = true;
    if (owner == kRoot) {
      ok = !root_used_[a];
    } else if (arc.instr.is_check()) {
      Run& r = runs_.back();
      if (r.left == 0)
        ok = false;
      else
        --r.left;
    }
    bool go_on = true;
    if (ok) {
      if (owner == kRoot) root_used_[a] = 1;
      StepSet set = step(cur, arc.instr, caps_.huge);
      bool cut = false;
      auto picks = picker_.pick(set, cut);
      if (cut) stats_.truncated = true;
      trace_.arcs.push_back(a);
      trace_.path.push_back(arc.dst);
      if (arc.instr.is_check()) ++trace_.checks;
      for (auto& k : picks) {
        if (++stats_.explored > caps_.budget) {
          stats_.truncated = true;
          go_on = false;
          break;
        }
        trace_.steps.push_back({arc.instr, set.at(k)});
        go_on = dfs(arc.dst);
        trace_.steps.pop_back();
        if (!go_on) break;
      }
      if (arc.instr.is_check()) --trace_.checks;
      trace_.arcs.pop_back();
      trace_.path.pop_back();
      if (owner == kRoot) root_used_[a] = 0;
    }
    runs_ = std::move(saved);
    return go_on;
  }

  const FlowchartProgram& p_;
  const EnumCaps& caps_;
  const TraceVisitor& visit_;
  LoopTree tree_;
  BranchPicker picker_;
  std::vector<std::vector<ArcIdx>> out_;
  std::vector<char> root_used_;
  std::vector<Run> runs_;
  Trace trace_;
  EnumStats stats_;
};

}  // namespace detail

// Complete properly bounded traces of `p` from `init`, depth first.
inline EnumStats fc_enumerate(const FlowchartProgram& p, const State& init, const EnumCaps& caps,
                              const TraceVisitor& visit) {
  require_valid(p);
  if (static_cast<int>(init.size()) != p.n)
    throw std::invalid_argument("initial state has " + std::to_string(init.size()) +
                                " components, program has " + std::to_string(p.n));
  return detail::FcEnumerator(p, caps, visit).run(init);
}

inline std::pair<std::vector<Trace>, EnumStats> fc_traces(const FlowchartProgram& p, const State& init,
                                                          const EnumCaps& caps = {}) {
  std::vector<Trace> out;
  auto st = fc_enumerate(p, init, caps, [&](const Trace& t) {
    out.push_back(t);
    return true;
  });
  return {std::move(out), st};
}

// Independent check of the properly bounded conditions over every contiguous
// subsequence of a flowchart trace. Returns a reason on failure.
inline std::optional<std::string> properly_bounded_violation(const FlowchartProgram& p, const Trace& t) {
  LoopTree tree = loop_tree(p);
  const std::size_t m = t.arcs.size();
  auto lca = [&](LoopIdx a, LoopIdx b) {
    while (!tree.is_ancestor(a, b)) a = tree.parent[a];
    return a;
  };
  for (std::size_t i = 0; i < m; ++i) {
    std::map<LoopIdx, BigInt> checks;
    std::vector<int> root_seen(p.arcs.size(), 0);
    bool root_dup = false;
    LoopIdx L = tree.owner[t.arcs[i]];
    for (std::size_t j = i; j < m; ++j) {
      ArcIdx a = t.arcs[j];
      LoopIdx o = tree.owner[a];
      L = lca(L, o);
      if (p.arcs[a].instr.is_check() && o != kRoot) ++checks[o];
      if (o == kRoot && ++root_seen[a] > 1) root_dup = true;
      if (L == kRoot) {
        if (root_dup)
          return "root arc repeated in steps " + std::to_string(i) + ".." + std::to_string(j);
      } else {
        const BigInt& bound = t.before(i)[p.loops[L].bound - 1];
        auto it = checks.find(L);
        if (it != checks.end() && it->second > bound)
          return "loop " + p.loops[L].id + " checked " + it->second.str() + " times in steps " +
                 std::to_string(i) + ".." + std::to_string(j) + " with bound " + bound.str();
      }
    }
  }
  return std::nullopt;
}

namespace detail {

class LareEnumerator {
 public:
  LareEnumerator(const EnumCaps& caps, const TraceVisitor& visit)
      : caps_(caps), visit_(visit), picker_(caps) {}

  EnumStats run(const Lare& e, const State& init) {
    trace_ = Trace{init, {}, 0, {}, {}};
    depth_.clear();
    state_ = init;
    go(e, init, 0, std::nullopt, 0, [&](const State&, const BigInt&) { return emit(); });
    return stats_;
  }

 private:
  using Cont = std::function<bool(const State&, const BigInt&)>;

  bool emit() {
    Trace out{trace_.init, {}, 0, {}, {}};
    for (std::size_t k = 0; k < trace_.steps.size(); ++k) {
      if (trace_.steps[k].instr.is_check()) {
        if (depth_[k] > 0) continue;
        ++out.checks;
      }
      out.steps.push_back(trace_.steps[k]);
    }
    ++stats_.emitted;
    return visit_(out);
  }

  bool push(const TraceStep& s, int depth) {
    if (trace_.steps.size() >= caps_.max_len || ++stats_.explored > caps_.budget) {
      stats_.truncated = true;
      return false;
    }
    trace_.steps.push_back(s);
    depth_.push_back(depth);
    return true;
  }
  void pop() {
    trace_.steps.pop_back();
    depth_.pop_back();
  }

  // Returns false only when the visitor asked to stop.
  bool go(const Lare& e, const State& s, const BigInt& used, const std::optional<BigInt>& limit,
          int depth, const Cont& k) {
    switch (e->kind) {
      case LareKind::Eps: return k(s, used);
      case LareKind::Check: {
        if (limit && used + 1 > *limit) return true;
        if (!push({Instr::check(), s}, depth)) return stats_.explored <= caps_.budget;
        bool r = k(s, used + 1);
        pop();
        return r;
      }
      case LareKind::Atom: {
        StepSet set = step(s, e->instr, caps_.huge);
        bool cut = false;
        for (auto& idx : picker_.pick(set, cut)) {
          State next = set.at(idx);
          if (!push({e->instr, next}, depth)) return stats_.explored <= caps_.budget;
          bool r = k(next, used);
          pop();
          if (!r) return false;
        }
        if (cut) stats_.truncated = true;
        return true;
      }
      case LareKind::Cat:
        return go(e->left, s, used, limit, depth, [&](const State& s1, const BigInt& u1) {
          return go(e->right, s1, u1, limit, depth, k);
        });
      case LareKind::Alt:
        return go(e->left, s, used, limit, depth, k) && go(e->right, s, used, limit, depth, k);
      case LareKind::Star: {
        if (!k(s, used)) return false;
        return go(e->left, s, used, limit, depth, [&](const State& s1, const BigInt& u1) {
          if (u1 == used) return true;  // an iteration without ✓ adds nothing new
          return go(e, s1, u1, limit, depth, k);
        });
      }
      case LareKind::Bracket: {
        BigInt bound = s[e->bound - 1];
        return go(e->left, s, 0, bound, depth + 1,
                  [&](const State& s1, const BigInt&) { return k(s1, used); });
      }
    }
    return true;
  }

  const EnumCaps& caps_;
  const TraceVisitor& visit_;
  BranchPicker picker_;
  Trace trace_;
  std::vector<int> depth_;
  State state_;
  EnumStats stats_;
};

}  // namespace detail

// Traces of a well-formed LARE. ✓ steps inside brackets are erased; top-level
// ✓ steps remain.
inline EnumStats lare_enumerate(const Lare& e, const State& init, const EnumCaps& caps,
                                const TraceVisitor& visit) {
  require_wf(e, static_cast<int>(init.size()));
  if (lare_max_var(e) > static_cast<int>(init.size()))
    throw std::invalid_argument("expression uses x" + std::to_string(lare_max_var(e)) +
                                " but the state has " + std::to_string(init.size()) + " components");
  return detail::LareEnumerator(caps, visit).run(e, init);
}

inline std::pair<std::vector<Trace>, EnumStats> lare_traces(const Lare& e, const State& init,
                                                            const EnumCaps& caps = {}) {
  std::vector<Trace> out;
  auto st = lare_enumerate(e, init, caps, [&](const Trace& t) {
    out.push_back(t);
    return true;
  });
  return {std::move(out), st};
}

using EndPair = std::pair<std::string, std::string>;
using Outcome = std::pair<std::string, State>;  // (✓-erased word, final state)

enum class EquivVerdict { Equal, Different, Truncated };

inline const char* to_string(EquivVerdict v) {
  switch (v) {
    case EquivVerdict::Equal: return "Equal";
    case EquivVerdict::Different: return "Different";
    case EquivVerdict::Truncated: return "Truncated";
  }
  return "?";
}

struct EquivResult {
  EquivVerdict verdict = EquivVerdict::Equal;
  EndPair pair;
  std::string word;       // witness word on Different
  State final_state;
  bool only_in_fc = false;

  explicit operator bool() const { return verdict == EquivVerdict::Equal; }
};

inline std::map<EndPair, std::set<Outcome>> fc_outcomes(const FlowchartProgram& p, const State& init,
                                                        const EnumCaps& caps, bool& truncated) {
  std::map<EndPair, std::set<Outcome>> out;
  auto st = fc_enumerate(p, init, caps, [&](const Trace& t) {
    EndPair pr{p.nodes[t.path.front()], p.nodes[t.path.back()]};
    out[pr].insert({erased_word(t), t.final_state()});
    return true;
  });
  truncated = truncated || st.truncated;
  return out;
}

inline std::set<Outcome> lare_outcomes(const Lare& e, const State& init, const EnumCaps& caps,
                                       bool& truncated) {
  std::set<Outcome> out;
  auto st = lare_enumerate(e, init, caps, [&](const Trace& t) {
    out.insert({erased_word(t), t.final_state()});
    return true;
  });
  truncated = truncated || st.truncated;
  return out;
}

// Compares the outcome sets of `p` and of one expression per (entry, exit).
// Pairs absent from `exprs` are treated as the empty language.
inline EquivResult equiv_traces(const FlowchartProgram& p, const std::map<EndPair, Lare>& exprs,
                                const State& init, const EnumCaps& caps = {}) {
  bool truncated = false;
  auto fc = fc_outcomes(p, init, caps, truncated);
  std::map<EndPair, std::set<Outcome>> lr;
  for (auto& [pr, e] : exprs) lr[pr] = lare_outcomes(e, init, caps, truncated);
  EquivResult r;
  if (truncated) {
    r.verdict = EquivVerdict::Truncated;
    return r;
  }
  std::set<EndPair> pairs;
  for (auto& [k, v] : fc) pairs.insert(k);
  for (auto& [k, v] : lr) pairs.insert(k);
  for (auto& pr : pairs) {
    auto& a = fc[pr];
    auto& b = lr[pr];
    if (a == b) continue;
    r.verdict = EquivVerdict::Different;
    r.pair = pr;
    std::vector<Outcome> diff;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(diff));
    r.only_in_fc = !diff.empty();
    if (diff.empty()) std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(diff));
    r.word = diff.front().first;
    r.final_state = diff.front().second;
    return r;
  }
  return r;
}

struct MaxResult {
  bool found = false;  // some complete trace exists
  bool truncated = false;
  Magnitude value;
  std::vector<Instr> witness;  // ✓-erased instructions of a maximizing trace
  std::string witness_text;
};

// Largest final x_j over the complete traces of `p`.
inline MaxResult max_final(const FlowchartProgram& p, VarIdx j, const State& init, const EnumCaps& caps = {}) {
  if (j < 1 || j > p.n) throw std::out_of_range("no variable x" + std::to_string(j));
  MaxResult r;
  BigInt best = -1;
  auto st = fc_enumerate(p, init, caps, [&](const Trace& t) {
    const BigInt& v = t.final_state()[j - 1];
    if (v > best) {
      best = v;
      r.witness.clear();
      for (auto& s : t.steps)
        if (!s.instr.is_check()) r.witness.push_back(s.instr);
      r.witness_text = to_string(t);
    }
    return true;
  });
  r.truncated = st.truncated;
  r.found = best >= 0;
  if (r.found) r.value = to_magnitude(best);
  return r;
}

namespace detail {

// Worst-case evaluation of a LARE over magnitudes. Weak assignments take their
// maximal value; a frontier of mutually non-dominated (state, ✓ used) pairs
// replaces trace enumeration, which is sound because every instruction and
// every bracket bound is monotone in the state.
class MaxEvaluator {
 public:
  MaxEvaluator(const EnumCaps& caps) : caps_(caps) {}

  struct Witness {
    Instr instr;
    std::shared_ptr<const Witness> prev;
  };
  using WPtr = std::shared_ptr<const Witness>;
  struct Entry {
    std::vector<Magnitude> s;
    std::uint64_t used;
    WPtr w;
  };
  using Frontier = std::vector<Entry>;

  static constexpr std::uint64_t kUnbounded = std::numeric_limits<std::uint64_t>::max();

  bool truncated = false;

  Frontier eval(const Lare& e, Frontier f, std::uint64_t limit) {
    if (f.empty()) return f;
    if (++work_ > caps_.budget) {
      truncated = true;
      return {};
    }
    switch (e->kind) {
      case LareKind::Eps: return f;
      case LareKind::Check: {
        Frontier out;
        for (auto& x : f)
          if (limit == kUnbounded || x.used < limit) out.push_back({x.s, x.used + 1, x.w});
        return out;
      }
      case LareKind::Atom: {
        for (auto& x : f) {
          apply(e->instr, x.s);
          x.w = std::make_shared<const Witness>(Witness{e->instr, x.w});
        }
        return prune(std::move(f));
      }
      case LareKind::Cat: return eval(e->right, eval(e->left, std::move(f), limit), limit);
      case LareKind::Alt: {
        Frontier a = eval(e->left, f, limit);
        Frontier b = eval(e->right, std::move(f), limit);
        a.insert(a.end(), b.begin(), b.end());
        return prune(std::move(a));
      }
      case LareKind::Star: {
        Frontier all = prune(std::move(f));
        Frontier cur = all;
        for (std::size_t round = 0; !cur.empty(); ++round) {
          if (round >= caps_.max_rounds) {
            truncated = true;
            break;
          }
          Frontier next = eval(e->left, cur, limit);
          Frontier fresh;
          for (auto& y : next)
            if (!dominated(y, all)) fresh.push_back(y);
          fresh = prune(std::move(fresh));
          all.insert(all.end(), fresh.begin(), fresh.end());
          all = prune(std::move(all));
          cur = std::move(fresh);
        }
        return all;
      }
      case LareKind::Bracket: {
        Frontier out;
        for (auto& x : f) {
          const Magnitude& b = x.s[e->bound - 1];
          std::uint64_t inner = b.clamp(kUnbounded - 1);
          if (!b.is_exact()) truncated = true;
          Frontier r = eval(e->left, Frontier{{x.s, 0, x.w}}, inner);
          for (auto& y : r) out.push_back({std::move(y.s), x.used, std::move(y.w)});
        }
        return prune(std::move(out));
      }
    }
    return f;
  }

 private:
  void apply(const Instr& i0, std::vector<Magnitude>& s) const {
    Instr i = i0.strong();
    switch (i.op) {
      case Op::Copy: s[i.r - 1] = s[i.s - 1]; break;
      case Op::Add: s[i.r - 1] = s[i.s - 1] + s[i.t - 1]; break;
      case Op::Mul: s[i.r - 1] = s[i.s - 1] * s[i.t - 1]; break;
      case Op::Huge: s[i.r - 1] = Magnitude::of(caps_.huge); break;
      default: break;
    }
  }

  static bool covers(const Entry& a, const Entry& b) {
    if (a.used > b.used) return false;
    for (std::size_t k = 0; k < a.s.size(); ++k)
      if (!(a.s[k] >= b.s[k])) return false;
    return true;
  }
  static bool dominated(const Entry& y, const Frontier& f) {
    for (auto& x : f)
      if (covers(x, y)) return true;
    return false;
  }
  static Frontier prune(Frontier f) {
    std::vector<char> drop(f.size(), 0);
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t k = 0; k < f.size() && !drop[i]; ++k) {
        if (k == i || !covers(f[k], f[i])) continue;
        // Among equal entries keep the first.
        drop[i] = !covers(f[i], f[k]) || k < i;
      }
    Frontier out;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (!drop[i]) out.push_back(std::move(f[i]));
    return out;
  }

  const EnumCaps& caps_;
  std::size_t work_ = 0;
};

}  // namespace detail

// Largest final x_j over the traces of a well-formed LARE.
inline MaxResult max_final(const Lare& e, VarIdx j, const State& init, const EnumCaps& caps = {}) {
  int n = static_cast<int>(init.size());
  require_wf(e, n);
  if (j < 1 || j > n) throw std::out_of_range("no variable x" + std::to_string(j));
  if (lare_max_var(e) > n) throw std::invalid_argument("expression uses variables beyond the state");
  detail::MaxEvaluator ev(caps);
  std::vector<Magnitude> s;
  for (auto& v : init) s.push_back(to_magnitude(v));
  auto out = ev.eval(e, {{s, 0, nullptr}}, detail::MaxEvaluator::kUnbounded);
  MaxResult r;
  r.truncated = ev.truncated;
  const detail::MaxEvaluator::Entry* best = nullptr;
  for (auto& x : out)
    if (!best || x.s[j - 1] > best->s[j - 1]) best = &x;
  if (!best) return r;
  r.found = true;
  r.value = best->s[j - 1];
  for (auto w = best->w; w; w = w->prev) r.witness.push_back(w->instr);
  std::reverse(r.witness.begin(), r.witness.end());
  for (auto& i : r.witness) {
    if (!r.witness_text.empty()) r.witness_text += " ";
    r.witness_text += to_string(i);
  }
  return r;
}

enum class ProbeVerdict { LooksPoly, LooksExp, Inconclusive };

inline const char* to_string(ProbeVerdict v) {
  switch (v) {
    case ProbeVerdict::LooksPoly: return "LooksPoly";
    case ProbeVerdict::LooksExp: return "LooksExp";
    case ProbeVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct ProbeReport {
  VarIdx var = 0;
  std::vector<std::uint64_t> scales;
  std::vector<Magnitude> values;
  std::vector<double> log2_per_n;     // log2(v_N) / N
  std::vector<double> log_log;        // log(v_N) / log(N), N >= 2
  std::vector<double> local_exponent; // between consecutive scales
  double fitted_exponent = 0;         // least squares slope of log v against log N
  double drift = 0;                   // relative rise of the last local exponent
  ProbeVerdict verdict = ProbeVerdict::Inconclusive;
  bool truncated = false;
  std::string witness;                // maximizing trace at the largest scale
};

// Largest relative rise of the last local exponent over the earlier ones that
// still reads as polynomial.
inline constexpr double kPolyDrift = 0.10;
// Minimal ratio v_{N+1}/v_N, over the last two steps, for an exponential verdict.
inline constexpr double kExpRatio = 1.5;

inline ProbeReport probe_from(VarIdx j, std::vector<std::uint64_t> scales,
                              const std::function<MaxResult(std::uint64_t)>& run) {
  if (scales.size() < 3) throw std::invalid_argument("growth probe needs at least three scales");
  std::sort(scales.begin(), scales.end());
  scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
  if (scales.size() < 3 || scales.front() < 1)
    throw std::invalid_argument("growth probe needs three distinct positive scales");
  ProbeReport r;
  r.var = j;
  r.scales = scales;
  bool missing = false;
  for (auto N : scales) {
    MaxResult m = run(N);
    r.truncated = r.truncated || m.truncated;
    missing = missing || !m.found;
    r.values.push_back(m.found ? m.value : Magnitude::of(0));
    r.witness = m.witness_text;
  }
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < scales.size(); ++k) {
    double N = double(scales[k]);
    double lg = r.values[k].log2();
    r.log2_per_n.push_back(lg / N);
    if (scales[k] >= 2) r.log_log.push_back(lg / std::log2(N));
    if (!r.values[k].is_zero()) {
      lx.push_back(std::log2(N));
      ly.push_back(lg);
    }
  }
  for (std::size_t k = 0; k + 1 < scales.size(); ++k) {
    double num = r.values[k + 1].log2() - r.values[k].log2();
    if (r.values[k].is_zero() && r.values[k + 1].is_zero()) num = 0;
    r.local_exponent.push_back(num / (std::log2(double(scales[k + 1])) - std::log2(double(scales[k]))));
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) mx += lx[k], my += ly[k];
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      sxy += (lx[k] - mx) * (ly[k] - my);
      sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    r.fitted_exponent = sxx > 0 ? sxy / sxx : 0;
  }
  if (r.truncated || missing) return r;

  // The last local exponent is compared with the largest earlier one, at
  // strides 1 and 2 between scales; stride 2 smooths out parity effects in
  // iteration counts. Growth that is polynomial at either stride counts.
  auto rise = [&](std::size_t stride) -> std::optional<double> {
    std::vector<double> d;
    for (std::size_t k = 0; k + stride < scales.size(); ++k) {
      double num = r.values[k + stride].log2() - r.values[k].log2();
      d.push_back(num / (std::log2(double(scales[k + stride])) - std::log2(double(scales[k]))));
    }
    if (d.size() < 2) return std::nullopt;
    double before = *std::max_element(d.begin(), d.end() - 1);
    if (!std::isfinite(d.back()) || !std::isfinite(before)) return std::nullopt;
    return (d.back() - before) / std::max(before, 1.0);
  };
  auto d1 = rise(1), d2 = rise(2);
  if (!d1) return r;  // a zero value somewhere
  double drift = d2 ? std::min(*d1, *d2) : *d1;
  r.drift = drift;
  std::size_t v = r.values.size();
  double ratio1 = std::exp2(r.values[v - 2].log2() - r.values[v - 3].log2());
  double ratio2 = std::exp2(r.values[v - 1].log2() - r.values[v - 2].log2());
  if (drift <= kPolyDrift)
    r.verdict = ProbeVerdict::LooksPoly;
  else if (ratio1 >= kExpRatio && ratio2 >= kExpRatio)
    r.verdict = ProbeVerdict::LooksExp;
  return r;
}

// Runs max_final with every input set to N, for each scale N.
inline ProbeReport growth_probe(const Lare& e, int n, VarIdx j, const std::vector<std::uint64_t>& scales,
                                const EnumCaps& caps = {}) {
  return probe_from(j, scales, [&](std::uint64_t N) { return max_final(e, j, uniform_state(n, N), caps); });
}

inline ProbeReport growth_probe(const FlowchartProgram& p, VarIdx j, const std::vector<std::uint64_t>& scales,
                                const EnumCaps& caps = {}) {
  return probe_from(j, scales, [&](std::uint64_t N) { return max_final(p, j, uniform_state(p.n, N), caps); });
}

}  // namespace fcgrow
