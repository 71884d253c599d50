#pragma once

#include <random>
#include <vector>

#include "fcgrow/deps.hpp"

namespace fcgrow::testing {

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}
inline bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

inline const DepType kTypes[] = {DepType::One, DepType::OnePlus, DepType::Two, DepType::Three};

// A random set satisfying the proviso and closed under orientation swap.
inline DepSet random_depset(Rng& rng, int n, double p_unary = 0.25, double p_binary = 0.4) {
  std::vector<Dep> u;
  for (int i = 1; i <= n + 1; ++i)
    for (int j = 1; j <= n + 1; ++j)
      for (auto t : kTypes)
        if (coin(rng, p_unary)) u.push_back(Dep::unary(i, t, j));
  std::vector<Dep> out = u;
  for (auto x : u)
    for (auto y : u) {
      if (!one_like(x.type()) || !one_like(y.type())) continue;
      if (x.src() == y.src() && x.dst() == y.dst()) continue;
      // decide once per unordered pair so both orientations agree
      if (x.key() > y.key()) continue;
      if (coin(rng, p_binary)) {
        out.push_back(Dep::binary(x.src(), y.src(), x.dst(), y.dst()));
        out.push_back(Dep::binary(y.src(), x.src(), y.dst(), x.dst()));
      }
    }
  return DepSet(n, std::move(out));
}

inline Instr random_core_instr(Rng& rng, int n, bool allow_mul = true) {
  int r = uniform(rng, 1, n), s = uniform(rng, 1, n), t = uniform(rng, 1, n);
  switch (uniform(rng, 0, allow_mul ? 3 : 2)) {
    case 0: return Instr::skip();
    case 1: return Instr::copy(r, s);
    case 2: return Instr::add(r, s, t);
    default: return Instr::mul(r, s, t);
  }
}

}  // namespace fcgrow::testing
