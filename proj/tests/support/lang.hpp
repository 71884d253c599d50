#pragma once

// Bounded word sets of a LARE read as a plain regular expression: brackets are
// transparent and ✓ is an ordinary letter "#".

#include <set>
#include <string>
#include <vector>

#include "fcgrow/lare.hpp"

namespace fcgrow::testing {

using Word = std::vector<std::string>;

inline std::set<Word> words(const Lare& e, std::size_t max_len) {
  switch (e->kind) {
    case LareKind::Eps: return {Word{}};
    case LareKind::Check: return max_len ? std::set<Word>{Word{"#"}} : std::set<Word>{};
    case LareKind::Atom: return max_len ? std::set<Word>{Word{to_string(e->instr)}} : std::set<Word>{};
    case LareKind::Bracket: return words(e->left, max_len);
    case LareKind::Alt: {
      auto a = words(e->left, max_len), b = words(e->right, max_len);
      a.insert(b.begin(), b.end());
      return a;
    }
    case LareKind::Cat: {
      auto a = words(e->left, max_len), b = words(e->right, max_len);
      std::set<Word> out;
      for (auto& x : a)
        for (auto& y : b)
          if (x.size() + y.size() <= max_len) {
            Word w = x;
            w.insert(w.end(), y.begin(), y.end());
            out.insert(w);
          }
      return out;
    }
    case LareKind::Star: {
      auto body = words(e->left, max_len);
      std::set<Word> out{Word{}}, frontier{Word{}};
      while (!frontier.empty()) {
        std::set<Word> next;
        for (auto& x : frontier)
          for (auto& y : body)
            if (!y.empty() && x.size() + y.size() <= max_len) {
              Word w = x;
              w.insert(w.end(), y.begin(), y.end());
              if (out.insert(w).second) next.insert(w);
            }
        frontier = std::move(next);
      }
      return out;
    }
  }
  return {};
}

}  // namespace fcgrow::testing
