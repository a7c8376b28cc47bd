#include "support/oracles.hpp"

#include <algorithm>
#include <limits>

namespace oracles {

using parselab::transition::ActionKind;
using parselab::transition::ParserConfiguration;
using parselab::transition::SystemId;

bool tree_valid_by_reachability(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  for (int i = 1; i <= n; ++i) {
    int h = heads[static_cast<std::size_t>(i - 1)];
    if (h < 0 || h > n || h == i) return false;
  }
  // Fixpoint reachability from the root.
  std::vector<char> reachable(static_cast<std::size_t>(n) + 1, 0);
  reachable[0] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 1; i <= n; ++i) {
      if (!reachable[static_cast<std::size_t>(i)] &&
          reachable[static_cast<std::size_t>(heads[static_cast<std::size_t>(i - 1)])]) {
        reachable[static_cast<std::size_t>(i)] = 1;
        changed = true;
      }
    }
  }
  return std::all_of(reachable.begin() + 1, reachable.end(), [](char c) { return c != 0; });
}

bool projective_by_crossing(const std::vector<int>& heads) {
  // Crossing-arc formulation, including arcs from the root: no two arcs may
  // cross, and no arc may span the root's position... with a root at 0 the
  // root cannot be inside any span, so plain pairwise crossing suffices.
  const int n = static_cast<int>(heads.size());
  for (int d1 = 1; d1 <= n; ++d1) {
    int h1 = heads[static_cast<std::size_t>(d1 - 1)];
    int a1 = std::min(h1, d1), b1 = std::max(h1, d1);
    for (int d2 = d1 + 1; d2 <= n; ++d2) {
      int h2 = heads[static_cast<std::size_t>(d2 - 1)];
      int a2 = std::min(h2, d2), b2 = std::max(h2, d2);
      bool a2_inside = a1 < a2 && a2 < b1;
      bool b2_inside = a1 < b2 && b2 < b1;
      if (a2_inside != b2_inside && a2 != a1 && a2 != b1 && b2 != a1 && b2 != b1) return false;
    }
  }
  return true;
}

namespace {

template <typename Fn>
void enumerate_head_arrays(int n, Fn&& fn) {
  std::vector<int> heads(static_cast<std::size_t>(n), 0);
  while (true) {
    bool self = false;
    for (int i = 1; i <= n; ++i) {
      if (heads[static_cast<std::size_t>(i - 1)] == i) self = true;
    }
    if (!self) fn(heads);
    int pos = 0;
    while (pos < n) {
      if (++heads[static_cast<std::size_t>(pos)] <= n) break;
      heads[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
}

}  // namespace

std::vector<std::vector<int>> all_trees(int n) {
  std::vector<std::vector<int>> out;
  enumerate_head_arrays(n, [&](const std::vector<int>& heads) {
    if (tree_valid_by_reachability(heads)) out.push_back(heads);
  });
  return out;
}

std::vector<std::vector<int>> all_projective_trees(int n) {
  std::vector<std::vector<int>> out;
  enumerate_head_arrays(n, [&](const std::vector<int>& heads) {
    if (tree_valid_by_reachability(heads) && projective_by_crossing(heads)) out.push_back(heads);
  });
  return out;
}

double best_arborescence_score(const Eigen::MatrixXd& scores) {
  const int n = static_cast<int>(scores.rows()) - 1;
  double best = -std::numeric_limits<double>::infinity();
  enumerate_head_arrays(n, [&](const std::vector<int>& heads) {
    if (!tree_valid_by_reachability(heads)) return;
    double total = 0.0;
    for (int d = 1; d <= n; ++d) total += scores(heads[static_cast<std::size_t>(d - 1)], d);
    best = std::max(best, total);
  });
  return best;
}

double best_projective_score(const Eigen::MatrixXd& scores) {
  const int n = static_cast<int>(scores.rows()) - 1;
  double best = -std::numeric_limits<double>::infinity();
  enumerate_head_arrays(n, [&](const std::vector<int>& heads) {
    if (!tree_valid_by_reachability(heads) || !projective_by_crossing(heads)) return;
    double total = 0.0;
    for (int d = 1; d <= n; ++d) total += scores(heads[static_cast<std::size_t>(d - 1)], d);
    best = std::max(best, total);
  });
  return best;
}

int degree_by_definition(const std::vector<int>& heads, int head, int dep) {
  const int n = static_cast<int>(heads.size());
  // Descendant set of `head` by fixpoint.
  std::vector<char> desc(static_cast<std::size_t>(n) + 1, 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 1; i <= n; ++i) {
      if (desc[static_cast<std::size_t>(i)]) continue;
      int h = heads[static_cast<std::size_t>(i - 1)];
      if (h == head || desc[static_cast<std::size_t>(h)]) {
        desc[static_cast<std::size_t>(i)] = 1;
        changed = true;
      }
    }
  }
  int lo = std::min(head, dep), hi = std::max(head, dep);
  int count = 0;
  for (int v = lo + 1; v < hi; ++v) {
    if (desc[static_cast<std::size_t>(v)]) continue;
    int vh = heads[static_cast<std::size_t>(v - 1)];
    bool modifies_outside = vh <= lo || vh >= hi;
    if (modifies_outside) ++count;
  }
  return count;
}

std::vector<int> random_tree(int n, parselab::Rng& rng) {
  std::vector<int> heads(static_cast<std::size_t>(n));
  while (true) {
    for (int i = 1; i <= n; ++i) {
      int h;
      do {
        h = static_cast<int>(rng.uniform(static_cast<std::uint64_t>(n) + 1));
      } while (h == i);
      heads[static_cast<std::size_t>(i - 1)] = h;
    }
    if (tree_valid_by_reachability(heads)) return heads;
  }
}

std::vector<int> random_projective_tree(int n, parselab::Rng& rng) {
  while (true) {
    auto heads = random_tree(n, rng);
    if (projective_by_crossing(heads)) return heads;
  }
}

std::vector<int> CompletionSearch::key(const ParserConfiguration& c) const {
  std::vector<int> k;
  k.push_back(c.buffer_begin);
  k.push_back(static_cast<int>(c.stack.size()));
  k.insert(k.end(), c.stack.begin(), c.stack.end());
  k.insert(k.end(), c.heads.begin(), c.heads.end());
  return k;
}

int CompletionSearch::min_loss(const ParserConfiguration& c) {
  if (parselab::transition::is_terminal(SystemId::ArcHybrid, c)) {
    auto tree = parselab::transition::finish_tree(c);
    int loss = 0;
    for (int i = 1; i <= c.n; ++i) {
      if (tree.head_of(i) != gold_[static_cast<std::size_t>(i - 1)]) ++loss;
    }
    return loss;
  }
  auto k = key(c);
  auto it = memo_.find(k);
  if (it != memo_.end()) return it->second;
  int best = std::numeric_limits<int>::max();
  for (ActionKind kind : parselab::transition::legal_actions(SystemId::ArcHybrid, c)) {
    auto next = parselab::transition::apply_action(SystemId::ArcHybrid, c, {kind, "x"});
    best = std::min(best, min_loss(next));
  }
  memo_[k] = best;
  return best;
}

}  // namespace oracles
