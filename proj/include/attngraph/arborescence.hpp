#pragma once

// Maximum spanning arborescence (Chu-Liu/Edmonds) over dense digraphs.
//
// Tie rule: among in-edges of equal weight the smaller source index wins. A
// contracted cycle is labelled by its smallest member, so the rule carries
// through contractions and the result is a deterministic function of the
// weight matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "attngraph/errors.hpp"
#include "attngraph/matrix.hpp"

namespace attngraph {

inline constexpr std::size_t kNoParent = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kBruteForceLimit = 8;

/// Complete digraph; weights(u, v) is the weight of edge u -> v. The diagonal
/// is ignored.
struct WeightedDigraph {
  SquareMatrix<double> weights;

  WeightedDigraph() = default;
  explicit WeightedDigraph(SquareMatrix<double> w) : weights(std::move(w)) {}

  std::size_t size() const noexcept { return weights.size(); }
};

struct TreeEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  double weight = 0.0;
  int head_id = 0;  // 0 until typed by graph construction

  friend bool operator==(const TreeEdge&, const TreeEdge&) = default;
};

struct ExtractedTree {
  std::size_t root = 0;
  std::vector<TreeEdge> edges;  // sorted by dst

  // Sum of edge weights in dst order, so equal edge sets give bit-equal totals.
  double total_weight() const {
    double total = 0.0;
    for (const auto& e : edges) total += e.weight;
    return total;
  }
};

namespace detail {

inline void check_graph(const WeightedDigraph& g, std::size_t root) {
  if (g.size() == 0) throw ArgumentError("arborescence over an empty graph");
  if (root >= g.size()) {
    throw ArgumentError("root " + std::to_string(root) + " outside a graph of " + std::to_string(g.size()) +
                        " nodes");
  }
  for (const double w : g.weights.values()) {
    if (!std::isfinite(w)) throw ArgumentError("edge weights must be finite");
  }
}

// Returns the nodes of some cycle in the parent graph, or an empty vector.
inline std::vector<std::size_t> find_cycle(const std::vector<std::size_t>& parent, std::size_t root) {
  const std::size_t n = parent.size();
  std::vector<int> state(n, 0);  // 0 unvisited, 1 on current walk, 2 done
  state[root] = 2;
  for (std::size_t start = 0; start < n; ++start) {
    if (state[start] != 0) continue;
    std::vector<std::size_t> walk;
    std::size_t v = start;
    while (state[v] == 0) {
      state[v] = 1;
      walk.push_back(v);
      v = parent[v];
    }
    if (state[v] == 1) {
      const auto first = std::find(walk.begin(), walk.end(), v);
      std::vector<std::size_t> cycle(first, walk.end());
      std::sort(cycle.begin(), cycle.end());
      return cycle;
    }
    for (const auto w : walk) state[w] = 2;
  }
  return {};
}

// Parent vector of the maximum arborescence; parent[root] = kNoParent.
inline std::vector<std::size_t> chu_liu_edmonds(const SquareMatrix<double>& w, std::size_t root) {
  const std::size_t n = w.size();
  std::vector<std::size_t> parent(n, kNoParent);
  for (std::size_t v = 0; v < n; ++v) {
    if (v == root) continue;
    for (std::size_t u = 0; u < n; ++u) {
      if (u == v) continue;
      if (parent[v] == kNoParent || w(u, v) > w(parent[v], v)) parent[v] = u;
    }
  }

  const auto cycle = find_cycle(parent, root);
  if (cycle.empty()) return parent;

  std::vector<bool> in_cycle(n, false);
  for (const auto v : cycle) in_cycle[v] = true;

  // Relabel: nodes keep their relative order, the cycle takes the slot of its
  // smallest member.
  std::vector<std::size_t> label(n);
  std::vector<std::size_t> original;  // new label -> representative old node
  std::size_t cycle_label = kNoParent;
  for (std::size_t v = 0; v < n; ++v) {
    if (in_cycle[v]) {
      if (cycle_label == kNoParent) {
        cycle_label = original.size();
        original.push_back(v);
      }
      label[v] = cycle_label;
    } else {
      label[v] = original.size();
      original.push_back(v);
    }
  }

  const std::size_t m = original.size();
  SquareMatrix<double> contracted(m, 0.0);
  // For an edge u -> cycle: the cycle member it enters. For cycle -> v: the
  // cycle member it leaves.
  std::vector<std::size_t> enter_at(n, kNoParent);
  std::vector<std::size_t> leave_from(n, kNoParent);

  for (std::size_t u = 0; u < n; ++u) {
    if (in_cycle[u]) continue;
    for (std::size_t v = 0; v < n; ++v) {
      if (in_cycle[v] || u == v) continue;
      contracted(label[u], label[v]) = w(u, v);
    }
    // u -> cycle: best gain over replacing the cycle in-edge of the entry node.
    double best = 0.0;
    for (const auto c : cycle) {
      const double gain = w(u, c) - w(parent[c], c);
      if (enter_at[u] == kNoParent || gain > best) {
        best = gain;
        enter_at[u] = c;
      }
    }
    contracted(label[u], cycle_label) = best;
    // cycle -> u: strongest edge out of any member.
    double out_best = 0.0;
    for (const auto c : cycle) {
      if (leave_from[u] == kNoParent || w(c, u) > out_best) {
        out_best = w(c, u);
        leave_from[u] = c;
      }
    }
    contracted(cycle_label, label[u]) = out_best;
  }

  const auto sub = chu_liu_edmonds(contracted, label[root]);

  std::vector<std::size_t> result(n, kNoParent);
  for (std::size_t v = 0; v < n; ++v) {
    if (v == root) continue;
    if (in_cycle[v]) {
      result[v] = parent[v];
      continue;
    }
    const std::size_t p = sub[label[v]];
    result[v] = p == cycle_label ? leave_from[v] : original[p];
  }
  const std::size_t entry_source = original[sub[cycle_label]];
  result[enter_at[entry_source]] = entry_source;
  return result;
}

inline ExtractedTree tree_from_parents(const SquareMatrix<double>& w, const std::vector<std::size_t>& parent,
                                       std::size_t root) {
  ExtractedTree tree;
  tree.root = root;
  tree.edges.reserve(parent.size() > 0 ? parent.size() - 1 : 0);
  for (std::size_t v = 0; v < parent.size(); ++v) {
    if (v == root) continue;
    tree.edges.push_back({parent[v], v, w(parent[v], v), 0});
  }
  return tree;
}

}  // namespace detail

/// Maximum-weight spanning arborescence rooted at `root`.
inline ExtractedTree max_arborescence(const WeightedDigraph& g, std::size_t root) {
  detail::check_graph(g, root);
  return detail::tree_from_parents(g.weights, detail::chu_liu_edmonds(g.weights, root), root);
}

// Exhaustive search over parent assignments. Test oracle; n <= 8.
inline ExtractedTree brute_force_arborescence(const WeightedDigraph& g, std::size_t root) {
  detail::check_graph(g, root);
  const std::size_t n = g.size();
  if (n > kBruteForceLimit) {
    throw ArgumentError("brute-force arborescence refused for n = " + std::to_string(n) + " (limit " +
                        std::to_string(kBruteForceLimit) + ")");
  }
  std::vector<std::size_t> others;
  for (std::size_t v = 0; v < n; ++v) {
    if (v != root) others.push_back(v);
  }

  std::vector<std::size_t> parent(n, kNoParent);
  std::vector<std::size_t> choice(others.size(), 0);  // index into candidate parents (all u != v)
  std::optional<std::vector<std::size_t>> best;
  double best_total = 0.0;

  auto candidate = [&](std::size_t v, std::size_t k) { return k < v ? k : k + 1; };
  auto reaches_root = [&](std::size_t v) {
    for (std::size_t steps = 0; steps <= n; ++steps) {
      if (v == root) return true;
      v = parent[v];
    }
    return false;
  };

  while (true) {
    for (std::size_t k = 0; k < others.size(); ++k) parent[others[k]] = candidate(others[k], choice[k]);
    const bool valid = std::all_of(others.begin(), others.end(), reaches_root);
    if (valid) {
      double total = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        if (v != root) total += g.weights(parent[v], v);
      }
      if (!best || total > best_total) {
        best = parent;
        best_total = total;
      }
    }
    // odometer increment
    std::size_t k = 0;
    while (k < choice.size() && ++choice[k] == n - 1) {
      choice[k] = 0;
      ++k;
    }
    if (k == choice.size()) break;
  }
  if (!best) best = parent;  // n == 1: no other nodes
  return detail::tree_from_parents(g.weights, *best, root);
}

/// Undirected alternative: maximum spanning tree over max(w(u,v), w(v,u)),
/// oriented away from `root`. Each edge keeps the direction (and weight) of
/// the stronger cell, reported as src -> dst from the parent side.
///
/// Returns the tree plus, per edge, the cell (from, to) that supplied the weight.
struct SymmetricTree {
  ExtractedTree tree;
  std::vector<std::pair<std::size_t, std::size_t>> source_cells;  // parallel to tree.edges
};

inline SymmetricTree max_spanning_tree_symmetric(const WeightedDigraph& g, std::size_t root) {
  detail::check_graph(g, root);
  const std::size_t n = g.size();
  struct Candidate {
    double weight;
    std::size_t a, b;  // a < b
    std::size_t from, to;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(n * (n - 1) / 2);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const bool forward = g.weights(a, b) >= g.weights(b, a);
      candidates.push_back({forward ? g.weights(a, b) : g.weights(b, a), a, b, forward ? a : b, forward ? b : a});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.weight != y.weight) return x.weight > y.weight;
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });

  std::vector<std::size_t> component(n);
  std::iota(component.begin(), component.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (component[x] != x) x = component[x] = component[component[x]];
    return x;
  };
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency(n);  // (neighbor, candidate index)
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& c = candidates[k];
    const auto ra = find(c.a);
    const auto rb = find(c.b);
    if (ra == rb) continue;
    component[ra] = rb;
    adjacency[c.a].push_back({c.b, k});
    adjacency[c.b].push_back({c.a, k});
  }

  std::vector<std::size_t> parent(n, kNoParent);
  std::vector<std::size_t> via(n, kNoParent);
  std::vector<std::size_t> stack{root};
  std::vector<bool> seen(n, false);
  seen[root] = true;
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (const auto& [v, k] : adjacency[u]) {
      if (seen[v]) continue;
      seen[v] = true;
      parent[v] = u;
      via[v] = k;
      stack.push_back(v);
    }
  }

  SymmetricTree out;
  out.tree.root = root;
  for (std::size_t v = 0; v < n; ++v) {
    if (v == root) continue;
    const auto& c = candidates[via[v]];
    out.tree.edges.push_back({parent[v], v, c.weight, 0});
    out.source_cells.emplace_back(c.from, c.to);
  }
  return out;
}

}  // namespace attngraph
