#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "attngraph/cst.hpp"
#include "attngraph/errors.hpp"
#include "attngraph/program_graph.hpp"

namespace attngraph {

inline constexpr std::size_t kTopParentTypes = 10;

namespace detail {

inline std::size_t mapped_leaf(const CstIndex& cst, std::size_t token) {
  const auto leaf = cst.leaf_of(token);
  if (!leaf) throw AlignmentError("token " + std::to_string(token) + " has no CST leaf");
  return *leaf;
}

}  // namespace detail

// Number of nodes strictly between the two tokens' leaves on the tree path.
inline std::size_t tree_distance(const CstIndex& cst, std::size_t u, std::size_t v) {
  const std::size_t a = detail::mapped_leaf(cst, u);
  const std::size_t b = detail::mapped_leaf(cst, v);
  if (a == b) return 0;
  const std::size_t lca = cst.lowest_common_ancestor(a, b);
  const std::size_t da = cst.node(a).depth;
  const std::size_t db = cst.node(b).depth;
  const std::size_t dl = cst.node(lca).depth;
  return da + db - 2 * dl - 1;
}

// Node type of the lowest common ancestor. For u == v the leaf's parent is
// reported (the root's own type if the leaf is the root).
inline std::string last_common_parent(const CstIndex& cst, std::size_t u, std::size_t v) {
  const std::size_t a = detail::mapped_leaf(cst, u);
  const std::size_t b = detail::mapped_leaf(cst, v);
  if (a == b) {
    const int parent = cst.node(a).parent;
    return parent < 0 ? cst.node(a).type : cst.node(static_cast<std::size_t>(parent)).type;
  }
  return cst.node(cst.lowest_common_ancestor(a, b)).type;
}

struct EdgeEvaluation {
  std::size_t src = 0;
  std::size_t dst = 0;
  std::size_t tree_distance = 0;
  std::size_t sequence_distance = 0;
  std::string last_common_parent_type;

  friend bool operator==(const EdgeEvaluation&, const EdgeEvaluation&) = default;
};

/// Corpus-mergeable CST statistics. Only forward attention (head-typed) edges
/// are evaluated; edges with an endpoint lacking a CST leaf go to
/// `unmapped_edges`.
struct CstReport {
  std::vector<EdgeEvaluation> edges;
  std::map<std::size_t, std::size_t> tree_distance_counts;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> joint_counts;  // (tree, sequence)
  std::map<std::string, std::size_t> parent_type_counts;
  std::size_t unmapped_edges = 0;
  std::size_t skipped_samples = 0;

  std::size_t evaluated() const noexcept { return edges.size(); }

  void add(const EdgeEvaluation& e) {
    edges.push_back(e);
    ++tree_distance_counts[e.tree_distance];
    ++joint_counts[{e.tree_distance, e.sequence_distance}];
    ++parent_type_counts[e.last_common_parent_type];
  }

  void merge(const CstReport& other) {
    edges.insert(edges.end(), other.edges.begin(), other.edges.end());
    for (const auto& [k, c] : other.tree_distance_counts) tree_distance_counts[k] += c;
    for (const auto& [k, c] : other.joint_counts) joint_counts[k] += c;
    for (const auto& [k, c] : other.parent_type_counts) parent_type_counts[k] += c;
    unmapped_edges += other.unmapped_edges;
    skipped_samples += other.skipped_samples;
  }

  // Most frequent parent types, count descending then name ascending.
  std::vector<std::pair<std::string, std::size_t>> top_parent_types(std::size_t k = kTopParentTypes) const {
    std::vector<std::pair<std::string, std::size_t>> ranked(parent_type_counts.begin(), parent_type_counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& x, const auto& y) { return x.second > y.second; });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
  }
};

inline CstReport evaluate_graph(const ProgramGraph& graph, const CstIndex& cst) {
  CstReport report;
  const auto table = graph.types();
  for (const auto& e : graph.edges) {
    if (!table.is_head(e.type) || e.src == e.dst) continue;
    if (!cst.is_mapped(e.src) || !cst.is_mapped(e.dst)) {
      ++report.unmapped_edges;
      continue;
    }
    report.add({e.src, e.dst, tree_distance(cst, e.src, e.dst), e.src > e.dst ? e.src - e.dst : e.dst - e.src,
                last_common_parent(cst, e.src, e.dst)});
  }
  return report;
}

}  // namespace attngraph
