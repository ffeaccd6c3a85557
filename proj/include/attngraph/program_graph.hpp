#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "attngraph/errors.hpp"

namespace attngraph {

// Edge type numbering for a model with H heads:
//   0 .. H-1      head_1 .. head_H
//   H             sequence
//   id + (H + 1)  reverse of id, named "<name>_rev"
// 2H + 2 types in total (26 for H = 12).
struct EdgeTypeTable {
  std::size_t num_heads = 0;

  std::size_t forward_count() const noexcept { return num_heads + 1; }
  std::size_t type_count() const noexcept { return 2 * forward_count(); }

  int head_type(int head_id) const {
    if (head_id < 1 || static_cast<std::size_t>(head_id) > num_heads) {
      throw ArgumentError("head id " + std::to_string(head_id) + " outside [1, " + std::to_string(num_heads) +
                          "]");
    }
    return head_id - 1;
  }
  int sequence_type() const noexcept { return static_cast<int>(num_heads); }

  bool valid(int type) const noexcept { return type >= 0 && static_cast<std::size_t>(type) < type_count(); }
  bool is_reverse(int type) const noexcept { return static_cast<std::size_t>(type) >= forward_count(); }
  bool is_head(int type) const noexcept { return type >= 0 && static_cast<std::size_t>(type) < num_heads; }

  // 1-based head of a forward or reverse head type, 0 otherwise.
  int head_of(int type) const noexcept {
    const int forward = is_reverse(type) ? type - static_cast<int>(forward_count()) : type;
    return is_head(forward) ? forward + 1 : 0;
  }

  int reverse_of(int type) const {
    if (!valid(type)) throw ArgumentError("invalid edge type " + std::to_string(type));
    const int shift = static_cast<int>(forward_count());
    return is_reverse(type) ? type - shift : type + shift;
  }

  std::string name(int type) const {
    if (!valid(type)) throw ArgumentError("invalid edge type " + std::to_string(type));
    const bool reverse = is_reverse(type);
    const int forward = reverse ? type - static_cast<int>(forward_count()) : type;
    std::string base = is_head(forward) ? "head_" + std::to_string(forward + 1) : "sequence";
    return reverse ? base + "_rev" : base;
  }
};

struct GraphEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  int type = 0;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
  friend auto operator<=>(const GraphEdge& a, const GraphEdge& b) {
    return std::tie(a.src, a.dst, a.type) <=> std::tie(b.src, b.dst, b.type);
  }
};

/// Typed multigraph over the word tokens of one sample. Edges are kept sorted
/// by (src, dst, type); every forward edge has exactly one reverse partner.
struct ProgramGraph {
  std::string sample_id;
  std::vector<std::string> nodes;
  std::vector<GraphEdge> edges;
  std::set<std::size_t> masked_nodes;
  std::size_t num_heads = 0;

  EdgeTypeTable types() const noexcept { return {num_heads}; }

  bool is_masked(std::size_t node) const { return masked_nodes.contains(node); }

  void sort_edges() { std::sort(edges.begin(), edges.end()); }

  std::size_t forward_edge_count() const {
    const auto table = types();
    return static_cast<std::size_t>(
        std::count_if(edges.begin(), edges.end(), [&](const GraphEdge& e) { return !table.is_reverse(e.type); }));
  }

  friend bool operator==(const ProgramGraph&, const ProgramGraph&) = default;
};

// Throws ValidationError naming the first broken invariant.
inline void validate_graph(const ProgramGraph& graph) {
  const auto table = graph.types();
  std::multiset<GraphEdge> forward;
  std::multiset<GraphEdge> reverse;
  for (const auto node : graph.masked_nodes) {
    if (node >= graph.nodes.size()) throw ValidationError("masked node out of range in graph '" + graph.sample_id + "'");
  }
  for (const auto& e : graph.edges) {
    if (e.src >= graph.nodes.size() || e.dst >= graph.nodes.size()) {
      throw ValidationError("edge endpoint out of range in graph '" + graph.sample_id + "'");
    }
    if (e.src == e.dst) throw ValidationError("reflexive edge in graph '" + graph.sample_id + "'");
    if (!table.valid(e.type)) throw ValidationError("invalid edge type in graph '" + graph.sample_id + "'");
    if (graph.is_masked(e.src) || graph.is_masked(e.dst)) {
      throw ValidationError("edge touches a masked node in graph '" + graph.sample_id + "'");
    }
    if (table.is_reverse(e.type)) {
      reverse.insert({e.dst, e.src, table.reverse_of(e.type)});
    } else {
      forward.insert(e);
    }
  }
  if (forward != reverse) {
    throw ValidationError("forward and reverse edges do not pair up in graph '" + graph.sample_id + "'");
  }
}

}  // namespace attngraph
