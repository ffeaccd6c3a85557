#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "attngraph/errors.hpp"
#include "attngraph/program_graph.hpp"

namespace attngraph {

// Token pair to look for among attention edges. Matching is exact and
// case-sensitive; a symmetric query also matches dst -> src.
struct PairQuery {
  std::string name;
  std::string src_token;
  std::string dst_token;
  bool symmetric = true;
};

inline std::vector<PairQuery> default_pair_queries() {
  return {{"self-self", "self", "self", true}, {"def-return", "def", "return", true}};
}

struct HeadDistribution {
  std::string query;
  std::vector<std::size_t> counts;  // counts[h - 1] = edges on head h
  std::size_t total = 0;

  std::size_t at_head(int head_id) const { return counts.at(static_cast<std::size_t>(head_id - 1)); }
};

namespace detail {

inline void check_heads(const ProgramGraph& graph, std::size_t num_heads) {
  if (graph.num_heads != num_heads) {
    throw ArgumentError("graph '" + graph.sample_id + "' has " + std::to_string(graph.num_heads) +
                        " heads, expected " + std::to_string(num_heads));
  }
}

}  // namespace detail

// Forward attention edges whose endpoint tokens match the query, by head.
// Reverse and sequence edges are not counted.
inline HeadDistribution count_pair_edges(std::span<const ProgramGraph> graphs, const PairQuery& query,
                                         std::size_t num_heads) {
  if (query.src_token.empty() || query.dst_token.empty()) throw ArgumentError("empty token pattern in query");
  HeadDistribution dist{query.name, std::vector<std::size_t>(num_heads, 0), 0};
  for (const auto& graph : graphs) {
    detail::check_heads(graph, num_heads);
    const auto table = graph.types();
    for (const auto& e : graph.edges) {
      if (!table.is_head(e.type)) continue;
      const auto& a = graph.nodes[e.src];
      const auto& b = graph.nodes[e.dst];
      const bool match = (a == query.src_token && b == query.dst_token) ||
                         (query.symmetric && a == query.dst_token && b == query.src_token);
      if (!match) continue;
      ++dist.counts[static_cast<std::size_t>(e.type)];
      ++dist.total;
    }
  }
  return dist;
}

// All forward attention edges by head; the sum is the corpus tree-edge count
// after masking.
inline std::vector<std::size_t> edge_head_histogram(std::span<const ProgramGraph> graphs, std::size_t num_heads) {
  std::vector<std::size_t> counts(num_heads, 0);
  for (const auto& graph : graphs) {
    detail::check_heads(graph, num_heads);
    const auto table = graph.types();
    for (const auto& e : graph.edges) {
      if (table.is_head(e.type)) ++counts[static_cast<std::size_t>(e.type)];
    }
  }
  return counts;
}

}  // namespace attngraph
