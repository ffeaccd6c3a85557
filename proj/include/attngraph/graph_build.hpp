#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "attngraph/aggregate.hpp"
#include "attngraph/arborescence.hpp"
#include "attngraph/attn_model.hpp"
#include "attngraph/errors.hpp"
#include "attngraph/program_graph.hpp"

namespace attngraph {

// Symbol the model sees in place of a masked format token.
inline constexpr std::string_view kMaskSymbol = "<mask>";

inline const std::set<std::string>& default_mask_symbols() {
  static const std::set<std::string> symbols{"#NEWLINE#", "#INDENT#", "#DEDENT#"};
  return symbols;
}

enum class ExtractionMode { arborescence, symmetric_mst };

inline std::string_view to_string(ExtractionMode m) {
  return m == ExtractionMode::arborescence ? "arborescence" : "symmetric-mst";
}

inline ExtractionMode parse_extraction_mode(std::string_view text) {
  if (text == "arborescence") return ExtractionMode::arborescence;
  if (text == "symmetric-mst") return ExtractionMode::symmetric_mst;
  throw ArgumentError("unknown extraction mode '" + std::string(text) + "'");
}

// Root of the spanning structure: the first word, or a fixed word index.
struct RootPolicy {
  std::optional<std::size_t> index;

  std::size_t resolve(std::size_t n_words) const {
    const std::size_t root = index.value_or(0);
    if (root >= n_words) {
      throw ArgumentError("root " + std::to_string(root) + " outside a sample of " + std::to_string(n_words) +
                          " words");
    }
    return root;
  }

  std::string to_string() const { return index ? std::to_string(*index) : "first"; }

  static RootPolicy parse(std::string_view text) {
    if (text == "first") return {};
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ArgumentError("root must be 'first' or a word index, got '" + std::string(text) + "'");
    }
    return {value};
  }
};

struct ExtractionConfig {
  std::optional<std::size_t> layer;  // 1-based; empty = last layer
  Reduction reduction = Reduction::max;
  ExtractionMode mode = ExtractionMode::arborescence;
  RootPolicy root;
  bool sequence_edges = true;
  // Connect the nearest unmasked neighbours across masked tokens instead of
  // leaving a gap.
  bool sequence_across_masks = false;
  std::set<std::string> mask_symbols = default_mask_symbols();

  std::size_t resolve_layer(std::size_t num_layers) const {
    const std::size_t l = layer.value_or(num_layers);
    if (l < 1 || l > num_layers) {
      throw ArgumentError("layer " + std::to_string(l) + " outside [1, " + std::to_string(num_layers) + "]");
    }
    return l;
  }
};

inline std::set<std::size_t> mask_format_symbols(const TokenizedSample& sample,
                                                 const std::set<std::string>& symbols) {
  std::set<std::size_t> masked;
  for (std::size_t i = 0; i < sample.word_tokens.size(); ++i) {
    if (symbols.contains(sample.word_tokens[i])) masked.insert(i);
  }
  return masked;
}

namespace detail {

// Inserts a forward edge and its reverse unless the forward edge exists.
inline void add_edge_pair(ProgramGraph& graph, std::size_t src, std::size_t dst, int type) {
  const GraphEdge forward{src, dst, type};
  if (std::find(graph.edges.begin(), graph.edges.end(), forward) != graph.edges.end()) return;
  graph.edges.push_back(forward);
  graph.edges.push_back({dst, src, graph.types().reverse_of(type)});
}

}  // namespace detail

// Adds (i, next) sequence edges plus reverses between adjacent unmasked nodes.
inline ProgramGraph add_sequence_edges(ProgramGraph graph, bool across_masks = false) {
  const int type = graph.types().sequence_type();
  std::optional<std::size_t> previous;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (graph.is_masked(i)) {
      if (!across_masks) previous.reset();
      continue;
    }
    if (previous) detail::add_edge_pair(graph, *previous, i, type);
    previous = i;
  }
  graph.sort_edges();
  return graph;
}

// Sequence-only graph over a token list: the two-type baseline.
inline ProgramGraph sequence_baseline(std::string sample_id, std::vector<std::string> tokens,
                                      std::size_t num_heads, const ExtractionConfig& config = {}) {
  ProgramGraph graph;
  graph.sample_id = std::move(sample_id);
  graph.num_heads = num_heads;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (config.mask_symbols.contains(tokens[i])) graph.masked_nodes.insert(i);
  }
  graph.nodes = std::move(tokens);
  return add_sequence_edges(std::move(graph), config.sequence_across_masks);
}

/// Aggregated attention graph for one sample: maximum spanning structure over
/// `agg.weight`, each tree edge typed by the head that produced its weight,
/// reflexive edges and edges on masked format symbols dropped, optional
/// sequence edges, and one reverse edge per forward edge.
inline ProgramGraph build_graph(const AggregatedMatrix& agg, const TokenizedSample& sample,
                                const ExtractionConfig& config = {}) {
  const std::size_t n = agg.size();
  if (n == 0 || n != sample.word_tokens.size() || agg.head_id.size() != n) {
    throw ValidationError("aggregated matrix has " + std::to_string(n) + " words but sample '" +
                          sample.sample_id + "' has " + std::to_string(sample.word_tokens.size()));
  }
  if (agg.num_heads == 0) throw ValidationError("aggregated matrix records no heads");

  ProgramGraph graph;
  graph.sample_id = sample.sample_id;
  graph.nodes = sample.word_tokens;
  graph.num_heads = agg.num_heads;
  graph.masked_nodes = mask_format_symbols(sample, config.mask_symbols);
  const auto table = graph.types();

  const std::size_t root = config.root.resolve(n);
  const WeightedDigraph digraph{agg.weight};

  std::vector<TreeEdge> tree_edges;
  if (config.mode == ExtractionMode::arborescence) {
    tree_edges = max_arborescence(digraph, root).edges;
    for (auto& e : tree_edges) e.head_id = agg.head_id(e.src, e.dst);
  } else {
    auto sym = max_spanning_tree_symmetric(digraph, root);
    tree_edges = std::move(sym.tree.edges);
    for (std::size_t k = 0; k < tree_edges.size(); ++k) {
      const auto [from, to] = sym.source_cells[k];
      tree_edges[k].head_id = agg.head_id(from, to);
    }
  }

  for (const auto& e : tree_edges) {
    if (e.src == e.dst) continue;
    if (graph.is_masked(e.src) || graph.is_masked(e.dst)) continue;
    detail::add_edge_pair(graph, e.src, e.dst, table.head_type(e.head_id));
  }
  graph.sort_edges();
  if (config.sequence_edges) graph = add_sequence_edges(std::move(graph), config.sequence_across_masks);
  return graph;
}

// Full per-sample pipeline: aggregate the configured layer, then build.
inline ProgramGraph extract_graph(const AttentionTensor& tensor, const TokenizedSample& sample,
                                  const ExtractionConfig& config = {}) {
  const std::size_t layer = config.resolve_layer(tensor.layers());
  return build_graph(aggregate_layer(tensor, sample, layer, config.reduction), sample, config);
}

}  // namespace attngraph
