#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "attngraph/errors.hpp"
#include "attngraph/program_graph.hpp"

namespace attngraph {

struct ReferenceEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  std::string type;

  friend bool operator==(const ReferenceEdge&, const ReferenceEdge&) = default;
  friend auto operator<=>(const ReferenceEdge&, const ReferenceEdge&) = default;
};

// Rule-based graph shipped with the downstream dataset (LAST_READ, FIELD, ...).
struct ReferenceGraph {
  std::string sample_id;
  std::vector<std::string> nodes;
  std::vector<ReferenceEdge> edges;

  friend bool operator==(const ReferenceGraph&, const ReferenceGraph&) = default;
};

struct TypeCoincidence {
  std::size_t reference_count = 0;
  std::size_t recovered_count = 0;

  double proportion() const noexcept {
    return reference_count == 0 ? 0.0
                                : static_cast<double>(recovered_count) / static_cast<double>(reference_count);
  }
};

/// Per-edge pooled overlap between extracted and reference graphs.
struct CoincidenceReport {
  std::map<std::string, TypeCoincidence> by_type;
  std::size_t extracted_edges = 0;          // forward extracted edges considered
  std::size_t unique_extracted_count = 0;   // of those, pairs carrying no reference edge

  void merge(const CoincidenceReport& other) {
    for (const auto& [type, c] : other.by_type) {
      by_type[type].reference_count += c.reference_count;
      by_type[type].recovered_count += c.recovered_count;
    }
    extracted_edges += other.extracted_edges;
    unique_extracted_count += other.unique_extracted_count;
  }
};

struct CoincidenceOptions {
  // Count sequence edges as extracted edges. Off by default: they recover
  // adjacency by construction.
  bool include_sequence_edges = false;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> unordered(std::size_t a, std::size_t b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

}  // namespace detail

// An extracted forward edge on {u, v} recovers every reference edge on {u, v}
// regardless of direction.
inline CoincidenceReport coincidence(const ProgramGraph& extracted, const ReferenceGraph& reference,
                                     const CoincidenceOptions& options = {}) {
  if (extracted.nodes != reference.nodes) {
    throw AlignmentError("sample '" + extracted.sample_id + "': extracted and reference graphs have different "
                         "node sequences (" + std::to_string(extracted.nodes.size()) + " vs " +
                         std::to_string(reference.nodes.size()) + " tokens)");
  }
  const auto table = extracted.types();
  std::set<std::pair<std::size_t, std::size_t>> extracted_pairs;
  std::vector<std::pair<std::size_t, std::size_t>> extracted_forward;
  for (const auto& e : extracted.edges) {
    if (table.is_reverse(e.type)) continue;
    if (!options.include_sequence_edges && !table.is_head(e.type)) continue;
    extracted_pairs.insert(detail::unordered(e.src, e.dst));
    extracted_forward.push_back(detail::unordered(e.src, e.dst));
  }

  CoincidenceReport report;
  std::set<std::pair<std::size_t, std::size_t>> reference_pairs;
  for (const auto& e : reference.edges) {
    if (e.src >= reference.nodes.size() || e.dst >= reference.nodes.size()) {
      throw AlignmentError("reference edge out of range in sample '" + reference.sample_id + "'");
    }
    const auto pair = detail::unordered(e.src, e.dst);
    reference_pairs.insert(pair);
    auto& c = report.by_type[e.type];
    ++c.reference_count;
    if (extracted_pairs.contains(pair)) ++c.recovered_count;
  }
  report.extracted_edges = extracted_forward.size();
  report.unique_extracted_count = static_cast<std::size_t>(std::count_if(
      extracted_forward.begin(), extracted_forward.end(),
      [&](const auto& pair) { return !reference_pairs.contains(pair); }));
  return report;
}

struct GraphSizeStats {
  std::size_t edge_type_count = 0;
  double avg_edges = 0.0;
};

// Distinct edge types used anywhere and mean edges per graph, reverses included.
inline GraphSizeStats graph_size_stats(std::span<const ProgramGraph> graphs) {
  if (graphs.empty()) throw ArgumentError("graph size statistics over an empty corpus");
  std::set<int> types;
  std::size_t total = 0;
  for (const auto& g : graphs) {
    for (const auto& e : g.edges) types.insert(e.type);
    total += g.edges.size();
  }
  return {types.size(), static_cast<double>(total) / static_cast<double>(graphs.size())};
}

// Reference records list forward edges only when the consumer adds reverses
// itself; `implicit_reverses` doubles both figures so they compare with
// extracted graphs, which store reverses explicitly.
inline GraphSizeStats graph_size_stats(std::span<const ReferenceGraph> graphs, bool implicit_reverses = false) {
  if (graphs.empty()) throw ArgumentError("graph size statistics over an empty corpus");
  std::set<std::string> types;
  std::size_t total = 0;
  for (const auto& g : graphs) {
    for (const auto& e : g.edges) types.insert(e.type);
    total += g.edges.size();
  }
  const std::size_t factor = implicit_reverses ? 2 : 1;
  return {types.size() * factor, static_cast<double>(total * factor) / static_cast<double>(graphs.size())};
}

}  // namespace attngraph
