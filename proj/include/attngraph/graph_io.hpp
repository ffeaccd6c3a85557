#pragma once

// Line-delimited JSON for extracted graphs, one object per sample:
//   {"edges":[[src,dst,type_id,type_name],...],"masked_nodes":[...],
//    "nodes":[...],"num_heads":H,"sample_id":"...","source_text":"..."}

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "attngraph/errors.hpp"
#include "attngraph/program_graph.hpp"

namespace attngraph {

struct GraphSample {
  ProgramGraph graph;
  std::string source_text;

  friend bool operator==(const GraphSample&, const GraphSample&) = default;
};

inline nlohmann::json edges_to_json(const ProgramGraph& graph) {
  const auto table = graph.types();
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : graph.edges) edges.push_back({e.src, e.dst, e.type, table.name(e.type)});
  return edges;
}

inline nlohmann::json edge_type_table_json(std::size_t num_heads) {
  const EdgeTypeTable table{num_heads};
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t t = 0; t < table.type_count(); ++t) out.push_back({t, table.name(static_cast<int>(t))});
  return out;
}

// Parses [[src, dst, type_id, type_name], ...]; type names must agree with ids.
inline std::vector<GraphEdge> edges_from_json(const nlohmann::json& edges, std::size_t num_nodes,
                                              const EdgeTypeTable& table) {
  if (!edges.is_array()) throw SchemaError("'edges' must be an array");
  std::vector<GraphEdge> out;
  out.reserve(edges.size());
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 4 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned() ||
        !e[2].is_number_integer() || !e[3].is_string()) {
      throw SchemaError("edge must be [src, dst, type_id, type_name]");
    }
    GraphEdge edge{e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<int>()};
    if (edge.src >= num_nodes || edge.dst >= num_nodes) throw ValidationError("edge endpoint out of range");
    if (!table.valid(edge.type) || table.name(edge.type) != e[3].get<std::string>()) {
      throw ValidationError("edge type " + std::to_string(edge.type) + " does not match name '" +
                            e[3].get<std::string>() + "'");
    }
    out.push_back(edge);
  }
  return out;
}

inline nlohmann::json graph_to_json(const GraphSample& sample) {
  const auto& g = sample.graph;
  nlohmann::json j;
  j["sample_id"] = g.sample_id;
  j["nodes"] = g.nodes;
  j["edges"] = edges_to_json(g);
  j["masked_nodes"] = g.masked_nodes;
  j["num_heads"] = g.num_heads;
  j["source_text"] = sample.source_text;
  return j;
}

inline GraphSample graph_from_json(const nlohmann::json& j) {
  try {
    GraphSample sample;
    auto& g = sample.graph;
    g.sample_id = j.at("sample_id").get<std::string>();
    g.nodes = j.at("nodes").get<std::vector<std::string>>();
    g.num_heads = j.at("num_heads").get<std::size_t>();
    g.masked_nodes = j.at("masked_nodes").get<std::set<std::size_t>>();
    g.edges = edges_from_json(j.at("edges"), g.nodes.size(), g.types());
    g.sort_edges();
    if (const auto it = j.find("source_text"); it != j.end()) sample.source_text = it->get<std::string>();
    validate_graph(g);
    return sample;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed graph record: ") + e.what());
  }
}

// Compact single-line JSON; invalid UTF-8 in token text is replaced, not fatal.
inline std::string json_line(const nlohmann::json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

inline std::string graph_line(const GraphSample& sample) { return json_line(graph_to_json(sample)); }

// Reads every line; throws on the first malformed one (graph files are our own
// output, so a bad line means corruption rather than foreign data).
inline std::vector<GraphSample> read_graphs(std::istream& in) {
  std::vector<GraphSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(graph_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("graph line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw SchemaError("graph line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<GraphSample> read_graphs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_graphs(in);
}

inline void write_graphs(std::ostream& out, const std::vector<GraphSample>& samples) {
  for (const auto& s : samples) out << graph_line(s) << '\n';
}

}  // namespace attngraph
