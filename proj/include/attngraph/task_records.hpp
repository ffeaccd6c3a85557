#pragma once

// Line-delimited task records of the variable-misuse dataset, one JSON object
// per function:
//
//   source_tokens      [string]
//   edges              [[src, dst, type_id, type_name], ...]
//   has_bug            bool
//   error_location     int
//   repair_targets     [int]
//   repair_candidates  [int]
//
// Any other keys (e.g. provenances) are carried through untouched. Exported
// records replace `edges` with an extracted graph and add `sample_id`,
// `edge_types` ([[id, name], ...]), `num_heads` and `masked_nodes`.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "attngraph/coincide.hpp"
#include "attngraph/errors.hpp"
#include "attngraph/graph_io.hpp"
#include "attngraph/program_graph.hpp"

namespace attngraph {

struct RecordEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  int type_id = 0;
  std::string type_name;

  friend bool operator==(const RecordEdge&, const RecordEdge&) = default;
};

struct TaskLabels {
  bool has_bug = false;
  std::int64_t error_location = 0;
  std::vector<std::int64_t> repair_targets;
  std::vector<std::int64_t> repair_candidates;
  nlohmann::json passthrough = nlohmann::json::object();  // unrecognised keys

  friend bool operator==(const TaskLabels&, const TaskLabels&) = default;
};

struct TaskRecord {
  std::string sample_id;
  std::vector<std::string> source_tokens;
  std::vector<RecordEdge> edges;
  TaskLabels labels;
  // Present on records this library exported.
  std::optional<std::size_t> num_heads;
  std::set<std::size_t> masked_nodes;
};

struct IngestResult {
  std::vector<TaskRecord> records;
  std::vector<std::string> diagnostics;  // one per skipped line
};

struct ExportResult {
  std::vector<std::string> lines;
  std::vector<std::string> diagnostics;  // one per skipped graph
};

namespace detail {

inline const std::set<std::string>& record_keys() {
  static const std::set<std::string> keys{"sample_id",    "source_tokens",  "edges",
                                          "has_bug",      "error_location", "repair_targets",
                                          "repair_candidates", "edge_types", "num_heads",
                                          "masked_nodes"};
  return keys;
}

inline bool is_int_array(const nlohmann::json& j) {
  return j.is_array() && std::all_of(j.begin(), j.end(), [](const auto& v) { return v.is_number_integer(); });
}

// Field layout check. Throws SchemaError describing the first mismatch.
inline void check_record_schema(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("record is not a JSON object");
  auto require = [&](const char* key, bool ok, const char* expected) {
    if (!j.contains(key)) throw SchemaError(std::string("record has no '") + key + "' field");
    if (!ok) throw SchemaError(std::string("field '") + key + "' is not " + expected);
  };
  require("source_tokens", j.contains("source_tokens") && j["source_tokens"].is_array() &&
                               std::all_of(j["source_tokens"].begin(), j["source_tokens"].end(),
                                           [](const auto& t) { return t.is_string(); }),
          "an array of strings");
  require("edges", j.contains("edges") && j["edges"].is_array(), "an array");
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 4 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
        !e[2].is_number_integer() || !e[3].is_string()) {
      throw SchemaError("edge entries must be [src, dst, type_id, type_name]");
    }
  }
  require("has_bug", j.contains("has_bug") && j["has_bug"].is_boolean(), "a boolean");
  require("error_location", j.contains("error_location") && j["error_location"].is_number_integer(),
          "an integer");
  require("repair_targets", j.contains("repair_targets") && is_int_array(j["repair_targets"]),
          "an array of integers");
  require("repair_candidates", j.contains("repair_candidates") && is_int_array(j["repair_candidates"]),
          "an array of integers");
  if (j.contains("sample_id") && !j["sample_id"].is_string()) throw SchemaError("'sample_id' is not a string");
}

inline TaskRecord record_from_json(const nlohmann::json& j, std::string fallback_id) {
  check_record_schema(j);
  TaskRecord r;
  r.sample_id = j.contains("sample_id") ? j["sample_id"].get<std::string>() : std::move(fallback_id);
  r.source_tokens = j["source_tokens"].get<std::vector<std::string>>();
  const auto n = static_cast<std::int64_t>(r.source_tokens.size());
  auto in_range = [n](std::int64_t k) { return k >= 0 && k < n; };
  for (const auto& e : j["edges"]) {
    const auto src = e[0].get<std::int64_t>();
    const auto dst = e[1].get<std::int64_t>();
    if (!in_range(src) || !in_range(dst)) {
      throw ValidationError("edge [" + std::to_string(src) + ", " + std::to_string(dst) + "] outside " +
                            std::to_string(n) + " tokens");
    }
    r.edges.push_back({static_cast<std::size_t>(src), static_cast<std::size_t>(dst), e[2].get<int>(),
                       e[3].get<std::string>()});
  }
  r.labels.has_bug = j["has_bug"].get<bool>();
  r.labels.error_location = j["error_location"].get<std::int64_t>();
  r.labels.repair_targets = j["repair_targets"].get<std::vector<std::int64_t>>();
  r.labels.repair_candidates = j["repair_candidates"].get<std::vector<std::int64_t>>();
  if (!in_range(r.labels.error_location)) throw ValidationError("error_location outside the token range");
  for (const auto k : r.labels.repair_targets) {
    if (!in_range(k)) throw ValidationError("repair target outside the token range");
  }
  for (const auto k : r.labels.repair_candidates) {
    if (!in_range(k)) throw ValidationError("repair candidate outside the token range");
  }
  if (j.contains("num_heads")) r.num_heads = j["num_heads"].get<std::size_t>();
  if (j.contains("masked_nodes")) r.masked_nodes = j["masked_nodes"].get<std::set<std::size_t>>();
  for (const auto& [key, value] : j.items()) {
    if (!record_keys().contains(key)) r.labels.passthrough[key] = value;
  }
  return r;
}

}  // namespace detail

/// Reads task records. The first record is the schema probe: if its layout
/// does not match, the whole ingest fails with SchemaError. Later malformed
/// lines are skipped with a diagnostic. Records without `sample_id` are keyed
/// by their 0-based line number.
inline IngestResult ingest_records(std::istream& in) {
  IngestResult result;
  std::string line;
  std::size_t line_no = 0;
  bool probed = false;
  for (; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no + 1) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      if (!probed) throw SchemaError(where + "first record is not valid JSON");
      result.diagnostics.push_back(where + "invalid JSON");
      continue;
    }
    if (!probed) {
      try {
        detail::check_record_schema(j);
      } catch (const SchemaError& e) {
        throw SchemaError(where + "unexpected record layout: " + e.what());
      }
      probed = true;
    }
    try {
      result.records.push_back(detail::record_from_json(j, std::to_string(line_no)));
    } catch (const Error& e) {
      result.diagnostics.push_back(where + e.what());
    } catch (const nlohmann::json::exception& e) {
      result.diagnostics.push_back(where + e.what());
    }
  }
  return result;
}

inline IngestResult ingest_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return ingest_records(in);
}

inline ReferenceGraph reference_graph(const TaskRecord& record) {
  ReferenceGraph g;
  g.sample_id = record.sample_id;
  g.nodes = record.source_tokens;
  g.edges.reserve(record.edges.size());
  for (const auto& e : record.edges) g.edges.push_back({e.src, e.dst, e.type_name});
  return g;
}

// Rebuilds the extracted graph from a record this library exported.
inline ProgramGraph program_graph(const TaskRecord& record) {
  if (!record.num_heads) throw SchemaError("record '" + record.sample_id + "' carries no num_heads");
  ProgramGraph g;
  g.sample_id = record.sample_id;
  g.nodes = record.source_tokens;
  g.num_heads = *record.num_heads;
  g.masked_nodes = record.masked_nodes;
  const auto table = g.types();
  for (const auto& e : record.edges) {
    if (!table.valid(e.type_id) || table.name(e.type_id) != e.type_name) {
      throw ValidationError("record '" + record.sample_id + "' has edge type " + std::to_string(e.type_id) +
                            " named '" + e.type_name + "'");
    }
    g.edges.push_back({e.src, e.dst, e.type_id});
  }
  g.sort_edges();
  validate_graph(g);
  return g;
}

inline nlohmann::json labels_to_json(const TaskLabels& labels) {
  nlohmann::json j = labels.passthrough;
  j["has_bug"] = labels.has_bug;
  j["error_location"] = labels.error_location;
  j["repair_targets"] = labels.repair_targets;
  j["repair_candidates"] = labels.repair_candidates;
  return j;
}

/// One record per graph, ordered by sample id. A graph is exported only when
/// a task record with the same id exists and its tokens equal the graph's
/// nodes position by position; otherwise it is skipped with a diagnostic.
inline ExportResult export_records(std::span<const ProgramGraph> graphs, std::span<const TaskRecord> tasks) {
  std::map<std::string, const TaskRecord*> by_id;
  for (const auto& t : tasks) by_id.emplace(t.sample_id, &t);

  std::vector<const ProgramGraph*> ordered;
  ordered.reserve(graphs.size());
  for (const auto& g : graphs) ordered.push_back(&g);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ProgramGraph* a, const ProgramGraph* b) { return a->sample_id < b->sample_id; });

  ExportResult result;
  for (const ProgramGraph* g : ordered) {
    const auto it = by_id.find(g->sample_id);
    if (it == by_id.end()) {
      result.diagnostics.push_back("sample '" + g->sample_id + "': no task record");
      continue;
    }
    const TaskRecord& task = *it->second;
    if (task.source_tokens != g->nodes) {
      result.diagnostics.push_back("sample '" + g->sample_id + "': graph has " + std::to_string(g->nodes.size()) +
                                   " tokens that do not match the task's " +
                                   std::to_string(task.source_tokens.size()));
      continue;
    }
    ProgramGraph sorted = *g;
    sorted.sort_edges();
    nlohmann::json j = labels_to_json(task.labels);
    j["sample_id"] = g->sample_id;
    j["source_tokens"] = task.source_tokens;
    j["edges"] = edges_to_json(sorted);
    j["edge_types"] = edge_type_table_json(g->num_heads);
    j["num_heads"] = g->num_heads;
    j["masked_nodes"] = g->masked_nodes;
    result.lines.push_back(json_line(j));
  }
  return result;
}

inline void write_lines(std::ostream& out, const std::vector<std::string>& lines) {
  for (const auto& line : lines) out << line << '\n';
}

}  // namespace attngraph
