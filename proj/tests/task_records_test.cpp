#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "attngraph/graph_io.hpp"
#include "attngraph/task_records.hpp"
#include "test_util.hpp"

using namespace attngraph;
using attngraph::testing::random_graph;
using attngraph::testing::random_task_json;

namespace {

IngestResult ingest_text(const std::string& text) {
  std::istringstream in(text);
  return ingest_records(in);
}

std::string lines_of(const std::vector<nlohmann::json>& records) {
  std::string out;
  for (const auto& j : records) out += j.dump() + "\n";
  return out;
}

std::multiset<GraphEdge> edge_multiset(const ProgramGraph& g) { return {g.edges.begin(), g.edges.end()}; }

}  // namespace

TEST(IngestRecords, ReadsPublishedLayout) {
  const std::string line =
      R"j({"source_tokens":["def","f","(",")",":","return","x"],"edges":[[0,1,2,"NEXT_SYNTAX"],[6,1,5,"LAST_READ"]],)j"
      R"j("has_bug":true,"error_location":6,"repair_targets":[1],"repair_candidates":[1,6],"provenances":[{"a":1}]})j";
  const auto r = ingest_text(line + "\n");
  ASSERT_EQ(r.records.size(), 1U);
  const auto& rec = r.records[0];
  EXPECT_EQ(rec.sample_id, "0");
  EXPECT_EQ(rec.source_tokens.size(), 7U);
  EXPECT_EQ(rec.edges[1], (RecordEdge{6, 1, 5, "LAST_READ"}));
  EXPECT_TRUE(rec.labels.has_bug);
  EXPECT_EQ(rec.labels.error_location, 6);
  EXPECT_EQ(rec.labels.repair_candidates, (std::vector<std::int64_t>{1, 6}));
  EXPECT_EQ(rec.labels.passthrough, nlohmann::json::parse(R"({"provenances":[{"a":1}]})"));
  EXPECT_FALSE(rec.num_heads);

  const auto ref = reference_graph(rec);
  EXPECT_EQ(ref.nodes, rec.source_tokens);
  EXPECT_EQ(ref.edges.size(), 2U);
  EXPECT_EQ(ref.edges[0].type, "NEXT_SYNTAX");
}

TEST(IngestRecords, SampleIdFallsBackToLineNumber) {
  std::mt19937_64 rng(71);
  const auto r = ingest_text(lines_of({random_task_json(rng, 4, ""), random_task_json(rng, 4, "named")}) + "\n" +
                             random_task_json(rng, 3, "").dump() + "\n");
  ASSERT_EQ(r.records.size(), 3U);
  EXPECT_EQ(r.records[0].sample_id, "0");
  EXPECT_EQ(r.records[1].sample_id, "named");
  EXPECT_EQ(r.records[2].sample_id, "3");  // blank line 2 still counts
}

TEST(IngestRecords, OutOfRangeEdgeSkippedWithDiagnostic) {
  std::mt19937_64 rng(72);
  auto bad = random_task_json(rng, 4, "bad");
  bad["edges"].push_back({0, 9, 0, "NEXT_SYNTAX"});
  const auto r = ingest_text(lines_of({random_task_json(rng, 4, "a"), bad, random_task_json(rng, 4, "c")}));
  EXPECT_EQ(r.records.size(), 2U);
  ASSERT_EQ(r.diagnostics.size(), 1U);
  EXPECT_NE(r.diagnostics[0].find("line 2"), std::string::npos);
}

TEST(IngestRecords, LaterMalformedLinesAreSkipped) {
  std::mt19937_64 rng(73);
  auto no_labels = random_task_json(rng, 3, "x");
  no_labels.erase("has_bug");
  const auto r = ingest_text(lines_of({random_task_json(rng, 3, "a")}) + "{not json\n" + no_labels.dump() + "\n");
  EXPECT_EQ(r.records.size(), 1U);
  EXPECT_EQ(r.diagnostics.size(), 2U);
}

TEST(IngestRecords, FirstRecordIsSchemaProbe) {
  std::mt19937_64 rng(74);
  auto renamed = random_task_json(rng, 3, "x");
  renamed["tokens"] = renamed["source_tokens"];
  renamed.erase("source_tokens");
  EXPECT_THROW(ingest_text(renamed.dump() + "\n"), SchemaError);
  EXPECT_THROW(ingest_text("[1,2]\n"), SchemaError);
  EXPECT_THROW(ingest_text("nope\n"), SchemaError);
  auto string_edges = random_task_json(rng, 3, "x");
  string_edges["edges"] = nlohmann::json::array({{"0", "1", "2", "x"}});
  EXPECT_THROW(ingest_text(string_edges.dump() + "\n"), SchemaError);
}

TEST(IngestRecords, TwentyTwoReferenceTypes) {
  nlohmann::json j;
  std::vector<std::string> tokens(23, "x");
  j["source_tokens"] = tokens;
  j["edges"] = nlohmann::json::array();
  for (int t = 0; t < 22; ++t) j["edges"].push_back({t, t + 1, t, "TYPE_" + std::to_string(t)});
  j["has_bug"] = false;
  j["error_location"] = 0;
  j["repair_targets"] = nlohmann::json::array();
  j["repair_candidates"] = nlohmann::json::array();
  const auto r = ingest_text(j.dump() + "\n");
  const std::vector<ReferenceGraph> refs{reference_graph(r.records.at(0))};
  EXPECT_EQ(graph_size_stats(std::span<const ReferenceGraph>(refs)).edge_type_count, 22U);
}

TEST(ExportRecords, SequenceBaselineOfFiveTokens) {
  std::mt19937_64 rng(75);
  auto task = random_task_json(rng, 5, "s");
  task["source_tokens"] = {"a", "b", "c", "d", "e"};
  const auto tasks = ingest_text(task.dump() + "\n").records;
  const std::vector<ProgramGraph> graphs{sequence_baseline("s", tasks[0].source_tokens, 12)};
  const auto out = export_records(graphs, tasks);
  ASSERT_EQ(out.lines.size(), 1U);
  const auto j = nlohmann::json::parse(out.lines[0]);
  EXPECT_EQ(j["edges"].size(), 8U);
  std::set<int> types;
  for (const auto& e : j["edges"]) types.insert(e[2].get<int>());
  EXPECT_EQ(types, (std::set<int>{12, 25}));
  EXPECT_EQ(j["edge_types"].size(), 26U);
  EXPECT_EQ(j["edge_types"][25], nlohmann::json::array({25, "sequence_rev"}));
  EXPECT_EQ(j["provenances"], task["provenances"]);
}

TEST(ExportRecords, MisalignedSamplesAreSkipped) {
  std::mt19937_64 rng(76);
  const auto tasks = ingest_text(lines_of({random_task_json(rng, 4, "a"), random_task_json(rng, 4, "b")})).records;
  auto wrong = tasks[1].source_tokens;
  wrong.back() += "_";
  const std::vector<ProgramGraph> graphs{sequence_baseline("b", wrong, 12), sequence_baseline("zz", {"q"}, 12),
                                         sequence_baseline("a", tasks[0].source_tokens, 12)};
  const auto out = export_records(graphs, tasks);
  EXPECT_EQ(out.lines.size(), 1U);
  EXPECT_EQ(out.diagnostics.size(), 2U);
}

TEST(ExportRecords, RoundtripIsIdentity) {
  std::mt19937_64 rng(77);
  std::vector<nlohmann::json> originals;
  std::vector<ProgramGraph> graphs;
  for (int k = 0; k < 60; ++k) {
    const std::string id = "sample_" + std::to_string(1000 - k);  // reverse of export order
    originals.push_back(random_task_json(rng, 1 + rng() % 15, id));
  }
  const auto tasks = ingest_text(lines_of(originals)).records;
  for (const auto& t : tasks) graphs.push_back(random_graph(rng, t.sample_id, t.source_tokens, 12));

  const auto exported = export_records(graphs, tasks);
  ASSERT_TRUE(exported.diagnostics.empty());
  std::string text;
  for (const auto& line : exported.lines) text += line + "\n";
  const auto back = ingest_text(text);
  ASSERT_TRUE(back.diagnostics.empty());
  ASSERT_EQ(back.records.size(), graphs.size());

  std::map<std::string, const TaskRecord*> task_by_id;
  for (const auto& t : tasks) task_by_id[t.sample_id] = &t;
  std::map<std::string, const ProgramGraph*> graph_by_id;
  for (const auto& g : graphs) graph_by_id[g.sample_id] = &g;
  for (std::size_t k = 1; k < back.records.size(); ++k) {
    EXPECT_LT(back.records[k - 1].sample_id, back.records[k].sample_id);
  }
  for (const auto& rec : back.records) {
    const auto& original = *graph_by_id.at(rec.sample_id);
    const auto rebuilt = program_graph(rec);
    EXPECT_EQ(rebuilt.nodes, original.nodes);
    EXPECT_EQ(edge_multiset(rebuilt), edge_multiset(original));
    EXPECT_EQ(rebuilt.masked_nodes, original.masked_nodes);
    EXPECT_EQ(rec.labels, task_by_id.at(rec.sample_id)->labels);
  }

  // byte-deterministic
  EXPECT_EQ(export_records(graphs, tasks).lines, exported.lines);
}

TEST(ProgramGraphFromRecord, RejectsInconsistentTypes) {
  TaskRecord r;
  r.sample_id = "s";
  r.source_tokens = {"a", "b"};
  EXPECT_THROW(program_graph(r), SchemaError);
  r.num_heads = 2;
  r.edges = {{0, 1, 0, "head_2"}, {1, 0, 3, "head_1_rev"}};
  EXPECT_THROW(program_graph(r), ValidationError);
  r.edges[0].type_name = "head_1";
  EXPECT_NO_THROW(program_graph(r));
}

TEST(GraphIo, LineRoundtrip) {
  std::mt19937_64 rng(78);
  std::vector<GraphSample> samples;
  for (int k = 0; k < 20; ++k) {
    std::vector<std::string> nodes;
    const std::size_t n = 1 + rng() % 9;
    for (std::size_t i = 0; i < n; ++i) nodes.push_back(i % 4 == 3 ? "#NEWLINE#" : "tok\"" + std::to_string(i));
    samples.push_back({random_graph(rng, "g" + std::to_string(k), nodes, 6), "src " + std::to_string(k)});
  }
  std::stringstream ss;
  write_graphs(ss, samples);
  const auto back = read_graphs(ss);
  ASSERT_EQ(back.size(), samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    auto expected = samples[k].graph;
    expected.sort_edges();
    EXPECT_EQ(back[k].graph, expected);
    EXPECT_EQ(back[k].source_text, samples[k].source_text);
  }
}

TEST(GraphIo, CorruptLineThrows) {
  std::stringstream ss(R"({"sample_id":"a","nodes":["x","y"],"num_heads":1,"masked_nodes":[],"edges":[[0,1,0,"head_1"]]})"
                       "\n");
  EXPECT_THROW(read_graphs(ss), SchemaError);  // missing reverse
  std::stringstream names(
      R"({"sample_id":"a","nodes":["x","y"],"num_heads":1,"masked_nodes":[],"edges":[[0,1,0,"head_2"],[1,0,2,"head_1_rev"]]})"
      "\n");
  EXPECT_THROW(read_graphs(names), SchemaError);
}
