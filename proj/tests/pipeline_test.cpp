#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "attngraph/pipeline.hpp"
#include "test_util.hpp"

using namespace attngraph;
using attngraph::testing::head_graph;
using attngraph::testing::random_task_json;
using attngraph::testing::TempDir;
using attngraph::testing::write_corpus;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const std::filesystem::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

const std::vector<std::string> kAddTokens{"def", "add", "(", "a", ",", "b", ")", ":", "return", "a"};

}  // namespace

TEST(RunExtract, GraphsMatchPerSampleExtraction) {
  std::mt19937_64 rng(81);
  TempDir dir("extract");
  std::filesystem::create_directories(dir / "in");
  auto samples = write_corpus(rng, dir / "in", 12);
  write_text(dir / "in" / ".hidden", "ignored");
  write_text(dir / "in" / "broken.attn", "ATTN1 nonsense");

  const auto summary = run_extract(dir / "in", dir / "out" / "graphs.jsonl", {}, 1);
  EXPECT_EQ(summary.inputs, 13U);
  EXPECT_EQ(summary.processed, 12U);
  ASSERT_EQ(summary.skipped(), 1U);
  EXPECT_EQ(summary.diagnostics[0].input, "broken.attn");
  EXPECT_EQ(summary.exit_code(), 0);

  const auto graphs = read_graphs(dir / "out" / "graphs.jsonl");
  ASSERT_EQ(graphs.size(), 12U);
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    EXPECT_EQ(graphs[k].graph.sample_id, samples[k].sample_id);
    EXPECT_EQ(graphs[k].graph.nodes, samples[k].word_tokens);
    EXPECT_EQ(graphs[k].source_text, samples[k].source_text);
  }

  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "graphs.jsonl.manifest.json"));
  EXPECT_EQ(manifest["processed"], 12);
  EXPECT_EQ(manifest["skipped"], 1);
  EXPECT_EQ(manifest["config"]["layer"], "last");
  EXPECT_EQ(manifest["config"]["mode"], "arborescence");
  EXPECT_EQ(manifest["diagnostics"][0]["input"], "broken.attn");
}

TEST(RunExtract, WorkerCountDoesNotChangeOutput) {
  std::mt19937_64 rng(82);
  TempDir dir("extract");
  std::filesystem::create_directories(dir / "in");
  write_corpus(rng, dir / "in", 40);
  run_extract(dir / "in", dir / "one.jsonl", {}, 1);
  run_extract(dir / "in", dir / "eight.jsonl", {}, 8);
  EXPECT_EQ(slurp(dir / "one.jsonl"), slurp(dir / "eight.jsonl"));
  EXPECT_EQ(slurp(dir / "one.jsonl.manifest.json"), slurp(dir / "eight.jsonl.manifest.json"));
}

TEST(RunExtract, EmptyDirectoryFails) {
  TempDir dir("extract");
  std::filesystem::create_directories(dir / "in");
  const auto summary = run_extract(dir / "in", dir / "g.jsonl", {}, 1);
  EXPECT_EQ(summary.exit_code(), 1);
  EXPECT_THROW(run_extract(dir / "missing", dir / "g.jsonl", {}, 1), Error);
}

TEST(RunExtract, ConfigIsApplied) {
  std::mt19937_64 rng(83);
  TempDir dir("extract");
  std::filesystem::create_directories(dir / "in");
  write_corpus(rng, dir / "in", 5, 3);
  ExtractionConfig config;
  config.layer = 1;
  config.sequence_edges = false;
  config.mode = ExtractionMode::symmetric_mst;
  run_extract(dir / "in", dir / "g.jsonl", config, 2);
  for (const auto& s : read_graphs(dir / "g.jsonl")) {
    for (const auto& e : s.graph.edges) EXPECT_NE(e.type, s.graph.types().sequence_type());
  }
  const auto manifest = nlohmann::json::parse(slurp(dir / "g.jsonl.manifest.json"));
  EXPECT_EQ(manifest["config"]["layer"], 1);
  EXPECT_EQ(manifest["config"]["mode"], "symmetric-mst");
}

TEST(RunProfile, OneRowPerLayer) {
  std::mt19937_64 rng(84);
  TempDir dir("profile");
  std::filesystem::create_directories(dir / "in");
  write_corpus(rng, dir / "in", 4, 3);
  const auto summary = run_profile(dir / "in", dir / "layers.csv", Reduction::max, 3);
  EXPECT_EQ(summary.processed, 4U);
  const auto rows = lines(dir / "layers.csv");
  ASSERT_EQ(rows.size(), 1U + 4 * 3);
  EXPECT_EQ(rows[0], "sample_id,layer,mean_abs_offset,band_mass");
  EXPECT_EQ(rows[1].substr(0, 14), "sample_1000,1,");
  EXPECT_EQ(rows[3].substr(0, 14), "sample_1000,3,");
}

TEST(RunEvalCst, ReportsOnTheExampleFunction) {
  TempDir dir("cst");
  const auto graph = head_graph("f", kAddTokens, 12, {{0, 8, 3}, {3, 5, 1}, {1, 9, 3}});
  const auto bad = head_graph("g", {"def", "("}, 12, {{0, 1, 1}});
  {
    std::ofstream out(dir / "graphs.jsonl");
    write_graphs(out, {{graph, "def add(a, b):\n    return a\n"}, {bad, "def ("}});
  }
  const auto run = run_eval_cst(dir / "graphs.jsonl", std::nullopt, (dir / "r_").string());
  EXPECT_EQ(run.summary.processed, 1U);
  EXPECT_EQ(run.report.skipped_samples, 1U);
  EXPECT_EQ(lines(dir / "r_tree_distance.csv"), (std::vector<std::string>{"tree_distance,count", "1,1", "3,2"}));
  EXPECT_EQ(lines(dir / "r_tree_sequence.csv"),
            (std::vector<std::string>{"tree_distance,sequence_distance,count", "1,2,1", "3,8,2"}));
  EXPECT_EQ(lines(dir / "r_parent_types.csv"),
            (std::vector<std::string>{"parent_type,count", "function_definition,2", "parameters,1"}));
  const auto edges = lines(dir / "r_edges.csv");
  ASSERT_EQ(edges.size(), 4U);
  EXPECT_EQ(edges[1], "f,0,8,def,return,3,8,function_definition");
  EXPECT_EQ(edges[2], "f,1,9,add,a,3,8,function_definition");
  EXPECT_EQ(edges[3], "f,3,5,a,b,1,2,parameters");
}

TEST(RunEvalCst, SourcesFileOverridesGraphText) {
  TempDir dir("cst");
  {
    std::ofstream out(dir / "graphs.jsonl");
    write_graphs(out, {{head_graph("f", kAddTokens, 12, {{0, 8, 3}}), ""}});
    std::ofstream src(dir / "src.jsonl");
    src << nlohmann::json{{"sample_id", "f"}, {"source_text", "def add(a, b):\n    return a\n"}}.dump() << '\n';
  }
  EXPECT_EQ(run_eval_cst(dir / "graphs.jsonl", std::nullopt, (dir / "a_").string()).summary.processed, 0U);
  const auto run = run_eval_cst(dir / "graphs.jsonl", dir / "src.jsonl", (dir / "b_").string());
  EXPECT_EQ(run.summary.processed, 1U);
  EXPECT_EQ(run.report.tree_distance_counts.at(3), 1U);
}

TEST(RunHeadStats, QueriesAndOverallHistogram) {
  TempDir dir("heads");
  {
    std::ofstream out(dir / "graphs.jsonl");
    write_graphs(out, {{head_graph("a", {"def", "self", "return", "self"}, 3, {{0, 2, 3}, {1, 3, 2}, {0, 1, 2}}), ""}});
  }
  write_text(dir / "q.csv", "# name,src,dst,symmetric\nret,return,def,false\n");
  EXPECT_EQ(read_queries(dir / "q.csv").front().symmetric, false);
  run_head_stats(dir / "graphs.jsonl", default_pair_queries(), dir / "h.csv");
  EXPECT_EQ(lines(dir / "h.csv"),
            (std::vector<std::string>{"query,head,count", "self-self,1,0", "self-self,2,1", "self-self,3,0",
                                      "def-return,1,0", "def-return,2,0", "def-return,3,1", "all,1,0", "all,2,2",
                                      "all,3,1"}));
  run_head_stats(dir / "graphs.jsonl", read_queries(dir / "q.csv"), dir / "h2.csv");
  EXPECT_EQ(lines(dir / "h2.csv")[3], "ret,3,0");
}

TEST(RunCoincide, PooledCsv) {
  std::mt19937_64 rng(85);
  TempDir dir("coincide");
  auto task = random_task_json(rng, 6, "s");
  task["source_tokens"] = {"t0", "t1", "t2", "t3", "t4", "t5"};
  task["edges"] = nlohmann::json::array(
      {{1, 3, 0, "LAST_READ"}, {2, 4, 0, "LAST_READ"}, {0, 4, 0, "LAST_READ"}, {2, 5, 0, "LAST_READ"}});
  write_text(dir / "ref.jsonl", task.dump() + "\n");
  {
    std::ofstream out(dir / "graphs.jsonl");
    write_graphs(out, {{head_graph("s", task["source_tokens"], 12, {{3, 1, 2}, {0, 5, 2}}), ""},
                       {head_graph("other", {"x"}, 12, {}), ""}});
  }
  const auto run = run_coincide(dir / "graphs.jsonl", dir / "ref.jsonl", dir / "c.csv");
  EXPECT_EQ(run.summary.processed, 1U);
  EXPECT_EQ(run.summary.skipped(), 1U);
  EXPECT_EQ(lines(dir / "c.csv"),
            (std::vector<std::string>{"reference_type,reference_count,recovered_count,proportion",
                                      "LAST_READ,4,1,0.250000"}));
}

TEST(RunExport, GraphsAndBaseline) {
  std::mt19937_64 rng(86);
  TempDir dir("export");
  std::string text;
  for (int k = 0; k < 5; ++k) text += random_task_json(rng, 3 + k, "r" + std::to_string(k)).dump() + "\n";
  write_text(dir / "ref.jsonl", text);
  const auto tasks = ingest_records(dir / "ref.jsonl").records;
  {
    std::ofstream out(dir / "graphs.jsonl");
    std::vector<GraphSample> samples;
    for (const auto& t : tasks) samples.push_back({attngraph::testing::random_graph(rng, t.sample_id, t.source_tokens, 12), ""});
    write_graphs(out, samples);
  }
  const auto s = run_export(dir / "graphs.jsonl", dir / "ref.jsonl", dir / "out.jsonl");
  EXPECT_EQ(s.processed, 5U);
  const auto back = ingest_records(dir / "out.jsonl");
  EXPECT_EQ(back.records.size(), 5U);
  EXPECT_EQ(back.records[0].num_heads, 12U);

  const auto b = run_export(std::nullopt, dir / "ref.jsonl", dir / "base.jsonl", 12);
  EXPECT_EQ(b.processed, 5U);
  for (const auto& r : ingest_records(dir / "base.jsonl").records) {
    for (const auto& e : r.edges) EXPECT_TRUE(e.type_name == "sequence" || e.type_name == "sequence_rev");
  }
  EXPECT_THROW(run_export(std::nullopt, dir / "ref.jsonl", dir / "x.jsonl"), ArgumentError);
}

TEST(CsvField, QuotesWhenNeeded) {
  EXPECT_EQ(detail::csv_field("plain"), "plain");
  EXPECT_EQ(detail::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(detail::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}
