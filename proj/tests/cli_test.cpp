#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <sys/wait.h>

#include "attngraph/graph_io.hpp"
#include "test_util.hpp"

using attngraph::testing::random_task_json;
using attngraph::testing::TempDir;
using attngraph::testing::write_corpus;

namespace {

int run(const std::string& args) {
  const std::string command = std::string(ATTNGRAPH_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, ExtractDeterministicAcrossWorkers) {
  std::mt19937_64 rng(91);
  TempDir dir("cli");
  std::filesystem::create_directories(dir / "in");
  write_corpus(rng, dir / "in", 20);
  ASSERT_EQ(run("extract " + q(dir / "in") + " --out " + q(dir / "a.jsonl") + " --workers 1"), 0);
  ASSERT_EQ(run("extract " + q(dir / "in") + " --out " + q(dir / "b.jsonl") + " --workers 8"), 0);
  EXPECT_EQ(slurp(dir / "a.jsonl"), slurp(dir / "b.jsonl"));
  EXPECT_FALSE(slurp(dir / "a.jsonl").empty());
}

TEST(Cli, EnvWorkers) {
  std::mt19937_64 rng(92);
  TempDir dir("cli");
  std::filesystem::create_directories(dir / "in");
  write_corpus(rng, dir / "in", 6);
  const std::string command = "ATTNGRAPH_WORKERS=3 " + std::string(ATTNGRAPH_CLI) + " extract " + q(dir / "in") +
                              " --out " + q(dir / "g.jsonl") + " >/dev/null 2>&1";
  EXPECT_EQ(WEXITSTATUS(std::system(command.c_str())), 0);
  EXPECT_EQ(attngraph::read_graphs(dir / "g.jsonl").size(), 6U);
}

TEST(Cli, ConfigFileAndFlagsOverride) {
  std::mt19937_64 rng(93);
  TempDir dir("cli");
  std::filesystem::create_directories(dir / "in");
  write_corpus(rng, dir / "in", 3, 3);
  {
    std::ofstream cfg(dir / "run.ini");
    cfg << "layer=1\nmode=symmetric-mst\nsequence-edges=false\n";
  }
  ASSERT_EQ(run("--config " + q(dir / "run.ini") + " extract " + q(dir / "in") + " --out " + q(dir / "g.jsonl")), 0);
  auto manifest = nlohmann::json::parse(slurp(dir / "g.jsonl.manifest.json"));
  EXPECT_EQ(manifest["config"]["layer"], 1);
  EXPECT_EQ(manifest["config"]["mode"], "symmetric-mst");
  EXPECT_EQ(manifest["config"]["sequence_edges"], false);

  ASSERT_EQ(run("--config " + q(dir / "run.ini") + " extract " + q(dir / "in") + " --out " + q(dir / "g.jsonl") +
                " --layer 2"),
            0);
  manifest = nlohmann::json::parse(slurp(dir / "g.jsonl.manifest.json"));
  EXPECT_EQ(manifest["config"]["layer"], 2);
}

TEST(Cli, ErrorsGiveNonZeroExit) {
  TempDir dir("cli");
  std::filesystem::create_directories(dir / "empty");
  EXPECT_EQ(run("extract " + q(dir / "empty") + " --out " + q(dir / "g.jsonl")), 1);
  EXPECT_NE(run("extract " + q(dir / "missing") + " --out " + q(dir / "g.jsonl")), 0);
  EXPECT_NE(run(""), 0);
  EXPECT_NE(run("frobnicate"), 0);
  std::filesystem::create_directories(dir / "in");
  std::mt19937_64 rng(94);
  write_corpus(rng, dir / "in", 2);
  EXPECT_EQ(run("extract " + q(dir / "in") + " --out " + q(dir / "g.jsonl") + " --reduction sum"), 2);
  EXPECT_EQ(run("extract " + q(dir / "in") + " --out " + q(dir / "g.jsonl") + " --layer 99"), 1);  // all skipped
}

TEST(Cli, FullWorkflow) {
  std::mt19937_64 rng(95);
  TempDir dir("cli");
  std::filesystem::create_directories(dir / "in");
  const auto samples = write_corpus(rng, dir / "in", 8);
  {
    std::ofstream ref(dir / "ref.jsonl");
    for (const auto& s : samples) {
      auto j = random_task_json(rng, s.word_tokens.size(), s.sample_id);
      j["source_tokens"] = s.word_tokens;
      ref << j.dump() << '\n';
    }
  }
  const auto g = q(dir / "g.jsonl");
  ASSERT_EQ(run("extract " + q(dir / "in") + " --out " + g), 0);
  EXPECT_EQ(run("profile " + q(dir / "in") + " --out " + q(dir / "p.csv")), 0);
  EXPECT_EQ(run("head-stats --graphs " + g + " --out " + q(dir / "h.csv")), 0);
  EXPECT_EQ(run("coincide --graphs " + g + " --reference " + q(dir / "ref.jsonl") + " --out " + q(dir / "c.csv")), 0);
  EXPECT_EQ(run("export --graphs " + g + " --reference " + q(dir / "ref.jsonl") + " --out " + q(dir / "x.jsonl")), 0);
  EXPECT_EQ(run("export --baseline sequence --reference " + q(dir / "ref.jsonl") + " --out " + q(dir / "s.jsonl")), 0);
  // only the one-word sample ("w0") parses as Python; the rest are skipped
  EXPECT_EQ(run("eval-cst --graphs " + g + " --out-prefix " + q(dir / "cst_")), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "cst_tree_distance.csv"));
  EXPECT_NE(slurp(dir / "h.csv").find("self-self,1,"), std::string::npos);
  EXPECT_NE(slurp(dir / "c.csv").find("reference_type,reference_count"), std::string::npos);
}
