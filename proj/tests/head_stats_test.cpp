#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "attngraph/graph_build.hpp"
#include "attngraph/head_stats.hpp"
#include "test_util.hpp"

using namespace attngraph;
using attngraph::testing::head_graph;
using attngraph::testing::random_sample;
using attngraph::testing::random_tensor;

namespace {

const PairQuery kSelf{"self-self", "self", "self", true};
const PairQuery kDefReturn{"def-return", "def", "return", true};

}  // namespace

TEST(CountPairEdges, SingleSelfEdge) {
  const std::vector<ProgramGraph> corpus{
      head_graph("a", {"def", "f", "(", "self", ")", ":", "self"}, 12, {{3, 6, 6}, {0, 1, 2}})};
  const auto d = count_pair_edges(corpus, kSelf, 12);
  EXPECT_EQ(d.at_head(6), 1U);
  EXPECT_EQ(d.total, 1U);
  EXPECT_EQ(std::accumulate(d.counts.begin(), d.counts.end(), std::size_t{0}), d.total);
}

TEST(CountPairEdges, DefReturnOverThreeGraphs) {
  const std::vector<ProgramGraph> corpus{
      head_graph("a", {"def", "f", "return", "x"}, 12, {{0, 2, 10}, {0, 1, 1}}),
      head_graph("b", {"def", "g", "return"}, 12, {{2, 0, 12}}),  // reversed order still matches
      head_graph("c", {"def", "h", "pass"}, 12, {{0, 2, 4}}),
  };
  const auto d = count_pair_edges(corpus, kDefReturn, 12);
  EXPECT_EQ(d.at_head(10), 1U);
  EXPECT_EQ(d.at_head(12), 1U);
  EXPECT_EQ(d.total, 2U);

  const auto directed = count_pair_edges(corpus, {"def->return", "def", "return", false}, 12);
  EXPECT_EQ(directed.total, 1U);
  EXPECT_EQ(directed.at_head(10), 1U);
}

TEST(CountPairEdges, SequenceAndReverseEdgesIgnored) {
  auto g = head_graph("a", {"self", "self"}, 12, {});
  g = add_sequence_edges(g);
  const std::vector<ProgramGraph> corpus{g};
  EXPECT_EQ(count_pair_edges(corpus, kSelf, 12).total, 0U);
}

TEST(CountPairEdges, NoMatchAndOrderInvariance) {
  std::vector<ProgramGraph> corpus{
      head_graph("a", {"def", "return"}, 4, {{0, 1, 2}}),
      head_graph("b", {"return", "def"}, 4, {{0, 1, 3}}),
      head_graph("c", {"x", "y"}, 4, {{0, 1, 3}}),
  };
  EXPECT_EQ(count_pair_edges(corpus, {"none", "while", "break", true}, 4).total, 0U);
  const auto before = count_pair_edges(corpus, kDefReturn, 4);
  std::reverse(corpus.begin(), corpus.end());
  const auto after = count_pair_edges(corpus, kDefReturn, 4);
  EXPECT_EQ(before.counts, after.counts);
  EXPECT_EQ(before.total, 2U);
}

TEST(CountPairEdges, HeadCountMismatch) {
  const std::vector<ProgramGraph> corpus{head_graph("a", {"x", "y"}, 4, {{0, 1, 1}})};
  EXPECT_THROW(count_pair_edges(corpus, kSelf, 12), ArgumentError);
  EXPECT_THROW(count_pair_edges(corpus, {"bad", "", "x", true}, 4), ArgumentError);
}

TEST(EdgeHeadHistogram, FourNodeGraph) {
  const std::vector<ProgramGraph> corpus{head_graph("a", {"a", "b", "c", "d"}, 6, {{0, 1, 2}, {1, 2, 2}, {0, 3, 5}})};
  const auto h = edge_head_histogram(corpus, 6);
  EXPECT_EQ(h, (std::vector<std::size_t>{0, 2, 0, 0, 1, 0}));
}

TEST(EdgeHeadHistogram, EmptyCorpus) {
  EXPECT_EQ(edge_head_histogram({}, 3), (std::vector<std::size_t>(3, 0)));
}

TEST(EdgeHeadHistogram, SumsToTreeEdgesAfterMasking) {
  std::mt19937_64 rng(51);
  std::vector<ProgramGraph> corpus;
  std::size_t expected = 0;
  for (int k = 0; k < 40; ++k) {
    const std::size_t n = 1 + rng() % 10;
    auto sample = random_sample(rng, n, 2, "s" + std::to_string(k));
    if (n > 2 && k % 4 == 0) sample.word_tokens[1] = "#NEWLINE#";
    const auto tensor = random_tensor(rng, 1, 12, sample.subword_tokens.size());
    corpus.push_back(extract_graph(tensor, sample));
    // recompute independently: tree edges that avoid masked nodes
    const auto agg = aggregate_layer(tensor, sample, 1);
    const auto tree = max_arborescence(WeightedDigraph{agg.weight}, 0);
    for (const auto& e : tree.edges) {
      expected += sample.word_tokens[e.src] != "#NEWLINE#" && sample.word_tokens[e.dst] != "#NEWLINE#";
    }
  }
  const auto h = edge_head_histogram(corpus, 12);
  EXPECT_EQ(std::accumulate(h.begin(), h.end(), std::size_t{0}), expected);
}
