#include <gtest/gtest.h>

#include <random>
#include <set>
#include <string>
#include <vector>

#include "attngraph/graph_build.hpp"
#include "test_util.hpp"

using namespace attngraph;
using attngraph::testing::identity_sample;
using attngraph::testing::random_sample;
using attngraph::testing::random_tensor;

namespace {

std::vector<std::string> words(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(i));
  return out;
}

std::size_t count_type(const ProgramGraph& g, auto predicate) {
  std::size_t c = 0;
  for (const auto& e : g.edges) c += predicate(e.type) ? 1 : 0;
  return c;
}

// head 7 everywhere, strongest chain 0 -> 1 -> 2 -> ...
AggregatedMatrix chain_matrix(std::size_t n, std::size_t heads, int head) {
  AggregatedMatrix agg;
  agg.layer = 1;
  agg.num_heads = heads;
  agg.weight = SquareMatrix<double>(n, 0.1);
  agg.head_id = SquareMatrix<int>(n, head);
  for (std::size_t i = 0; i + 1 < n; ++i) agg.weight(i, i + 1) = 0.9;
  return agg;
}

}  // namespace

TEST(EdgeTypeTable, NumberingForTwelveHeads) {
  const EdgeTypeTable t{12};
  EXPECT_EQ(t.type_count(), 26U);
  EXPECT_EQ(t.head_type(1), 0);
  EXPECT_EQ(t.head_type(12), 11);
  EXPECT_EQ(t.sequence_type(), 12);
  EXPECT_EQ(t.reverse_of(0), 13);
  EXPECT_EQ(t.reverse_of(12), 25);
  EXPECT_EQ(t.reverse_of(25), 12);
  EXPECT_EQ(t.name(6), "head_7");
  EXPECT_EQ(t.name(t.reverse_of(6)), "head_7_rev");
  EXPECT_EQ(t.name(12), "sequence");
  EXPECT_EQ(t.name(25), "sequence_rev");
  EXPECT_EQ(t.head_of(19), 7);
  EXPECT_EQ(t.head_of(12), 0);
  EXPECT_FALSE(t.valid(26));
  EXPECT_THROW(t.head_type(13), ArgumentError);
  EXPECT_THROW(t.name(-1), ArgumentError);
}

TEST(BuildGraph, FiveWordCounts) {
  std::mt19937_64 rng(31);
  const auto sample = random_sample(rng, 5, 2);
  const auto tensor = random_tensor(rng, 2, 12, sample.subword_tokens.size());
  const auto g = extract_graph(tensor, sample);
  EXPECT_EQ(g.edges.size(), 16U);
  const auto table = g.types();
  EXPECT_EQ(count_type(g, [&](int t) { return table.is_head(t); }), 4U);
  EXPECT_EQ(count_type(g, [&](int t) { return t == table.sequence_type(); }), 4U);
  EXPECT_EQ(count_type(g, [&](int t) { return table.is_reverse(t); }), 8U);
  EXPECT_NO_THROW(validate_graph(g));
  EXPECT_TRUE(std::is_sorted(g.edges.begin(), g.edges.end()));
}

TEST(BuildGraph, HeadSevenTyping) {
  const auto sample = identity_sample(words(3));
  ExtractionConfig config;
  config.sequence_edges = false;
  const auto g = build_graph(chain_matrix(3, 12, 7), sample, config);
  ASSERT_EQ(g.edges.size(), 4U);
  const auto table = g.types();
  EXPECT_EQ(g.edges[0], (GraphEdge{0, 1, 6}));
  EXPECT_EQ(table.name(g.edges[0].type), "head_7");
  EXPECT_EQ(g.edges[1], (GraphEdge{1, 0, 19}));
  EXPECT_EQ(table.name(g.edges[1].type), "head_7_rev");
}

TEST(BuildGraph, HeadIdComesFromTheTreeCell) {
  const auto sample = identity_sample(words(3));
  auto agg = chain_matrix(3, 4, 1);
  agg.head_id(0, 1) = 3;
  agg.head_id(1, 0) = 2;  // reverse cell must not matter
  agg.head_id(1, 2) = 4;
  ExtractionConfig config;
  config.sequence_edges = false;
  const auto g = build_graph(agg, sample, config);
  EXPECT_EQ(g.edges, (std::vector<GraphEdge>{{0, 1, 2}, {1, 0, 7}, {1, 2, 3}, {2, 1, 8}}));
}

TEST(BuildGraph, MaskedNewlineDropsIncidentEdges) {
  const auto sample = identity_sample({"def", "f", ":", "#NEWLINE#", "return"});
  const auto g = build_graph(chain_matrix(5, 12, 1), sample);
  EXPECT_EQ(g.masked_nodes, (std::set<std::size_t>{3}));
  EXPECT_EQ(g.nodes[3], "#NEWLINE#");
  for (const auto& e : g.edges) {
    EXPECT_NE(e.src, 3U);
    EXPECT_NE(e.dst, 3U);
  }
  // chain tree 0-1-2-3-4 loses 2->3 and 3->4; sequence loses (2,3) and (3,4)
  EXPECT_EQ(g.forward_edge_count(), 4U);
  EXPECT_NO_THROW(validate_graph(g));

  ExtractionConfig across;
  across.sequence_across_masks = true;
  const auto joined = build_graph(chain_matrix(5, 12, 1), sample, across);
  EXPECT_EQ(joined.forward_edge_count(), 5U);
  EXPECT_NE(std::find(joined.edges.begin(), joined.edges.end(), GraphEdge{2, 4, 12}), joined.edges.end());
}

TEST(BuildGraph, DeterministicAndPure) {
  std::mt19937_64 rng(32);
  const auto sample = random_sample(rng, 9, 3);
  const auto tensor = random_tensor(rng, 3, 6, sample.subword_tokens.size());
  for (const auto mode : {ExtractionMode::arborescence, ExtractionMode::symmetric_mst}) {
    ExtractionConfig config;
    config.mode = mode;
    EXPECT_EQ(extract_graph(tensor, sample, config), extract_graph(tensor, sample, config));
  }
}

TEST(BuildGraph, RandomGraphsKeepInvariants) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    auto sample = random_sample(rng, n, 2);
    if (n > 3 && trial % 3 == 0) sample.word_tokens[rng() % n] = "#INDENT#";
    const auto tensor = random_tensor(rng, 1, 12, sample.subword_tokens.size());
    ExtractionConfig config;
    config.mode = trial % 2 ? ExtractionMode::arborescence : ExtractionMode::symmetric_mst;
    config.root = RootPolicy{rng() % n};
    const auto g = extract_graph(tensor, sample, config);
    EXPECT_NO_THROW(validate_graph(g));
    std::set<int> types;
    for (const auto& e : g.edges) types.insert(e.type);
    EXPECT_LE(types.size(), 26U);
    if (g.masked_nodes.empty()) {
      EXPECT_EQ(g.edges.size(), 4 * (n - 1));
    } else {
      EXPECT_LT(g.edges.size(), 4 * (n - 1));
    }
  }
}

TEST(BuildGraph, DimensionMismatch) {
  const auto sample = identity_sample(words(4));
  EXPECT_THROW(build_graph(chain_matrix(3, 2, 1), sample), ValidationError);
}

TEST(BuildGraph, RootPolicy) {
  EXPECT_EQ(RootPolicy::parse("first").resolve(3), 0U);
  EXPECT_EQ(RootPolicy::parse("2").resolve(3), 2U);
  EXPECT_THROW(RootPolicy::parse("2").resolve(2), ArgumentError);
  EXPECT_THROW(RootPolicy::parse("x"), ArgumentError);
  EXPECT_EQ(RootPolicy::parse("4").to_string(), "4");
  ExtractionConfig c;
  EXPECT_EQ(c.resolve_layer(12), 12U);
  c.layer = 13;
  EXPECT_THROW(c.resolve_layer(12), ArgumentError);
}

TEST(MaskFormatSymbols, Examples) {
  const auto sample = identity_sample({"def", "f", ":", "#NEWLINE#", "return"});
  EXPECT_EQ(mask_format_symbols(sample, default_mask_symbols()), (std::set<std::size_t>{3}));
  EXPECT_TRUE(mask_format_symbols(sample, {}).empty());
  EXPECT_TRUE(mask_format_symbols(identity_sample(words(4)), default_mask_symbols()).empty());
}

TEST(SequenceEdges, ThreeNodes) {
  ProgramGraph g;
  g.nodes = words(3);
  g.num_heads = 12;
  const auto s = add_sequence_edges(g);
  EXPECT_EQ(s.edges, (std::vector<GraphEdge>{{0, 1, 12}, {1, 0, 25}, {1, 2, 12}, {2, 1, 25}}));
  // idempotent: existing edges are not duplicated
  EXPECT_EQ(add_sequence_edges(s), s);
}

TEST(SequenceEdges, MaskedMiddleNode) {
  ProgramGraph g;
  g.nodes = words(3);
  g.num_heads = 12;
  g.masked_nodes = {1};
  EXPECT_TRUE(add_sequence_edges(g).edges.empty());
  EXPECT_EQ(add_sequence_edges(g, true).edges.size(), 2U);
}

TEST(SequenceEdges, BaselineHasTwoTypes) {
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto g = sequence_baseline("s", words(n), 12);
    EXPECT_EQ(g.edges.size(), 2 * (n - 1));
    std::set<int> types;
    for (const auto& e : g.edges) types.insert(e.type);
    EXPECT_EQ(types.size(), n > 1 ? 2U : 0U);
    EXPECT_NO_THROW(validate_graph(g));
  }
}

TEST(ValidateGraph, RejectsBrokenInvariants) {
  ProgramGraph g;
  g.nodes = words(3);
  g.num_heads = 2;
  g.edges = {{0, 1, 0}};
  EXPECT_THROW(validate_graph(g), ValidationError);  // missing reverse
  g.edges = {{0, 0, 0}, {0, 0, 3}};
  EXPECT_THROW(validate_graph(g), ValidationError);  // reflexive
  g.edges = {{0, 5, 0}, {5, 0, 3}};
  EXPECT_THROW(validate_graph(g), ValidationError);  // out of range
  g.edges = {{0, 1, 6}, {1, 0, 0}};
  EXPECT_THROW(validate_graph(g), ValidationError);  // bad type
  g.edges = {{0, 1, 0}, {1, 0, 3}};
  EXPECT_NO_THROW(validate_graph(g));
  g.masked_nodes = {1};
  EXPECT_THROW(validate_graph(g), ValidationError);
}
