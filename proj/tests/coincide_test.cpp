#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "attngraph/coincide.hpp"
#include "attngraph/graph_build.hpp"
#include "test_util.hpp"

using namespace attngraph;
using attngraph::testing::head_graph;

namespace {

std::vector<std::string> tokens(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("t" + std::to_string(i));
  return out;
}

ReferenceGraph reference(std::size_t n, std::vector<ReferenceEdge> edges) {
  return {"s", tokens(n), std::move(edges)};
}

}  // namespace

TEST(Coincidence, IdentityRecoversEverything) {
  const auto extracted = head_graph("s", tokens(5), 12, {{0, 1, 1}, {1, 2, 3}, {1, 4, 3}, {0, 3, 9}});
  const auto ref = reference(5, {{0, 1, "NEXT_TOKEN"}, {1, 2, "LAST_READ"}, {4, 1, "LAST_WRITE"}, {0, 3, "LAST_READ"}});
  const auto r = coincidence(extracted, ref);
  for (const auto& [type, c] : r.by_type) EXPECT_EQ(c.proportion(), 1.0) << type;
  EXPECT_EQ(r.unique_extracted_count, 0U);
  EXPECT_EQ(r.extracted_edges, 4U);
}

TEST(Coincidence, DisjointRecoversNothing) {
  const auto extracted = head_graph("s", tokens(5), 12, {{0, 1, 1}, {1, 2, 1}});
  const auto ref = reference(5, {{2, 3, "LAST_READ"}, {3, 4, "COMPUTED_FROM"}});
  const auto r = coincidence(extracted, ref);
  EXPECT_EQ(r.by_type.at("LAST_READ").proportion(), 0.0);
  EXPECT_EQ(r.by_type.at("COMPUTED_FROM").proportion(), 0.0);
  EXPECT_EQ(r.unique_extracted_count, 2U);
}

TEST(Coincidence, QuarterOverlap) {
  const auto extracted = head_graph("s", tokens(6), 12, {{3, 1, 2}, {0, 5, 2}});
  const auto ref = reference(6, {{1, 3, "LAST_READ"}, {2, 4, "LAST_READ"}, {0, 4, "LAST_READ"}, {2, 5, "LAST_READ"}});
  const auto r = coincidence(extracted, ref);
  const auto& c = r.by_type.at("LAST_READ");
  EXPECT_EQ(c.reference_count, 4U);
  EXPECT_EQ(c.recovered_count, 1U);
  EXPECT_EQ(c.proportion(), 0.25);
  EXPECT_EQ(r.unique_extracted_count, 1U);
}

TEST(Coincidence, SequenceEdgesExcludedByDefault) {
  const auto extracted = add_sequence_edges(head_graph("s", tokens(3), 12, {}));
  const auto ref = reference(3, {{0, 1, "NEXT_SYNTAX"}});
  EXPECT_EQ(coincidence(extracted, ref).by_type.at("NEXT_SYNTAX").proportion(), 0.0);
  EXPECT_EQ(coincidence(extracted, ref, {true}).by_type.at("NEXT_SYNTAX").proportion(), 1.0);
}

TEST(Coincidence, ExtractedAgainstItselfAsReference) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 10;
    std::vector<attngraph::testing::HeadEdge> edges;
    for (std::size_t v = 1; v < n; ++v) edges.push_back({rng() % v, v, static_cast<int>(1 + rng() % 12)});
    const auto g = head_graph("s", tokens(n), 12, edges);
    ReferenceGraph ref{"s", g.nodes, {}};
    for (const auto& e : g.edges) {
      if (!g.types().is_reverse(e.type)) ref.edges.push_back({e.src, e.dst, g.types().name(e.type)});
    }
    std::shuffle(ref.edges.begin(), ref.edges.end(), rng);
    const auto r = coincidence(g, ref);
    for (const auto& [type, c] : r.by_type) EXPECT_EQ(c.proportion(), 1.0);
    EXPECT_EQ(r.unique_extracted_count, 0U);
  }
}

TEST(Coincidence, NodeMismatchIsAlignmentError) {
  const auto extracted = head_graph("s", tokens(3), 12, {{0, 1, 1}});
  EXPECT_THROW(coincidence(extracted, reference(4, {})), AlignmentError);
  EXPECT_THROW(coincidence(extracted, reference(3, {{0, 7, "X"}})), AlignmentError);
}

TEST(Coincidence, MergePoolsPerEdge) {
  auto a = coincidence(head_graph("s", tokens(3), 12, {{0, 1, 1}}), reference(3, {{0, 1, "T"}}));
  const auto b = coincidence(head_graph("s", tokens(3), 12, {}), reference(3, {{0, 1, "T"}, {1, 2, "T"}, {0, 2, "T"}}));
  a.merge(b);
  EXPECT_EQ(a.by_type.at("T").reference_count, 4U);
  EXPECT_EQ(a.by_type.at("T").recovered_count, 1U);
  EXPECT_EQ(a.by_type.at("T").proportion(), 0.25);
}

TEST(Coincidence, EmptyTypeProportionIsZero) { EXPECT_EQ(TypeCoincidence{}.proportion(), 0.0); }

TEST(GraphSizeStats, SequenceOnlyGraph) {
  const std::vector<ProgramGraph> one{sequence_baseline("s", tokens(5), 12)};
  const auto s = graph_size_stats(std::span<const ProgramGraph>(one));
  EXPECT_EQ(s.edge_type_count, 2U);
  EXPECT_EQ(s.avg_edges, 8.0);
}

TEST(GraphSizeStats, TwoGraphMean) {
  const std::vector<ProgramGraph> corpus{head_graph("a", tokens(3), 12, {{0, 1, 1}, {1, 2, 2}}),
                                         head_graph("b", tokens(2), 12, {{0, 1, 5}})};
  const auto s = graph_size_stats(std::span<const ProgramGraph>(corpus));
  EXPECT_EQ(s.avg_edges, (4.0 + 2.0) / 2);
  EXPECT_EQ(s.edge_type_count, 6U);
  EXPECT_THROW(graph_size_stats(std::span<const ProgramGraph>()), ArgumentError);
}

TEST(GraphSizeStats, ReferenceGraphs) {
  const std::vector<ReferenceGraph> corpus{reference(3, {{0, 1, "A"}, {1, 2, "B"}}), reference(3, {{0, 2, "A"}})};
  const auto s = graph_size_stats(std::span<const ReferenceGraph>(corpus));
  EXPECT_EQ(s.edge_type_count, 2U);
  EXPECT_EQ(s.avg_edges, 1.5);
  const auto doubled = graph_size_stats(std::span<const ReferenceGraph>(corpus), true);
  EXPECT_EQ(doubled.edge_type_count, 4U);
  EXPECT_EQ(doubled.avg_edges, 3.0);
}
