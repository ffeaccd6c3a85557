#include <gtest/gtest.h>

#include <random>
#include <set>
#include <vector>

#include "attngraph/arborescence.hpp"
#include "test_util.hpp"

using namespace attngraph;
using attngraph::testing::random_weights;

namespace {

SquareMatrix<double> from_edges(std::size_t n, std::initializer_list<std::tuple<std::size_t, std::size_t, double>> edges) {
  SquareMatrix<double> w(n, 0.0);
  for (const auto& [u, v, x] : edges) w(u, v) = x;
  return w;
}

// In-degree one everywhere but the root, every node reaches the root, n-1 edges.
::testing::AssertionResult is_arborescence(const ExtractedTree& t, std::size_t n) {
  if (t.edges.size() != n - 1) return ::testing::AssertionFailure() << t.edges.size() << " edges for n=" << n;
  std::vector<std::size_t> parent(n, kNoParent);
  for (const auto& e : t.edges) {
    if (e.src == e.dst) return ::testing::AssertionFailure() << "self-loop at " << e.src;
    if (e.dst == t.root) return ::testing::AssertionFailure() << "edge into root";
    if (parent[e.dst] != kNoParent) return ::testing::AssertionFailure() << "in-degree 2 at " << e.dst;
    parent[e.dst] = e.src;
  }
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t x = v;
    for (std::size_t steps = 0; x != t.root && steps <= n; ++steps) x = parent[x];
    if (x != t.root) return ::testing::AssertionFailure() << "node " << v << " does not reach the root";
  }
  return ::testing::AssertionSuccess();
}

}  // namespace

TEST(MaxArborescence, TwoNodes) {
  const WeightedDigraph g{from_edges(2, {{0, 1, 0.9}, {1, 0, 0.95}})};
  const auto t = max_arborescence(g, 0);
  ASSERT_EQ(t.edges.size(), 1U);
  EXPECT_EQ(t.edges[0], (TreeEdge{0, 1, 0.9, 0}));
  EXPECT_DOUBLE_EQ(t.total_weight(), 0.9);
}

TEST(MaxArborescence, GreedyIsOptimal) {
  const WeightedDigraph g{from_edges(3, {{0, 1, 5}, {0, 2, 1}, {1, 2, 4}, {2, 1, 2}})};
  const auto t = max_arborescence(g, 0);
  EXPECT_EQ(t.total_weight(), 9.0);
  EXPECT_EQ(t.edges[0].src, 0U);
  EXPECT_EQ(t.edges[1].src, 1U);
  EXPECT_EQ(brute_force_arborescence(g, 0).total_weight(), 9.0);
}

TEST(MaxArborescence, CycleNeedsContraction) {
  const WeightedDigraph g{from_edges(3, {{0, 1, 1}, {0, 2, 1}, {1, 2, 10}, {2, 1, 10}})};
  const auto t = max_arborescence(g, 0);
  EXPECT_TRUE(is_arborescence(t, 3));
  EXPECT_EQ(t.total_weight(), 11.0);
  EXPECT_EQ(brute_force_arborescence(g, 0).total_weight(), 11.0);
  // Tie rule: the cycle is entered at its smallest member.
  EXPECT_EQ(t.edges[0], (TreeEdge{0, 1, 1.0, 0}));
  EXPECT_EQ(t.edges[1], (TreeEdge{1, 2, 10.0, 0}));
  EXPECT_EQ(max_arborescence(g, 0).edges, t.edges);
}

TEST(MaxArborescence, NonZeroRoot) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 5;
    const WeightedDigraph g{random_weights(rng, n)};
    const std::size_t root = rng() % n;
    const auto t = max_arborescence(g, root);
    EXPECT_TRUE(is_arborescence(t, n));
    EXPECT_EQ(t.total_weight(), brute_force_arborescence(g, root).total_weight());
  }
}

TEST(MaxArborescence, SingleNodeAndErrors) {
  const WeightedDigraph one{SquareMatrix<double>(1)};
  EXPECT_TRUE(max_arborescence(one, 0).edges.empty());
  EXPECT_TRUE(brute_force_arborescence(one, 0).edges.empty());
  EXPECT_THROW(max_arborescence(WeightedDigraph{}, 0), ArgumentError);
  EXPECT_THROW(max_arborescence(one, 1), ArgumentError);
  auto bad = SquareMatrix<double>(2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(max_arborescence(WeightedDigraph{bad}, 0), ArgumentError);
}

TEST(MaxArborescence, EqualWeightsGiveForcedTotal) {
  for (std::size_t n = 1; n <= 6; ++n) {
    const WeightedDigraph g{SquareMatrix<double>(n, 0.5)};
    EXPECT_EQ(max_arborescence(g, 0).total_weight(), 0.5 * static_cast<double>(n - 1));
    EXPECT_EQ(brute_force_arborescence(g, 0).total_weight(), 0.5 * static_cast<double>(n - 1));
  }
}

TEST(MaxArborescence, ConstantShiftKeepsEdgeSet) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 6;
    auto w = random_weights(rng, n);
    const auto base = max_arborescence(WeightedDigraph{w}, 0);
    for (auto& x : w.values()) x += 3.0;
    const auto shifted = max_arborescence(WeightedDigraph{w}, 0);
    ASSERT_EQ(base.edges.size(), shifted.edges.size());
    for (std::size_t k = 0; k < base.edges.size(); ++k) EXPECT_EQ(base.edges[k].src, shifted.edges[k].src);
    EXPECT_NEAR(shifted.total_weight(), base.total_weight() + 3.0 * static_cast<double>(n - 1), 1e-9);
  }
}

// Nested cycles: every node's best in-edge points inside a tight cluster, and
// clusters prefer each other over the root.
TEST(MaxArborescence, NestedContractions) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> jitter(0.0, 0.01);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 4 + rng() % 5;
    SquareMatrix<double> w(n, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        if (u == v) continue;
        const bool same_cluster = (u % 2) == (v % 2);
        w(u, v) = (u == 0 ? 0.1 : same_cluster ? 1.0 : 0.5) + jitter(rng);
      }
    }
    const auto t = max_arborescence(WeightedDigraph{w}, 0);
    EXPECT_TRUE(is_arborescence(t, n));
    EXPECT_EQ(t.total_weight(), brute_force_arborescence(WeightedDigraph{w}, 0).total_weight());
  }
}

TEST(BruteForce, RefusesLargeGraphs) {
  EXPECT_THROW(brute_force_arborescence(WeightedDigraph{SquareMatrix<double>(9, 1.0)}, 0), ArgumentError);
  EXPECT_NO_THROW(brute_force_arborescence(WeightedDigraph{SquareMatrix<double>(6, 1.0)}, 0));
}

TEST(SymmetricTree, UsesStrongerDirection) {
  // undirected weights: {0,1}=0.9 (from 1->0), {1,2}=0.8, {0,2}=0.1
  const WeightedDigraph g{from_edges(3, {{0, 1, 0.2}, {1, 0, 0.9}, {1, 2, 0.8}, {2, 1, 0.3}, {0, 2, 0.1}})};
  const auto sym = max_spanning_tree_symmetric(g, 0);
  ASSERT_EQ(sym.tree.edges.size(), 2U);
  EXPECT_EQ(sym.tree.edges[0], (TreeEdge{0, 1, 0.9, 0}));
  EXPECT_EQ(sym.source_cells[0], (std::pair<std::size_t, std::size_t>{1, 0}));
  EXPECT_EQ(sym.tree.edges[1], (TreeEdge{1, 2, 0.8, 0}));
  EXPECT_EQ(sym.source_cells[1], (std::pair<std::size_t, std::size_t>{1, 2}));
}

TEST(SymmetricTree, IsSpanningAndMaximal) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 5;
    const auto w = random_weights(rng, n);
    const auto sym = max_spanning_tree_symmetric(WeightedDigraph{w}, 0);
    EXPECT_TRUE(is_arborescence(sym.tree, n));
    // The undirected optimum equals the best arborescence over the symmetrised matrix.
    SquareMatrix<double> s(n, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) s(u, v) = std::max(w(u, v), w(v, u));
    }
    EXPECT_NEAR(sym.tree.total_weight(), brute_force_arborescence(WeightedDigraph{s}, 0).total_weight(), 1e-12);
  }
}
