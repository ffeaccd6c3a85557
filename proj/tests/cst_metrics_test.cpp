#include <gtest/gtest.h>

#include <deque>
#include <random>
#include <string>
#include <vector>

#include "attngraph/cst_metrics.hpp"

using namespace attngraph;

namespace {

const std::string kAdd = "def add(a, b):\n    return a\n";
const std::vector<std::string> kAddTokens{"def", "add", "(", "a", ",", "b", ")", ":", "return", "a"};

// Intermediate nodes on the shortest leaf-to-leaf path, by breadth-first search
// over parent/child links. Independent of depth arithmetic.
std::size_t bfs_distance(const CstIndex& cst, std::size_t a, std::size_t b) {
  if (a == b) return 0;
  const auto& nodes = cst.nodes();
  std::vector<int> dist(nodes.size(), -1);
  std::deque<std::size_t> queue{a};
  dist[a] = 0;
  while (!queue.empty()) {
    const auto x = queue.front();
    queue.pop_front();
    std::vector<std::size_t> next(nodes[x].children.begin(), nodes[x].children.end());
    if (nodes[x].parent >= 0) next.push_back(static_cast<std::size_t>(nodes[x].parent));
    for (const auto y : next) {
      if (dist[y] >= 0) continue;
      dist[y] = dist[x] + 1;
      queue.push_back(y);
    }
  }
  return static_cast<std::size_t>(dist[b] - 1);
}

ProgramGraph graph_over(const std::vector<std::string>& tokens, std::vector<std::pair<std::size_t, std::size_t>> pairs,
                        int head = 1) {
  ProgramGraph g;
  g.nodes = tokens;
  g.num_heads = 12;
  const auto t = g.types();
  for (const auto& [u, v] : pairs) {
    g.edges.push_back({u, v, t.head_type(head)});
    g.edges.push_back({v, u, t.reverse_of(t.head_type(head))});
  }
  g.sort_edges();
  return g;
}

}  // namespace

TEST(ParseCst, FunctionDefinitionAndReturn) {
  const auto cst = parse_cst("def f(): return 1");
  bool has_def = false;
  bool has_return = false;
  for (const auto& n : cst.nodes()) {
    has_def |= n.type == "function_definition";
    has_return |= n.type == "return_statement";
  }
  EXPECT_TRUE(has_def);
  EXPECT_TRUE(has_return);
  EXPECT_EQ(cst.nodes().front().type, "module");
}

TEST(ParseCst, EmptySourceHasNoLeaves) {
  const auto cst = parse_cst("", {});
  EXPECT_EQ(cst.nodes().size(), 1U);
  EXPECT_EQ(cst.lexeme_count(), 0U);
}

TEST(ParseCst, SyntaxErrorThrows) { EXPECT_THROW(parse_cst("def (:"), ParseError); }

TEST(ParseCst, EveryTokenMapsToALeaf) {
  const auto cst = parse_cst(kAdd, kAddTokens);
  EXPECT_EQ(cst.token_count(), kAddTokens.size());
  EXPECT_EQ(cst.mapped_count(), kAddTokens.size());
  for (std::size_t w = 0; w < kAddTokens.size(); ++w) {
    const auto& leaf = cst.node(*cst.leaf_of(w));
    EXPECT_EQ(cst.source().substr(leaf.start, leaf.end - leaf.start), kAddTokens[w]);
  }
}

TEST(ParseCst, FormatSymbolsStayUnmapped) {
  const std::vector<std::string> tokens{"def", "f", "(", ")", ":", "#NEWLINE#", "#INDENT#", "return", "x"};
  const auto cst = parse_cst("def f():\n    return x\n", tokens);
  EXPECT_FALSE(cst.is_mapped(5));
  EXPECT_FALSE(cst.is_mapped(6));
  EXPECT_TRUE(cst.is_mapped(7));
  EXPECT_TRUE(cst.is_mapped(8));
  EXPECT_EQ(cst.mapped_count(), 7U);
}

TEST(ParseCst, CommentsAndContinuationsAreSkipped) {
  const std::vector<std::string> tokens{"x", "=", "1", "+", "2"};
  const auto cst = parse_cst("x = 1 + \\\n  2  # two\n", tokens);
  EXPECT_EQ(cst.mapped_count(), 5U);
  const auto c2 = parse_cst("# lead\nx = 1 + 2\n", tokens);
  EXPECT_EQ(c2.mapped_count(), 5U);
}

TEST(TreeDistance, DefToReturnIsThree) {
  const auto cst = parse_cst(kAdd, kAddTokens);
  EXPECT_EQ(tree_distance(cst, 0, 8), 3U);
  EXPECT_EQ(bfs_distance(cst, *cst.leaf_of(0), *cst.leaf_of(8)), 3U);
  EXPECT_EQ(last_common_parent(cst, 0, 8), "function_definition");
}

TEST(TreeDistance, SiblingsAndSelf) {
  const auto cst = parse_cst(kAdd, kAddTokens);
  EXPECT_EQ(tree_distance(cst, 3, 5), 1U);  // a, b inside parameters
  EXPECT_EQ(last_common_parent(cst, 3, 5), "parameters");
  EXPECT_EQ(tree_distance(cst, 0, 1), 1U);  // def, add under function_definition
  EXPECT_EQ(tree_distance(cst, 4, 4), 0U);
  EXPECT_EQ(last_common_parent(cst, 4, 4), "parameters");
}

TEST(TreeDistance, MatchesBreadthFirstSearch) {
  const std::string source =
      "def f(xs, k=2):\n"
      "    total = 0\n"
      "    for x in xs:\n"
      "        if x > k:\n"
      "            total += x * k\n"
      "        else:\n"
      "            total -= g(x, [1, 2])\n"
      "    return total\n";
  const std::vector<std::string> tokens{"def", "f", "(", "xs", ",", "k", "=", "2", ")", ":", "total", "=", "0",
                                        "for", "x", "in", "xs", ":", "if", "x", ">", "k", ":", "total", "+=", "x",
                                        "*", "k", "else", ":", "total", "-=", "g", "(", "x", ",", "[", "1", ",",
                                        "2", "]", ")", "return", "total"};
  const auto cst = parse_cst(source, tokens);
  ASSERT_EQ(cst.mapped_count(), tokens.size());
  for (std::size_t u = 0; u < tokens.size(); ++u) {
    for (std::size_t v = 0; v < tokens.size(); ++v) {
      const auto d = tree_distance(cst, u, v);
      EXPECT_EQ(d, bfs_distance(cst, *cst.leaf_of(u), *cst.leaf_of(v)));
      EXPECT_EQ(d, tree_distance(cst, v, u));
    }
  }
  // relaxed triangle inequality
  std::mt19937_64 rng(41);
  for (int k = 0; k < 500; ++k) {
    const auto u = rng() % tokens.size();
    const auto v = rng() % tokens.size();
    const auto w = rng() % tokens.size();
    EXPECT_LE(tree_distance(cst, u, v), tree_distance(cst, u, w) + tree_distance(cst, w, v) + 1);
  }
}

TEST(TreeDistance, IfElseFarInSequenceCloseInTree) {
  const std::vector<std::string> tokens{"if", "a", ":", "b", "=", "1", "+", "2", "else", ":", "c"};
  const auto cst = parse_cst("if a:\n    b = 1 + 2\nelse:\n    c\n", tokens);
  EXPECT_EQ(tree_distance(cst, 0, 8), 2U);  // if_statement, else_clause
  EXPECT_EQ(last_common_parent(cst, 0, 8), "if_statement");
}

TEST(TreeDistance, UnmappedTokenThrows) {
  const std::vector<std::string> tokens{"def", "f", "(", ")", ":", "#NEWLINE#", "return", "x"};
  const auto cst = parse_cst("def f():\n    return x\n", tokens);
  EXPECT_THROW(tree_distance(cst, 0, 5), AlignmentError);
}

TEST(EvaluateGraph, SingleDefReturnEdge) {
  const auto cst = parse_cst(kAdd, kAddTokens);
  const auto report = evaluate_graph(graph_over(kAddTokens, {{0, 8}}), cst);
  ASSERT_EQ(report.evaluated(), 1U);
  EXPECT_EQ(report.edges[0], (EdgeEvaluation{0, 8, 3, 8, "function_definition"}));
}

TEST(EvaluateGraph, EmptyGraph) {
  const auto cst = parse_cst(kAdd, kAddTokens);
  const auto report = evaluate_graph(graph_over(kAddTokens, {}), cst);
  EXPECT_EQ(report.evaluated(), 0U);
  EXPECT_TRUE(report.tree_distance_counts.empty());
  EXPECT_TRUE(report.joint_counts.empty());
  EXPECT_TRUE(report.parent_type_counts.empty());
}

TEST(EvaluateGraph, HandBuiltThreeEdges) {
  const auto cst = parse_cst(kAdd, kAddTokens);
  // def -> return, a -> b, add -> a (the returned a)
  auto g = graph_over(kAddTokens, {{0, 8}, {3, 5}, {1, 9}});
  // sequence edges are not evaluated
  g.edges.push_back({0, 1, g.types().sequence_type()});
  g.edges.push_back({1, 0, g.types().reverse_of(g.types().sequence_type())});
  g.sort_edges();
  const auto report = evaluate_graph(g, cst);
  EXPECT_EQ(report.evaluated(), 3U);
  EXPECT_EQ(report.tree_distance_counts, (std::map<std::size_t, std::size_t>{{1, 1}, {3, 2}}));
  EXPECT_EQ(report.joint_counts, (std::map<std::pair<std::size_t, std::size_t>, std::size_t>{{{1, 2}, 1}, {{3, 8}, 2}}));
  EXPECT_EQ(report.parent_type_counts,
            (std::map<std::string, std::size_t>{{"function_definition", 2}, {"parameters", 1}}));
  EXPECT_EQ(report.top_parent_types(1), (std::vector<std::pair<std::string, std::size_t>>{{"function_definition", 2}}));

  std::size_t total = 0;
  for (const auto& [d, c] : report.tree_distance_counts) total += c;
  EXPECT_EQ(total, report.evaluated());
}

TEST(EvaluateGraph, UnmappedEdgesAreTallied) {
  const std::vector<std::string> tokens{"def", "f", "(", ")", ":", "#NEWLINE#", "return", "x"};
  const auto cst = parse_cst("def f():\n    return x\n", tokens);
  const auto report = evaluate_graph(graph_over(tokens, {{0, 6}, {4, 5}}), cst);
  EXPECT_EQ(report.evaluated(), 1U);
  EXPECT_EQ(report.unmapped_edges, 1U);
}

TEST(CstReport, MergeAddsCounts) {
  const auto cst = parse_cst(kAdd, kAddTokens);
  auto a = evaluate_graph(graph_over(kAddTokens, {{0, 8}}), cst);
  const auto b = evaluate_graph(graph_over(kAddTokens, {{3, 5}, {1, 9}}), cst);
  a.merge(b);
  EXPECT_EQ(a.evaluated(), 3U);
  EXPECT_EQ(a.tree_distance_counts.at(3), 2U);
  EXPECT_EQ(a.parent_type_counts.at("parameters"), 1U);
}
