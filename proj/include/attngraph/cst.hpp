#pragma once

// Concrete syntax trees from the tree-sitter Python grammar. Node type strings
// are the grammar's own ("function_definition", "parameters", "return", ...).

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <tree_sitter/api.h>

#include "attngraph/errors.hpp"

extern "C" const TSLanguage* tree_sitter_python();

namespace attngraph {

struct CstNode {
  std::string type;
  std::size_t start = 0;  // byte span [start, end)
  std::size_t end = 0;
  int parent = -1;
  std::size_t depth = 0;
  bool named = false;
  std::vector<std::size_t> children;
};

/// Parsed source plus the word-token -> CST node alignment.
///
/// Nodes are stored in preorder; node 0 is the root. `leaf_of[w]` is the node
/// whose byte span equals word token w, or empty for tokens that have no
/// lexeme in the source (synthetic format symbols, tokenizer artefacts).
class CstIndex {
 public:
  const std::vector<CstNode>& nodes() const noexcept { return nodes_; }
  const CstNode& node(std::size_t k) const { return nodes_.at(k); }
  const std::string& source() const noexcept { return source_; }

  std::size_t token_count() const noexcept { return leaf_of_.size(); }
  std::optional<std::size_t> leaf_of(std::size_t token) const {
    return token < leaf_of_.size() ? leaf_of_[token] : std::nullopt;
  }
  bool is_mapped(std::size_t token) const { return leaf_of(token).has_value(); }

  std::size_t mapped_count() const {
    std::size_t count = 0;
    for (const auto& leaf : leaf_of_) count += leaf.has_value() ? 1 : 0;
    return count;
  }

  // Count of childless nodes other than comments.
  std::size_t lexeme_count() const {
    std::size_t count = 0;
    for (const auto& n : nodes_) count += (n.children.empty() && n.type != "comment" && n.end > n.start) ? 1 : 0;
    return count;
  }

  std::size_t lowest_common_ancestor(std::size_t a, std::size_t b) const {
    while (nodes_[a].depth > nodes_[b].depth) a = static_cast<std::size_t>(nodes_[a].parent);
    while (nodes_[b].depth > nodes_[a].depth) b = static_cast<std::size_t>(nodes_[b].parent);
    while (a != b) {
      a = static_cast<std::size_t>(nodes_[a].parent);
      b = static_cast<std::size_t>(nodes_[b].parent);
    }
    return a;
  }

  // Aligns word tokens to lexemes: each token is searched at the cursor after
  // skipping whitespace, line continuations and comments. Tokens whose text
  // is not found there stay unmapped and do not move the cursor; text that
  // matches without an exact node span is consumed but left unmapped.
  void align(const std::vector<std::string>& tokens);

  friend CstIndex parse_cst(std::string source_text);

 private:
  std::string source_;
  std::vector<CstNode> nodes_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> by_span_;  // deepest node per span
  std::map<std::size_t, std::size_t> comments_;                         // start -> end
  std::vector<std::optional<std::size_t>> leaf_of_;
};

namespace detail {

struct TsParserDeleter {
  void operator()(TSParser* p) const { ts_parser_delete(p); }
};
struct TsTreeDeleter {
  void operator()(TSTree* t) const { ts_tree_delete(t); }
};

}  // namespace detail

// Throws ParseError when the grammar reports syntax errors.
inline CstIndex parse_cst(std::string source_text) {
  std::unique_ptr<TSParser, detail::TsParserDeleter> parser(ts_parser_new());
  if (!ts_parser_set_language(parser.get(), tree_sitter_python())) {
    throw Error("tree-sitter rejected the Python grammar (ABI mismatch)");
  }
  std::unique_ptr<TSTree, detail::TsTreeDeleter> tree(ts_parser_parse_string(
      parser.get(), nullptr, source_text.data(), static_cast<std::uint32_t>(source_text.size())));
  if (!tree) throw ParseError("tree-sitter produced no tree");
  const TSNode root = ts_tree_root_node(tree.get());
  if (ts_node_has_error(root)) throw ParseError("source does not parse as Python");

  CstIndex index;
  index.source_ = std::move(source_text);

  struct Frame {
    TSNode node;
    int parent;
    std::size_t depth;
  };
  std::vector<Frame> stack{{root, -1, 0}};
  while (!stack.empty()) {
    const Frame frame = stack.back();
    stack.pop_back();
    const std::size_t id = index.nodes_.size();
    CstNode node;
    node.type = ts_node_type(frame.node);
    node.start = ts_node_start_byte(frame.node);
    node.end = ts_node_end_byte(frame.node);
    node.parent = frame.parent;
    node.depth = frame.depth;
    node.named = ts_node_is_named(frame.node);
    index.nodes_.push_back(std::move(node));
    if (frame.parent >= 0) index.nodes_[static_cast<std::size_t>(frame.parent)].children.push_back(id);

    const auto& stored = index.nodes_[id];
    if (stored.type == "comment") index.comments_[stored.start] = stored.end;
    if (stored.end > stored.start) index.by_span_[{stored.start, stored.end}] = id;  // preorder: deeper wins

    const std::uint32_t count = ts_node_child_count(frame.node);
    for (std::uint32_t k = count; k-- > 0;) {
      stack.push_back({ts_node_child(frame.node, k), static_cast<int>(id), frame.depth + 1});
    }
  }
  return index;
}

inline void CstIndex::align(const std::vector<std::string>& tokens) {
  leaf_of_.assign(tokens.size(), std::nullopt);
  std::size_t cursor = 0;
  auto skip_trivia = [&](std::size_t pos) {
    while (pos < source_.size()) {
      const unsigned char c = static_cast<unsigned char>(source_[pos]);
      if (std::isspace(c)) {
        ++pos;
      } else if (c == '\\' && pos + 1 < source_.size() && (source_[pos + 1] == '\n' || source_[pos + 1] == '\r')) {
        pos += 2;
      } else if (const auto it = comments_.find(pos); it != comments_.end()) {
        pos = it->second;
      } else {
        break;
      }
    }
    return pos;
  };
  for (std::size_t w = 0; w < tokens.size(); ++w) {
    const std::string& token = tokens[w];
    if (token.empty()) continue;
    const std::size_t start = skip_trivia(cursor);
    if (source_.compare(start, token.size(), token) != 0) continue;
    const std::size_t end = start + token.size();
    cursor = end;
    if (const auto it = by_span_.find({start, end}); it != by_span_.end()) leaf_of_[w] = it->second;
  }
}

inline CstIndex parse_cst(std::string source_text, const std::vector<std::string>& word_tokens) {
  CstIndex index = parse_cst(std::move(source_text));
  index.align(word_tokens);
  return index;
}

}  // namespace attngraph
