#pragma once

// Synthetic inputs shared by the test suites. Everything is seeded.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "attngraph/attn_io.hpp"
#include "attngraph/attn_model.hpp"
#include "attngraph/matrix.hpp"
#include "attngraph/graph_build.hpp"
#include "attngraph/program_graph.hpp"
#include "attngraph/task_records.hpp"

namespace attngraph::testing {

// Words w0..w{n-1}, each split into 1..max_pieces subwords, wrapped in
// <s> ... </s> special tokens.
inline TokenizedSample random_sample(std::mt19937_64& rng, std::size_t n_words, std::size_t max_pieces = 3,
                                     std::string id = "sample") {
  TokenizedSample s;
  s.sample_id = std::move(id);
  std::uniform_int_distribution<std::size_t> pieces(1, max_pieces);
  s.subword_tokens.push_back("<s>");
  s.alignment.push_back(kSpecialToken);
  for (std::size_t w = 0; w < n_words; ++w) {
    s.word_tokens.push_back("w" + std::to_string(w));
    const std::size_t k = pieces(rng);
    for (std::size_t p = 0; p < k; ++p) {
      s.subword_tokens.push_back("w" + std::to_string(w) + "_" + std::to_string(p));
      s.alignment.push_back(static_cast<std::int32_t>(w));
    }
  }
  s.subword_tokens.push_back("</s>");
  s.alignment.push_back(kSpecialToken);
  for (std::size_t w = 0; w < n_words; ++w) s.source_text += (w ? " " : "") + s.word_tokens[w];
  return s;
}

// One subword per word, no special tokens.
inline TokenizedSample identity_sample(const std::vector<std::string>& words, std::string id = "sample") {
  TokenizedSample s;
  s.sample_id = std::move(id);
  s.word_tokens = words;
  s.subword_tokens = words;
  for (std::size_t w = 0; w < words.size(); ++w) s.alignment.push_back(static_cast<std::int32_t>(w));
  return s;
}

// Row-stochastic tensor with independent random rows.
inline AttentionTensor random_tensor(std::mt19937_64& rng, std::size_t layers, std::size_t heads, std::size_t n) {
  AttentionTensor t(layers, heads, n, "test-model");
  std::uniform_real_distribution<float> u(0.0F, 1.0F);
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < n; ++i) {
        auto row = t.row(l, h, i);
        float sum = 0.0F;
        for (auto& v : row) sum += (v = u(rng) + 1e-3F);
        for (auto& v : row) v /= sum;
      }
    }
  }
  return t;
}

// Every row puts all of its mass on column target(i).
template <typename Target>
AttentionTensor one_hot_tensor(std::size_t layers, std::size_t heads, std::size_t n, Target target) {
  AttentionTensor t(layers, heads, n);
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < n; ++i) t.at(l, h, i, target(i)) = 1.0F;
    }
  }
  return t;
}

inline SquareMatrix<double> random_weights(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SquareMatrix<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) w(i, j) = i == j ? 0.0 : u(rng);
  }
  return w;
}

struct HeadEdge {
  std::size_t src;
  std::size_t dst;
  int head;  // 1-based
};

// Graph with the given head-typed forward edges plus their reverses.
inline ProgramGraph head_graph(std::string id, std::vector<std::string> nodes, std::size_t num_heads,
                               const std::vector<HeadEdge>& edges) {
  ProgramGraph g;
  g.sample_id = std::move(id);
  g.nodes = std::move(nodes);
  g.num_heads = num_heads;
  const auto table = g.types();
  for (const auto& e : edges) {
    g.edges.push_back({e.src, e.dst, table.head_type(e.head)});
    g.edges.push_back({e.dst, e.src, table.reverse_of(table.head_type(e.head))});
  }
  g.sort_edges();
  return g;
}

// Task record in the published layout: random tokens, reference edges drawn
// from a fixed type list, labels, and one unrecognised key.
inline nlohmann::json random_task_json(std::mt19937_64& rng, std::size_t n, const std::string& id) {
  static const std::vector<std::string> vocab{"def", "self", "return", "x", "(", ")", ":", "=", "if", "#NEWLINE#"};
  static const std::vector<std::string> ref_types{"NEXT_SYNTAX", "LAST_READ", "LAST_WRITE", "COMPUTED_FROM"};
  nlohmann::json j;
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < n; ++i) tokens.push_back(vocab[rng() % vocab.size()]);
  j["source_tokens"] = tokens;
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t k = 0; k < n; ++k) {
    const auto t = rng() % ref_types.size();
    edges.push_back({rng() % n, rng() % n, t, ref_types[t]});
  }
  j["edges"] = edges;
  j["has_bug"] = rng() % 2 == 0;
  j["error_location"] = rng() % n;
  j["repair_targets"] = std::vector<std::size_t>{rng() % n, rng() % n};
  j["repair_candidates"] = std::vector<std::size_t>{rng() % n};
  j["provenances"] = nlohmann::json::array({{{"datasetProvenance", {{"filepath", id + ".py"}}}}});
  if (!id.empty()) j["sample_id"] = id;
  return j;
}

// Random spanning tree typed by random heads, masked format symbols, sequence edges.
inline ProgramGraph random_graph(std::mt19937_64& rng, std::string id, std::vector<std::string> nodes,
                                 std::size_t num_heads) {
  ProgramGraph g;
  g.sample_id = std::move(id);
  g.num_heads = num_heads;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (default_mask_symbols().contains(nodes[i])) g.masked_nodes.insert(i);
  }
  g.nodes = std::move(nodes);
  const auto table = g.types();
  for (std::size_t v = 1; v < g.nodes.size(); ++v) {
    const std::size_t u = rng() % v;
    if (g.is_masked(u) || g.is_masked(v)) continue;
    const int type = table.head_type(static_cast<int>(1 + rng() % num_heads));
    g.edges.push_back({u, v, type});
    g.edges.push_back({v, u, table.reverse_of(type)});
  }
  return add_sequence_edges(std::move(g));
}

// `count` ATTN1 files of random samples with H=12; file names are not in
// sample-id order so output ordering is exercised.
inline std::vector<TokenizedSample> write_corpus(std::mt19937_64& rng, const std::filesystem::path& dir,
                                                 std::size_t count, std::size_t layers = 2) {
  std::vector<TokenizedSample> samples;
  for (std::size_t k = 0; k < count; ++k) {
    auto sample = random_sample(rng, 1 + rng() % 14, 3, "sample_" + std::to_string(1000 + k));
    if (k % 5 == 1 && sample.word_tokens.size() > 2) sample.word_tokens[1] = "#NEWLINE#";
    const auto tensor = random_tensor(rng, layers, 12, sample.subword_tokens.size());
    write_attn_file(sample, tensor, dir / (std::to_string((k * 7919) % 1000003) + ".attn"));
    samples.push_back(std::move(sample));
  }
  return samples;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("attngraph_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace attngraph::testing
