#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "attngraph/attn_model.hpp"
#include "attngraph/errors.hpp"
#include "attngraph/matrix.hpp"

namespace attngraph {

// How the subword block of a word pair collapses to one score.
enum class Reduction { max, mean };

inline std::string_view to_string(Reduction r) { return r == Reduction::max ? "max" : "mean"; }

inline Reduction parse_reduction(std::string_view text) {
  if (text == "max") return Reduction::max;
  if (text == "mean") return Reduction::mean;
  throw ArgumentError("unknown reduction '" + std::string(text) + "' (expected max or mean)");
}

/// Per-layer max-over-heads attention between word tokens.
///
/// `weight(i, j)` is the largest head score of word i attending to word j;
/// `head_id(i, j)` is the 1-based head that attains it (lowest head on ties).
struct AggregatedMatrix {
  std::size_t layer = 0;  // 1-based
  std::size_t num_heads = 0;
  SquareMatrix<double> weight;
  SquareMatrix<int> head_id;

  std::size_t size() const noexcept { return weight.size(); }
};

struct LayerProfile {
  std::size_t layer = 0;  // 1-based
  double mean_abs_offset = 0.0;
  double band_mass = 0.0;
};

namespace detail {

inline void check_layer(const AttentionTensor& tensor, std::size_t layer) {
  if (layer < 1 || layer > tensor.layers()) {
    throw ArgumentError("layer " + std::to_string(layer) + " outside [1, " +
                        std::to_string(tensor.layers()) + "]");
  }
}

inline void check_head(const AttentionTensor& tensor, std::size_t head) {
  if (head < 1 || head > tensor.heads()) {
    throw ArgumentError("head " + std::to_string(head) + " outside [1, " + std::to_string(tensor.heads()) +
                        "]");
  }
}

// Subword positions owned by each word; special tokens are dropped.
inline std::vector<std::vector<std::size_t>> word_blocks(const TokenizedSample& sample) {
  std::vector<std::vector<std::size_t>> blocks(sample.word_tokens.size());
  for (std::size_t k = 0; k < sample.alignment.size(); ++k) {
    const auto word = sample.alignment[k];
    if (word == kSpecialToken) continue;
    blocks[static_cast<std::size_t>(word)].push_back(k);
  }
  for (std::size_t w = 0; w < blocks.size(); ++w) {
    if (blocks[w].empty()) {
      throw AlignmentError("sample '" + sample.sample_id + "': word " + std::to_string(w) + " ('" +
                           sample.word_tokens[w] + "') has no subwords");
    }
  }
  return blocks;
}

inline SquareMatrix<double> reduce_blocks(const AttentionTensor& tensor, std::size_t layer0, std::size_t head0,
                                          const std::vector<std::vector<std::size_t>>& blocks,
                                          Reduction mode) {
  const std::size_t n_words = blocks.size();
  SquareMatrix<double> out(n_words);
  for (std::size_t u = 0; u < n_words; ++u) {
    for (const std::size_t i : blocks[u]) {
      const auto row = tensor.row(layer0, head0, i);
      for (std::size_t v = 0; v < n_words; ++v) {
        double& cell = out(u, v);
        for (const std::size_t j : blocks[v]) {
          const double score = row[j];
          if (mode == Reduction::max) {
            cell = std::max(cell, score);
          } else {
            cell += score;
          }
        }
      }
    }
  }
  if (mode == Reduction::mean) {
    for (std::size_t u = 0; u < n_words; ++u) {
      for (std::size_t v = 0; v < n_words; ++v) {
        out(u, v) /= static_cast<double>(blocks[u].size() * blocks[v].size());
      }
    }
  }
  return out;
}

inline AggregatedMatrix max_over_heads(std::size_t layer, std::size_t num_heads, auto&& head_matrix) {
  AggregatedMatrix agg;
  agg.layer = layer;
  agg.num_heads = num_heads;
  for (std::size_t h = 0; h < num_heads; ++h) {
    const SquareMatrix<double> m = head_matrix(h);
    if (h == 0) {
      agg.weight = m;
      agg.head_id = SquareMatrix<int>(m.size(), 1);
      continue;
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = 0; j < m.size(); ++j) {
        // strict comparison keeps the lowest head on ties
        if (m(i, j) > agg.weight(i, j)) {
          agg.weight(i, j) = m(i, j);
          agg.head_id(i, j) = static_cast<int>(h) + 1;
        }
      }
    }
  }
  return agg;
}

}  // namespace detail

// Word-level matrix for one (layer, head), both 1-based. Cell (u, v) reduces
// the scores of every subword of u attending to every subword of v.
inline SquareMatrix<double> reduce_subwords(const AttentionTensor& tensor, const TokenizedSample& sample,
                                            std::size_t layer, std::size_t head,
                                            Reduction mode = Reduction::max) {
  validate_pair(sample, tensor);
  detail::check_layer(tensor, layer);
  detail::check_head(tensor, head);
  return detail::reduce_blocks(tensor, layer - 1, head - 1, detail::word_blocks(sample), mode);
}

// Aggregated attention score of one layer (1-based): reduce each head to word
// level, then take the elementwise maximum over heads.
inline AggregatedMatrix aggregate_layer(const AttentionTensor& tensor, const TokenizedSample& sample,
                                        std::size_t layer, Reduction mode = Reduction::max) {
  validate_pair(sample, tensor);
  detail::check_layer(tensor, layer);
  const auto blocks = detail::word_blocks(sample);
  return detail::max_over_heads(layer, tensor.heads(), [&](std::size_t h) {
    return detail::reduce_blocks(tensor, layer - 1, h, blocks, mode);
  });
}

// Same aggregation directly on the subword matrix, special tokens included.
inline AggregatedMatrix aggregate_layer_subwords(const AttentionTensor& tensor, std::size_t layer) {
  detail::check_layer(tensor, layer);
  return detail::max_over_heads(layer, tensor.heads(), [&](std::size_t h) {
    SquareMatrix<double> m(tensor.size());
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const auto row = tensor.row(layer - 1, h, i);
      for (std::size_t j = 0; j < tensor.size(); ++j) m(i, j) = row[j];
    }
    return m;
  });
}

// Diagonality of one aggregated matrix. mean_abs_offset averages |i - argmax_j|
// over rows (first column on ties); band_mass is the share of total weight with
// |i - j| <= 1.
inline LayerProfile profile_matrix(const AggregatedMatrix& agg) {
  LayerProfile profile;
  profile.layer = agg.layer;
  const std::size_t n = agg.size();
  if (n == 0) return profile;
  double offset_sum = 0.0;
  double band = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = agg.weight.row(i);
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    offset_sum += static_cast<double>(best > i ? best - i : i - best);
    for (std::size_t j = 0; j < n; ++j) {
      total += row[j];
      if ((i > j ? i - j : j - i) <= 1) band += row[j];
    }
  }
  profile.mean_abs_offset = offset_sum / static_cast<double>(n);
  profile.band_mass = total > 0.0 ? band / total : 0.0;
  return profile;
}

inline std::vector<LayerProfile> profile_layers(const AttentionTensor& tensor, const TokenizedSample& sample,
                                                Reduction mode = Reduction::max) {
  std::vector<LayerProfile> profiles;
  profiles.reserve(tensor.layers());
  for (std::size_t layer = 1; layer <= tensor.layers(); ++layer) {
    profiles.push_back(profile_matrix(aggregate_layer(tensor, sample, layer, mode)));
  }
  return profiles;
}

}  // namespace attngraph
