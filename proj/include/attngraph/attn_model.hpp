#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "attngraph/errors.hpp"

namespace attngraph {

// Alignment value of a subword that belongs to no word (model special tokens).
inline constexpr std::int32_t kSpecialToken = -1;

// Tolerance on |sum_j A[i][j] - 1| for an attention row.
inline constexpr double kRowSumTolerance = 1e-3;

/// One tokenized input at both granularities.
///
/// `word_tokens` are the graph's nodes. `subword_tokens` are what the model saw,
/// special tokens included; `alignment[k]` names the word that owns subword k,
/// or kSpecialToken.
struct TokenizedSample {
  std::string sample_id;
  std::string source_text;
  std::vector<std::string> word_tokens;
  std::vector<std::string> subword_tokens;
  std::vector<std::int32_t> alignment;

  friend bool operator==(const TokenizedSample&, const TokenizedSample&) = default;
};

// Throws AlignmentError if the word/subword alignment is inconsistent.
inline void validate_sample(const TokenizedSample& sample) {
  if (sample.alignment.size() != sample.subword_tokens.size()) {
    throw AlignmentError("sample '" + sample.sample_id + "': " +
                         std::to_string(sample.alignment.size()) + " alignment entries for " +
                         std::to_string(sample.subword_tokens.size()) + " subwords");
  }
  const auto n_words = static_cast<std::int64_t>(sample.word_tokens.size());
  std::int64_t previous = -1;
  for (std::size_t k = 0; k < sample.alignment.size(); ++k) {
    const std::int32_t word = sample.alignment[k];
    if (word == kSpecialToken) continue;
    if (word < 0 || word >= n_words) {
      throw AlignmentError("sample '" + sample.sample_id + "': subword " + std::to_string(k) +
                           " aligned to invalid word " + std::to_string(word));
    }
    if (word < previous) {
      throw AlignmentError("sample '" + sample.sample_id + "': alignment decreases at subword " +
                           std::to_string(k));
    }
    previous = word;
  }
}

/// L x H x n x n attention scores, indexed [layer][head][i][j] (all 0-based here).
/// Row i of a head is the distribution of how much token i attends to each j.
class AttentionTensor {
 public:
  AttentionTensor() = default;

  AttentionTensor(std::size_t layers, std::size_t heads, std::size_t n, std::string model_id = {})
      : model_id_(std::move(model_id)),
        layers_(layers),
        heads_(heads),
        n_(n),
        scores_(layers * heads * n * n, 0.0F) {
    if (layers == 0 || heads == 0 || n == 0) {
      throw ValidationError("attention tensor dimensions must be positive");
    }
  }

  AttentionTensor(std::size_t layers, std::size_t heads, std::size_t n, std::vector<float> scores,
                  std::string model_id = {})
      : model_id_(std::move(model_id)), layers_(layers), heads_(heads), n_(n), scores_(std::move(scores)) {
    if (layers == 0 || heads == 0 || n == 0) {
      throw ValidationError("attention tensor dimensions must be positive");
    }
    if (scores_.size() != layers * heads * n * n) {
      throw ValidationError("score buffer holds " + std::to_string(scores_.size()) +
                            " values, expected " + std::to_string(layers * heads * n * n));
    }
  }

  std::size_t layers() const noexcept { return layers_; }
  std::size_t heads() const noexcept { return heads_; }
  std::size_t size() const noexcept { return n_; }
  const std::string& model_id() const noexcept { return model_id_; }

  float& at(std::size_t layer, std::size_t head, std::size_t i, std::size_t j) {
    return scores_[offset(layer, head, i, j)];
  }
  float at(std::size_t layer, std::size_t head, std::size_t i, std::size_t j) const {
    return scores_[offset(layer, head, i, j)];
  }

  std::span<float> row(std::size_t layer, std::size_t head, std::size_t i) {
    return {scores_.data() + offset(layer, head, i, 0), n_};
  }
  std::span<const float> row(std::size_t layer, std::size_t head, std::size_t i) const {
    return {scores_.data() + offset(layer, head, i, 0), n_};
  }

  std::span<const float> values() const noexcept { return scores_; }
  std::span<float> values() noexcept { return scores_; }

  friend bool operator==(const AttentionTensor&, const AttentionTensor&) = default;

 private:
  std::size_t offset(std::size_t layer, std::size_t head, std::size_t i, std::size_t j) const {
    return ((layer * heads_ + head) * n_ + i) * n_ + j;
  }

  std::string model_id_;
  std::size_t layers_ = 0;
  std::size_t heads_ = 0;
  std::size_t n_ = 0;
  std::vector<float> scores_;
};

// Scores in [0,1] and every row row-stochastic within kRowSumTolerance.
// Throws RowSumError for the first bad row, ValidationError for bad cells.
inline void validate_tensor(const AttentionTensor& tensor) {
  for (std::size_t l = 0; l < tensor.layers(); ++l) {
    for (std::size_t h = 0; h < tensor.heads(); ++h) {
      for (std::size_t i = 0; i < tensor.size(); ++i) {
        double sum = 0.0;
        for (const float value : tensor.row(l, h, i)) {
          if (!(value >= 0.0F && value <= 1.0F)) {
            throw ValidationError("attention score outside [0,1] at layer " + std::to_string(l) +
                                  ", head " + std::to_string(h) + ", row " + std::to_string(i));
          }
          sum += value;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) throw RowSumError(l, h, i, sum);
      }
    }
  }
}

// Sample and tensor describe the same subword sequence.
inline void validate_pair(const TokenizedSample& sample, const AttentionTensor& tensor) {
  validate_sample(sample);
  if (sample.subword_tokens.size() != tensor.size()) {
    throw ValidationError("sample '" + sample.sample_id + "' has " +
                          std::to_string(sample.subword_tokens.size()) +
                          " subwords but the tensor has n = " + std::to_string(tensor.size()));
  }
}

}  // namespace attngraph
