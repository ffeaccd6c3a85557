#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "attngraph/aggregate.hpp"
#include "test_util.hpp"

using namespace attngraph;
using attngraph::testing::identity_sample;
using attngraph::testing::one_hot_tensor;
using attngraph::testing::random_sample;
using attngraph::testing::random_tensor;

namespace {

// Straight loop over every subword pair, no block bookkeeping.
double oracle_cell(const AttentionTensor& t, const TokenizedSample& s, std::size_t l0, std::size_t h0,
                   std::size_t u, std::size_t v, Reduction mode) {
  double best = -1.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.alignment.size(); ++i) {
    for (std::size_t j = 0; j < s.alignment.size(); ++j) {
      if (s.alignment[i] != static_cast<int>(u) || s.alignment[j] != static_cast<int>(v)) continue;
      const double x = t.at(l0, h0, i, j);
      best = std::max(best, x);
      sum += x;
      ++count;
    }
  }
  return mode == Reduction::max ? best : sum / static_cast<double>(count);
}

AttentionTensor permute_heads(const AttentionTensor& t, const std::vector<std::size_t>& perm) {
  AttentionTensor out(t.layers(), t.heads(), t.size(), t.model_id());
  for (std::size_t l = 0; l < t.layers(); ++l) {
    for (std::size_t h = 0; h < t.heads(); ++h) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = 0; j < t.size(); ++j) out.at(l, perm[h], i, j) = t.at(l, h, i, j);
      }
    }
  }
  return out;
}

}  // namespace

TEST(ReduceSubwords, SingletonBlocksAreIdentity) {
  std::mt19937_64 rng(11);
  const auto sample = identity_sample({"a", "b", "c", "d"});
  const auto tensor = random_tensor(rng, 2, 3, 4);
  for (std::size_t h = 1; h <= 3; ++h) {
    const auto m = reduce_subwords(tensor, sample, 2, h);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(m(i, j), static_cast<double>(tensor.at(1, h - 1, i, j)));
    }
  }
}

TEST(ReduceSubwords, MaxOfTwoSubwords) {
  // word u = subwords {1, 2}, word v = subword {3}; subword 0 is a special token
  TokenizedSample s{"s", "", {"u", "v"}, {"<s>", "u1", "u2", "v"}, {-1, 0, 0, 1}};
  AttentionTensor t(1, 1, 4);
  t.at(0, 0, 0, 0) = 1.0F;
  t.at(0, 0, 1, 3) = 0.2F;
  t.at(0, 0, 1, 0) = 0.8F;
  t.at(0, 0, 2, 3) = 0.5F;
  t.at(0, 0, 2, 0) = 0.5F;
  t.at(0, 0, 3, 3) = 1.0F;
  const auto m = reduce_subwords(t, s, 1, 1, Reduction::max);
  EXPECT_DOUBLE_EQ(m(0, 1), 0.5);
  const auto mean = reduce_subwords(t, s, 1, 1, Reduction::mean);
  EXPECT_DOUBLE_EQ(mean(0, 1), (static_cast<double>(0.2F) + 0.5) / 2.0);
}

TEST(ReduceSubwords, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const auto sample = random_sample(rng, 5, 3);
    const auto tensor = random_tensor(rng, 2, 2, sample.subword_tokens.size());
    for (const auto mode : {Reduction::max, Reduction::mean}) {
      const auto m = reduce_subwords(tensor, sample, 1, 2, mode);
      for (std::size_t u = 0; u < 5; ++u) {
        for (std::size_t v = 0; v < 5; ++v) EXPECT_DOUBLE_EQ(m(u, v), oracle_cell(tensor, sample, 0, 1, u, v, mode));
      }
    }
  }
}

TEST(ReduceSubwords, WordWithoutSubwordsIsAlignmentError) {
  TokenizedSample s{"s", "", {"a", "b", "c"}, {"a", "c"}, {0, 2}};
  AttentionTensor t(1, 1, 2, std::vector<float>{1, 0, 0, 1});
  EXPECT_THROW(reduce_subwords(t, s, 1, 1), AlignmentError);
}

TEST(AggregateLayer, SingleHeadIsIdentity) {
  std::mt19937_64 rng(13);
  const auto sample = random_sample(rng, 4, 2);
  const auto tensor = random_tensor(rng, 3, 1, sample.subword_tokens.size());
  const auto agg = aggregate_layer(tensor, sample, 2);
  EXPECT_EQ(agg.weight, reduce_subwords(tensor, sample, 2, 1));
  EXPECT_EQ(agg.head_id, SquareMatrix<int>(4, 1));
  EXPECT_EQ(agg.layer, 2U);
}

TEST(AggregateLayer, LargerHeadWins) {
  const auto sample = identity_sample({"a", "b"});
  AttentionTensor t(1, 2, 2);
  t.at(0, 0, 0, 1) = 0.3F;
  t.at(0, 1, 0, 1) = 0.7F;
  const auto agg = aggregate_layer(t, sample, 1);
  EXPECT_DOUBLE_EQ(agg.weight(0, 1), static_cast<double>(0.7F));
  EXPECT_EQ(agg.head_id(0, 1), 2);
}

TEST(AggregateLayer, TiesGoToTheLowestHead) {
  const auto sample = identity_sample({"a", "b"});
  AttentionTensor t(1, 3, 2);
  t.at(0, 1, 0, 1) = 0.5F;
  t.at(0, 2, 0, 1) = 0.5F;
  EXPECT_EQ(aggregate_layer(t, sample, 1).head_id(0, 1), 2);
  EXPECT_EQ(aggregate_layer(t, sample, 1).head_id(1, 0), 1);  // all zero
}

TEST(AggregateLayer, DominanceAndBruteForceMax) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sample = random_sample(rng, 6, 2);
    const auto tensor = random_tensor(rng, 2, 4, sample.subword_tokens.size());
    for (std::size_t layer = 1; layer <= 2; ++layer) {
      const auto agg = aggregate_layer(tensor, sample, layer);
      for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
          double best = -1.0;
          for (std::size_t h = 0; h < 4; ++h) {
            const double x = oracle_cell(tensor, sample, layer - 1, h, i, j, Reduction::max);
            EXPECT_GE(agg.weight(i, j), x);
            best = std::max(best, x);
          }
          EXPECT_EQ(agg.weight(i, j), best);
          EXPECT_EQ(agg.weight(i, j),
                    oracle_cell(tensor, sample, layer - 1, agg.head_id(i, j) - 1, i, j, Reduction::max));
        }
      }
    }
  }
}

TEST(AggregateLayer, HeadPermutationInvariance) {
  std::mt19937_64 rng(15);
  std::vector<std::size_t> perm(4);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (int trial = 0; trial < 20; ++trial) {
    const auto sample = random_sample(rng, 5, 2);
    const auto tensor = random_tensor(rng, 1, 4, sample.subword_tokens.size());
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto a = aggregate_layer(tensor, sample, 1);
    const auto b = aggregate_layer(permute_heads(tensor, perm), sample, 1);
    EXPECT_EQ(a.weight, b.weight);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        EXPECT_EQ(static_cast<int>(perm[static_cast<std::size_t>(a.head_id(i, j) - 1)]) + 1, b.head_id(i, j));
      }
    }
  }
}

TEST(AggregateLayer, LayerOutOfRange) {
  const auto sample = identity_sample({"a"});
  AttentionTensor t(2, 1, 1, std::vector<float>{1, 1});
  EXPECT_THROW(aggregate_layer(t, sample, 0), ArgumentError);
  EXPECT_THROW(aggregate_layer(t, sample, 3), ArgumentError);
  EXPECT_THROW(reduce_subwords(t, sample, 1, 2), ArgumentError);
}

TEST(AggregateLayer, SubwordLevelKeepsSpecialTokens) {
  std::mt19937_64 rng(16);
  const auto tensor = random_tensor(rng, 1, 3, 7);
  const auto agg = aggregate_layer_subwords(tensor, 1);
  ASSERT_EQ(agg.size(), 7U);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 7; ++j) {
      const float best = std::max({tensor.at(0, 0, i, j), tensor.at(0, 1, i, j), tensor.at(0, 2, i, j)});
      EXPECT_EQ(agg.weight(i, j), static_cast<double>(best));
    }
  }
}

TEST(ProfileLayers, PureDiagonal) {
  const auto sample = identity_sample({"a", "b", "c", "d", "e"});
  const auto t = one_hot_tensor(3, 2, 5, [](std::size_t i) { return i; });
  const auto profiles = profile_layers(t, sample);
  ASSERT_EQ(profiles.size(), 3U);
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_EQ(profiles[l].layer, l + 1);
    EXPECT_EQ(profiles[l].mean_abs_offset, 0.0);
    EXPECT_EQ(profiles[l].band_mass, 1.0);
  }
}

TEST(ProfileLayers, ShiftedDiagonal) {
  const auto sample = identity_sample({"a", "b", "c", "d"});
  // the last token attends to its predecessor, still offset 1
  const auto t = one_hot_tensor(1, 1, 4, [](std::size_t i) { return i + 1 < 4 ? i + 1 : i - 1; });
  const auto p = profile_layers(t, sample).front();
  EXPECT_EQ(p.mean_abs_offset, 1.0);
  EXPECT_EQ(p.band_mass, 1.0);
}

TEST(ProfileLayers, UniformBandMass) {
  const auto sample = identity_sample({"a", "b", "c", "d"});
  AttentionTensor t(1, 2, 4);
  for (auto& v : t.values()) v = 0.25F;
  // cells with |i - j| <= 1 on a 4x4 grid: 4 diagonal + 2 * 3 off-diagonal
  std::size_t band_cells = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) band_cells += std::abs(i - j) <= 1;
  }
  ASSERT_EQ(band_cells, 10U);
  EXPECT_DOUBLE_EQ(profile_layers(t, sample).front().band_mass, 10.0 / 16.0);
  EXPECT_EQ(profile_layers(t, sample).front().mean_abs_offset, (0.0 + 1 + 2 + 3) / 4);  // first column on ties
}

TEST(Reduction, ParseAndPrint) {
  EXPECT_EQ(parse_reduction("max"), Reduction::max);
  EXPECT_EQ(parse_reduction("mean"), Reduction::mean);
  EXPECT_EQ(to_string(Reduction::mean), "mean");
  EXPECT_THROW(parse_reduction("sum"), ArgumentError);
}
