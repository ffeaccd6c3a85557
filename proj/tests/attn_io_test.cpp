#include <gtest/gtest.h>

#include <bit>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "attngraph/attn_io.hpp"
#include "test_util.hpp"

using namespace attngraph;
using attngraph::testing::random_sample;
using attngraph::testing::random_tensor;
using attngraph::testing::TempDir;

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

TokenizedSample two_token_sample() {
  return {"s0", "a b", {"a", "b"}, {"a", "b"}, {0, 1}};
}

AttentionTensor two_token_tensor() { return AttentionTensor(1, 1, 2, {0.25F, 0.75F, 1.0F, 0.0F}, "m"); }

}  // namespace

TEST(AttnIo, RoundtripIsBitIdentical) {
  std::mt19937_64 rng(7);
  TempDir dir("io");
  for (int trial = 0; trial < 25; ++trial) {
    const auto sample = random_sample(rng, 1 + rng() % 9, 3, "s" + std::to_string(trial));
    const auto tensor = random_tensor(rng, 1 + rng() % 3, 1 + rng() % 4, sample.subword_tokens.size());
    const auto path = dir / "x.attn";
    write_attn_file(sample, tensor, path);
    const auto back = read_attn_file(path);
    EXPECT_EQ(back.sample, sample);
    ASSERT_EQ(back.tensor.values().size(), tensor.values().size());
    for (std::size_t k = 0; k < tensor.values().size(); ++k) {
      EXPECT_EQ(std::bit_cast<std::uint32_t>(back.tensor.values()[k]),
                std::bit_cast<std::uint32_t>(tensor.values()[k]));
    }
    EXPECT_EQ(back.tensor, tensor);
  }
}

TEST(AttnIo, WritesAreByteDeterministic) {
  TempDir dir("io");
  write_attn_file(two_token_sample(), two_token_tensor(), dir / "a.attn");
  write_attn_file(two_token_sample(), two_token_tensor(), dir / "b.attn");
  EXPECT_EQ(slurp(dir / "a.attn"), slurp(dir / "b.attn"));
}

TEST(AttnIo, MinimalTensorHasSixteenBytePayload) {
  const auto bytes = encode_attn(two_token_sample(), two_token_tensor());
  const std::uint32_t header = bytes[5] | (bytes[6] << 8) | (bytes[7] << 16) | (bytes[8] << 24);
  EXPECT_EQ(bytes.size() - 9 - header, 16U);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 5), "ATTN1");
}

// Assembled by hand from the documented layout, independent of the writer.
TEST(AttnIo, ReadsHandAssembledContainer) {
  const std::string header =
      R"({"alignment":[-1,0,0,1,-1],"heads":1,"layers":1,"model":"dump-tool","n":5,"sample_id":"x",)"
      R"("source_text":"ab c","subword_tokens":["<s>","a","b","c","</s>"],"word_tokens":["ab","c"],"extra":1})";
  std::vector<std::uint8_t> bytes{'A', 'T', 'T', 'N', '1'};
  for (int s = 0; s < 32; s += 8) bytes.push_back(static_cast<std::uint8_t>(header.size() >> s));
  bytes.insert(bytes.end(), header.begin(), header.end());
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const float v = i == j ? 1.0F : 0.0F;
      const auto u = std::bit_cast<std::uint32_t>(v);
      for (int s = 0; s < 32; s += 8) bytes.push_back(static_cast<std::uint8_t>(u >> s));
    }
  }
  const auto c = decode_attn(bytes);
  EXPECT_EQ(c.tensor.model_id(), "dump-tool");
  EXPECT_EQ(c.sample.word_tokens, (std::vector<std::string>{"ab", "c"}));
  EXPECT_EQ(c.sample.alignment, (std::vector<std::int32_t>{-1, 0, 0, 1, -1}));
  EXPECT_EQ(c.tensor.at(0, 0, 3, 3), 1.0F);
  EXPECT_EQ(c.tensor.at(0, 0, 3, 2), 0.0F);
}

TEST(AttnIo, BadMagicIsFormatError) {
  auto bytes = encode_attn(two_token_sample(), two_token_tensor());
  bytes[4] = '2';
  EXPECT_THROW(decode_attn(bytes), FormatError);
  EXPECT_THROW(decode_attn(std::vector<std::uint8_t>{'A', 'T'}), FormatError);
}

TEST(AttnIo, PayloadLengthMismatchIsTruncationError) {
  auto bytes = encode_attn(two_token_sample(), two_token_tensor());
  bytes.pop_back();
  EXPECT_THROW(decode_attn(bytes), TruncationError);
  bytes.push_back(0);
  bytes.push_back(0);
  EXPECT_THROW(decode_attn(bytes), TruncationError);
  bytes.resize(12);
  EXPECT_THROW(decode_attn(bytes), TruncationError);
}

TEST(AttnIo, RowSumViolationNamesTheRow) {
  TempDir dir("io");
  std::mt19937_64 rng(3);
  const auto sample = random_sample(rng, 3, 1);
  const auto tensor = random_tensor(rng, 2, 3, sample.subword_tokens.size());
  auto bytes = encode_attn(sample, tensor);
  // Halve every entry of (layer 1, head 2, row 3) so the row sums to 0.5.
  const std::uint32_t header = bytes[5] | (bytes[6] << 8) | (bytes[7] << 16) | (bytes[8] << 24);
  const std::size_t n = tensor.size();
  const std::size_t row_offset = 9 + header + (((1 * 3 + 2) * n + 3) * n) * 4;
  for (std::size_t j = 0; j < n; ++j) {
    auto* p = bytes.data() + row_offset + j * 4;
    const float v = std::bit_cast<float>(static_cast<std::uint32_t>(p[0] | (p[1] << 8) | (p[2] << 16) | (p[3] << 24)));
    const auto u = std::bit_cast<std::uint32_t>(v * 0.5F);
    for (int s = 0; s < 4; ++s) p[s] = static_cast<std::uint8_t>(u >> (8 * s));
  }
  dump(dir / "bad.attn", bytes);
  try {
    read_attn_file(dir / "bad.attn");
    FAIL() << "expected RowSumError";
  } catch (const RowSumError& e) {
    EXPECT_EQ(e.layer(), 1U);
    EXPECT_EQ(e.head(), 2U);
    EXPECT_EQ(e.row(), 3U);
  }
}

TEST(AttnIo, RowSumToleranceIsOneInAThousand) {
  AttentionTensor ok(1, 1, 2, std::vector<float>{0.5F, 0.5009F, 1.0F, 0.0F});
  EXPECT_NO_THROW(validate_tensor(ok));
  AttentionTensor bad(1, 1, 2, std::vector<float>{0.5F, 0.5012F, 1.0F, 0.0F});
  EXPECT_THROW(validate_tensor(bad), RowSumError);
  AttentionTensor negative(1, 1, 2, std::vector<float>{1.1F, -0.1F, 1.0F, 0.0F});
  EXPECT_THROW(validate_tensor(negative), ValidationError);
}

TEST(AttnIo, SubwordCountMismatchIsValidationError) {
  auto sample = two_token_sample();
  sample.subword_tokens.push_back("c");
  sample.alignment.push_back(1);
  EXPECT_THROW(encode_attn(sample, two_token_tensor()), ValidationError);

  auto short_alignment = two_token_sample();
  short_alignment.alignment.pop_back();
  EXPECT_THROW(encode_attn(short_alignment, two_token_tensor()), AlignmentError);
}

TEST(AttnIo, AlignmentInvariants) {
  TokenizedSample s{"s", "", {"a", "b"}, {"x", "y", "z"}, {1, 0, 1}};
  EXPECT_THROW(validate_sample(s), AlignmentError);  // decreasing
  s.alignment = {0, 2, -1};
  EXPECT_THROW(validate_sample(s), AlignmentError);  // out of range
  s.alignment = {-1, 0, 1};
  EXPECT_NO_THROW(validate_sample(s));
}

TEST(AttnIo, ZeroDimensionsRejected) {
  EXPECT_THROW(AttentionTensor(0, 1, 1), ValidationError);
  EXPECT_THROW(AttentionTensor(1, 1, 2, std::vector<float>(3)), ValidationError);
}
