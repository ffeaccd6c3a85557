#pragma once

// ATTN1 container: the exchange format between the attention dump tool and
// this library.
//
//   offset 0   5 bytes   magic "ATTN1"
//   offset 5   4 bytes   header length N, unsigned little-endian
//   offset 9   N bytes   UTF-8 JSON object (keys sorted, no whitespace):
//                          model          string   checkpoint identifier
//                          sample_id      string
//                          source_text    string
//                          layers, heads, n         positive integers
//                          word_tokens    [string]
//                          subword_tokens [string]  length n
//                          alignment      [int]     length n, -1 = special token
//   offset 9+N           layers*heads*n*n IEEE-754 binary32 values,
//                        little-endian, [layer][head][i][j] row-major.
//
// Unknown header keys are ignored on read.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include <json.hpp>

#include "attngraph/attn_model.hpp"
#include "attngraph/errors.hpp"

namespace attngraph {

inline constexpr std::string_view kAttnMagic = "ATTN1";

struct AttnFileContents {
  TokenizedSample sample;
  AttentionTensor tensor;
};

namespace detail {

inline void put_u32_le(std::vector<std::uint8_t>& out, std::uint32_t value) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(value >> shift));
}

inline std::uint32_t get_u32_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

template <typename T>
T header_field(const nlohmann::json& header, const char* key) {
  const auto it = header.find(key);
  if (it == header.end()) throw FormatError(std::string("ATTN1 header is missing '") + key + "'");
  if constexpr (std::is_unsigned_v<T>) {
    if (!it->is_number_unsigned()) {
      throw FormatError(std::string("ATTN1 header field '") + key + "' must be a non-negative integer");
    }
  }
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(std::string("ATTN1 header field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_attn(const TokenizedSample& sample, const AttentionTensor& tensor) {
  validate_pair(sample, tensor);
  validate_tensor(tensor);

  nlohmann::json header;
  header["model"] = tensor.model_id();
  header["sample_id"] = sample.sample_id;
  header["source_text"] = sample.source_text;
  header["layers"] = tensor.layers();
  header["heads"] = tensor.heads();
  header["n"] = tensor.size();
  header["word_tokens"] = sample.word_tokens;
  header["subword_tokens"] = sample.subword_tokens;
  header["alignment"] = sample.alignment;
  const std::string text = header.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);

  std::vector<std::uint8_t> out;
  out.reserve(kAttnMagic.size() + 4 + text.size() + tensor.values().size() * 4);
  out.insert(out.end(), kAttnMagic.begin(), kAttnMagic.end());
  detail::put_u32_le(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const float value : tensor.values()) detail::put_u32_le(out, std::bit_cast<std::uint32_t>(value));
  return out;
}

inline AttnFileContents decode_attn(std::span<const std::uint8_t> bytes) {
  const std::size_t magic_size = kAttnMagic.size();
  if (bytes.size() < magic_size ||
      !std::equal(kAttnMagic.begin(), kAttnMagic.end(), bytes.begin(),
                  [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; })) {
    throw FormatError("not an ATTN1 file (bad magic)");
  }
  if (bytes.size() < magic_size + 4) throw TruncationError("ATTN1 file ends inside the header length");
  const std::uint32_t header_size = detail::get_u32_le(bytes.data() + magic_size);
  const std::size_t payload_offset = magic_size + 4 + header_size;
  if (bytes.size() < payload_offset) throw TruncationError("ATTN1 file ends inside the header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(magic_size + 4),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(payload_offset));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("ATTN1 header is not valid JSON: ") + e.what());
  }
  if (!header.is_object()) throw FormatError("ATTN1 header is not a JSON object");

  const auto layers = detail::header_field<std::size_t>(header, "layers");
  const auto heads = detail::header_field<std::size_t>(header, "heads");
  const auto n = detail::header_field<std::size_t>(header, "n");
  if (layers == 0 || heads == 0 || n == 0) throw FormatError("ATTN1 header has a zero dimension");
  if (layers > 4096 || heads > 4096 || n > (1U << 16)) throw FormatError("ATTN1 header dimensions are implausible");

  TokenizedSample sample;
  sample.sample_id = detail::header_field<std::string>(header, "sample_id");
  sample.source_text = detail::header_field<std::string>(header, "source_text");
  sample.word_tokens = detail::header_field<std::vector<std::string>>(header, "word_tokens");
  sample.subword_tokens = detail::header_field<std::vector<std::string>>(header, "subword_tokens");
  sample.alignment = detail::header_field<std::vector<std::int32_t>>(header, "alignment");

  const std::size_t count = layers * heads * n * n;
  const std::size_t payload_size = bytes.size() - payload_offset;
  if (payload_size != count * 4) {
    throw TruncationError("ATTN1 payload is " + std::to_string(payload_size) + " bytes, expected " +
                          std::to_string(count * 4));
  }
  std::vector<float> scores(count);
  const std::uint8_t* p = bytes.data() + payload_offset;
  for (std::size_t k = 0; k < count; ++k, p += 4) scores[k] = std::bit_cast<float>(detail::get_u32_le(p));

  AttentionTensor tensor(layers, heads, n, std::move(scores),
                         detail::header_field<std::string>(header, "model"));
  validate_pair(sample, tensor);
  validate_tensor(tensor);
  return {std::move(sample), std::move(tensor)};
}

inline AttnFileContents read_attn_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_attn(bytes);
}

inline void write_attn_file(const TokenizedSample& sample, const AttentionTensor& tensor,
                            const std::filesystem::path& path) {
  const auto bytes = encode_attn(sample, tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace attngraph
