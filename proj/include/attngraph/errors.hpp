#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace attngraph {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Container does not start with the expected magic or its header is unreadable.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Payload shorter or longer than the header's dimensions imply.
class TruncationError : public Error {
 public:
  using Error::Error;
};

// A data invariant does not hold (row sums, dimensions, value ranges).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Row-sum violation; carries the offending (layer, head, row), all 0-based.
class RowSumError : public ValidationError {
 public:
  RowSumError(std::size_t layer, std::size_t head, std::size_t row, double sum)
      : ValidationError("attention row does not sum to 1 (layer " + std::to_string(layer) +
                        ", head " + std::to_string(head) + ", row " + std::to_string(row) +
                        ", sum " + std::to_string(sum) + ")"),
        layer_(layer),
        head_(head),
        row_(row) {}

  std::size_t layer() const noexcept { return layer_; }
  std::size_t head() const noexcept { return head_; }
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t layer_;
  std::size_t head_;
  std::size_t row_;
};

// Word/subword or node-space alignment is broken.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// Caller passed an out-of-range index or an unusable size.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Source text did not parse cleanly under the grammar.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Line-delimited records do not have the expected field layout.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace attngraph
