#ifndef HRNACC_TYPES_HPP
#define HRNACC_TYPES_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace hrnacc {

// A contiguous token range, end inclusive.
struct Span {
  int start = 0;
  int end = 0;

  int width() const { return end - start + 1; }
  bool contains(int t) const { return t >= start && t <= end; }

  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

struct SpanHash {
  std::size_t operator()(const Span& s) const {
    return std::hash<std::int64_t>()((std::int64_t(s.start) << 32) ^ std::uint32_t(s.end));
  }
};

// Base error; subclasses map to CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (exit code 2).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or corrupt data: misaligned embeddings, NaNs, bad gold
// annotations (exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

// Gold-annotation violations; a kind of data error.
class AnnotationError : public DataError {
 public:
  using DataError::DataError;
};

// Bad configuration or dimension mismatch (exit code 3).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// API misuse: illegal env action, stale cache, out-of-range index.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace hrnacc

#endif  // HRNACC_TYPES_HPP
