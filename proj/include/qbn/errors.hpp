#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbn {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition (unknown variable, overlapping
// sets, out-of-range parameter, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed input document (JSON, CSV).
class ParseError : public Error {
 public:
  using Error::Error;
};

// A conditional was requested given evidence of probability zero. Such a
// query is illegal under the net that was asked.
class ZeroEvidence : public Error {
 public:
  explicit ZeroEvidence(const std::string& what, std::vector<std::size_t> indices = {})
      : Error(what), indices_(std::move(indices)) {}
  const std::vector<std::size_t>& indices() const { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

// Queries whose evidence is matched by no tuple of a dataset.
class UnmatchedEvidence : public Error {
 public:
  UnmatchedEvidence(const std::string& what, std::vector<std::size_t> indices)
      : Error(what), indices_(std::move(indices)) {}
  const std::vector<std::size_t>& indices() const { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

// A size guard tripped (enumeration cap, pattern expansion cap, draw cap).
class CapExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace qbn
