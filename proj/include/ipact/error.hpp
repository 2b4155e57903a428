// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ipact {

/// Base for every error raised by the toolkit. Maps to exit code 1 in the CLI.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record. Carries the 1-based line number of the offending record.
class ParseError : public Error {
public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what),
        source_(std::move(source)), line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

private:
  std::string source_;
  std::size_t line_;
};

/// A day or day range outside the bounds of a store.
class RangeError : public Error {
public:
  using Error::Error;
};

}  // namespace ipact
