// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace ipact {

/// Reads LF-terminated lines from a file (plain or gzip, detected transparently) or from memory.
/// A trailing '\r' is stripped. Returned views stay valid until the next call to next().
class LineReader {
public:
  static LineReader open(const std::filesystem::path& path);
  static LineReader from_string(std::string content, std::string name = "<memory>");
  static LineReader from_lines(const std::vector<std::string>& lines, std::string name = "<memory>");

  LineReader(LineReader&&) noexcept;
  LineReader& operator=(LineReader&&) noexcept;
  ~LineReader();

  bool next(std::string_view& line);
  /// 1-based number of the line last returned by next().
  std::size_t line_number() const noexcept { return line_no_; }
  const std::string& name() const noexcept { return name_; }

private:
  using Source = std::function<std::size_t(char*, std::size_t)>;
  LineReader(Source source, std::string name);
  bool fill();

  Source source_;
  std::string name_;
  std::vector<char> buf_;
  std::size_t begin_ = 0;
  std::size_t end_ = 0;
  bool eof_ = false;
  std::size_t line_no_ = 0;
};

/// Writes via a sibling temporary file and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);
std::string read_file(const std::filesystem::path& path);

/// Splits one RFC-4180 record. Returns false if a quoted field is not closed on this line
/// or a quote appears inside an unquoted field.
bool split_csv_record(std::string_view line, std::vector<std::string>& fields);
/// Quotes a field if it contains a comma, quote, or newline.
std::string csv_quote(std::string_view field);

}  // namespace ipact
